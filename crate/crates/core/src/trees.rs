//! Finite simplicial trees: parsing, validation, the one-pass leaf reduction
//! and the diameter-4 classification code.
//!
//! Vertex ids are dense `0..vertex_count`. Names are optional and purely
//! cosmetic, except that the quotient-graph builder uses them to match cover
//! letters to generators.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("syntax error in tree spec `{spec}`: {reason}")]
    Syntax { spec: String, reason: String },
    #[error("invalid diameter-4 code: {0}")]
    Diam4Code(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("tree has diameter {diameter}, at least {required} is required")]
    TooSmall { diameter: usize, required: usize },
    #[error("tree has diameter {0}, expected exactly 4")]
    NotDiameterFour(usize),
    #[error("vertex {0} is a leaf")]
    Leaf(usize),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("bad vertex names: {0}")]
    Names(String),
}

/// A finite tree on vertices `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    names: Option<Vec<String>>,
}

impl Tree {
    /// Builds a tree from an edge list, checking that it is connected and acyclic.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Tree, TreeError> {
        if vertex_count == 0 {
            return Err(TreeError::NotATree("no vertices".into()));
        }
        if edges.len() + 1 != vertex_count {
            return Err(TreeError::NotATree(format!(
                "{} vertices need {} edges, got {}",
                vertex_count,
                vertex_count - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); vertex_count];
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= vertex_count {
                return Err(TreeError::VertexOutOfRange(u));
            }
            if v >= vertex_count {
                return Err(TreeError::VertexOutOfRange(v));
            }
            if u == v {
                return Err(TreeError::NotATree(format!("loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
            norm.push((u.min(v), u.max(v)));
        }
        for list in &mut adj {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(TreeError::NotATree("repeated edge".into()));
            }
        }
        norm.sort_unstable();
        let tree = Tree {
            adj,
            edges: norm,
            names: None,
        };
        // n - 1 edges plus connectivity implies acyclic.
        let dist = tree.bfs(0).0;
        if dist.iter().any(Option::is_none) {
            return Err(TreeError::NotATree("disconnected".into()));
        }
        Ok(tree)
    }

    pub fn single_vertex() -> Tree {
        Tree {
            adj: vec![Vec::new()],
            edges: Vec::new(),
            names: None,
        }
    }

    /// The path P_n with `n` edges and vertices `0..=n` in order.
    pub fn path(n: usize) -> Tree {
        let edges: Vec<_> = (0..n).map(|i| (i, i + 1)).collect();
        Tree::from_edges(n + 1, &edges).expect("paths are trees")
    }

    /// The tree T_{k,k+1}: a center `c` of degree 2 joined to a pivot `b` with
    /// `k` leaves `a1..ak` and a pivot `d` with `k+1` leaves `e1..e{k+1}`.
    ///
    /// Ids: `b = 0`, `c = 1`, `d = 2`, then the `a`s, then the `e`s.
    pub fn tkk(k: usize) -> Result<Tree, TreeError> {
        if k == 0 {
            return Err(TreeError::Syntax {
                spec: "tkk:0".into(),
                reason: "K must be at least 1".into(),
            });
        }
        let mut edges = vec![(0, 1), (1, 2)];
        let mut names: Vec<String> = vec!["b".into(), "c".into(), "d".into()];
        for i in 1..=k {
            edges.push((0, names.len()));
            names.push(format!("a{i}"));
        }
        for j in 1..=k + 1 {
            edges.push((2, names.len()));
            names.push(format!("e{j}"));
        }
        Tree::from_edges(names.len(), &edges)?.with_names(names)
    }

    /// Builds the diameter-4 tree described by `code`.
    ///
    /// Ids: center `0`, then each pivot followed by its leaves, then the hair.
    pub fn from_diam4_code(code: &Diam4Code) -> Result<Tree, TreeError> {
        code.validate()?;
        let mut edges = Vec::new();
        let mut next = 1;
        for &(d, count) in &code.pivots {
            for _ in 0..count {
                let pivot = next;
                edges.push((0, pivot));
                next += 1;
                for _ in 0..d {
                    edges.push((pivot, next));
                    next += 1;
                }
            }
        }
        for _ in 0..code.hair {
            edges.push((0, next));
            next += 1;
        }
        Tree::from_edges(next, &edges)
    }

    /// Attaches vertex names; they must be unique and one per vertex.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Tree, TreeError> {
        if names.len() != self.vertex_count() {
            return Err(TreeError::Names(format!(
                "{} names for {} vertices",
                names.len(),
                self.vertex_count()
            )));
        }
        let mut sorted = names.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(TreeError::Names("duplicate name".into()));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Unordered edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Index of the unordered edge `{u, v}` in [`Tree::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.adj[v].len() == 1
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// The vertex name, or its id rendered as text.
    pub fn name(&self, v: usize) -> String {
        match &self.names {
            Some(names) => names[v].clone(),
            None => v.to_string(),
        }
    }

    /// An `adj:` spec that parses back to this tree (names are dropped).
    pub fn to_spec(&self) -> String {
        let pairs: Vec<String> = self.edges.iter().map(|(u, v)| format!("{u} {v}")).collect();
        format!("adj:{}", pairs.join(" "))
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.names.as_ref()?.iter().position(|n| n == name)
    }

    fn bfs(&self, source: usize) -> (Vec<Option<usize>>, Vec<usize>) {
        let mut dist = vec![None; self.vertex_count()];
        let mut parent = vec![usize::MAX; self.vertex_count()];
        let mut queue = VecDeque::from([source]);
        dist[source] = Some(0);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        (dist, parent)
    }

    fn farthest(dist: &[Option<usize>]) -> usize {
        // Ties go to the smallest id.
        let mut best = 0;
        for (v, d) in dist.iter().enumerate() {
            if d.unwrap_or(0) > dist[best].unwrap_or(0) {
                best = v;
            }
        }
        best
    }

    /// A longest path, found by double BFS.
    pub fn diametral_path(&self) -> Vec<usize> {
        let a = Tree::farthest(&self.bfs(0).0);
        let (dist, parent) = self.bfs(a);
        let b = Tree::farthest(&dist);
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur];
            path.push(cur);
        }
        path
    }

    pub fn diameter(&self) -> usize {
        self.diametral_path().len() - 1
    }

    /// Deletes every leaf together with its edge (a single pass).
    pub fn reduce(&self) -> Result<Reduced, TreeError> {
        let diameter = self.diameter();
        if diameter < 2 {
            return Err(TreeError::TooSmall {
                diameter,
                required: 2,
            });
        }
        let mut to_new = vec![None; self.vertex_count()];
        let mut to_old = Vec::new();
        for (v, slot) in to_new.iter_mut().enumerate() {
            if self.degree(v) >= 2 {
                *slot = Some(to_old.len());
                to_old.push(v);
            }
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter_map(|&(u, v)| Some((to_new[u]?, to_new[v]?)))
            .collect();
        let mut tree = Tree::from_edges(to_old.len(), &edges)?;
        if let Some(names) = &self.names {
            tree = tree.with_names(to_old.iter().map(|&v| names[v].clone()).collect())?;
        }
        Ok(Reduced {
            tree,
            to_new,
            to_old,
        })
    }

    /// Degree in this tree minus one; the multiplier of the vertex equations.
    pub fn big_d(&self, v: usize) -> Result<usize, TreeError> {
        if v >= self.vertex_count() {
            return Err(TreeError::VertexOutOfRange(v));
        }
        match self.degree(v) {
            0 | 1 => Err(TreeError::Leaf(v)),
            d => Ok(d - 1),
        }
    }

    /// Classifies a diameter-4 tree by its pivot degrees and hair count.
    pub fn diam4_code(&self) -> Result<Diam4Code, TreeError> {
        let path = self.diametral_path();
        if path.len() != 5 {
            return Err(TreeError::NotDiameterFour(path.len() - 1));
        }
        let center = path[2];
        let mut hair = 0;
        let mut by_d: BTreeMap<usize, usize> = BTreeMap::new();
        for &w in self.neighbors(center) {
            if self.is_leaf(w) {
                hair += 1;
            } else {
                *by_d.entry(self.degree(w) - 1).or_default() += 1;
            }
        }
        let code = Diam4Code {
            pivots: by_d.into_iter().collect(),
            hair,
        };
        code.validate()?;
        Ok(code)
    }

    /// Canonical string of the unrooted tree: the smaller AHU encoding over
    /// its (one or two) centers. Equal strings iff isomorphic.
    pub fn canonical_form(&self) -> String {
        self.centers()
            .into_iter()
            .map(|c| self.rooted_canonical(c))
            .min()
            .unwrap()
    }

    pub fn is_isomorphic(&self, other: &Tree) -> bool {
        self.vertex_count() == other.vertex_count() && self.canonical_form() == other.canonical_form()
    }

    fn centers(&self) -> Vec<usize> {
        let n = self.vertex_count();
        if n <= 2 {
            return (0..n).collect();
        }
        let mut degree: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        let mut remaining = n;
        while remaining > 2 {
            remaining -= layer.len();
            let mut next = Vec::new();
            for &leaf in &layer {
                degree[leaf] = 0;
                for &w in &self.adj[leaf] {
                    if degree[w] > 0 {
                        degree[w] -= 1;
                        if degree[w] == 1 {
                            next.push(w);
                        }
                    }
                }
            }
            layer = next;
        }
        layer.sort_unstable();
        layer
    }

    fn rooted_canonical(&self, root: usize) -> String {
        let (dist, parent) = self.bfs(root);
        let mut order: Vec<usize> = (0..self.vertex_count()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(dist[v]));
        let mut codes: Vec<Vec<String>> = vec![Vec::new(); self.vertex_count()];
        let mut done = vec![String::new(); self.vertex_count()];
        for v in order {
            let mut kids = std::mem::take(&mut codes[v]);
            kids.sort();
            let code = format!("({})", kids.concat());
            if v != root {
                codes[parent[v]].push(code.clone());
            }
            done[v] = code;
        }
        std::mem::take(&mut done[root])
    }
}

/// The result of [`Tree::reduce`]: the subtree on non-leaf vertices and the
/// id maps between it and the original tree.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub tree: Tree,
    pub to_new: Vec<Option<usize>>,
    pub to_old: Vec<usize>,
}

/// `T((d_1,k_1),...,(d_l,k_l); q)`: `k_i` pivots of degree `d_i + 1` and `q`
/// hair vertices at the center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diam4Code {
    pub pivots: Vec<(usize, usize)>,
    pub hair: usize,
}

impl Diam4Code {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.pivots.is_empty() {
            return Err(TreeError::Diam4Code("no pivots".into()));
        }
        if self.pivots.iter().any(|&(d, k)| d == 0 || k == 0) {
            return Err(TreeError::Diam4Code("d and k must be positive".into()));
        }
        if self.pivots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(TreeError::Diam4Code("d must be strictly increasing".into()));
        }
        if self.pivots.len() == 1 && self.pivots[0].1 < 2 {
            return Err(TreeError::Diam4Code(
                "a single pivot class needs at least two pivots".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Diam4Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t4:")?;
        for (i, (d, k)) in self.pivots.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({d},{k})")?;
        }
        write!(f, ";{}", self.hair)
    }
}

fn syntax(spec: &str, reason: impl Into<String>) -> TreeError {
    TreeError::Syntax {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_usize(spec: &str, s: &str) -> Result<usize, TreeError> {
    s.trim()
        .parse()
        .map_err(|_| syntax(spec, format!("expected a nonnegative integer, got `{}`", s.trim())))
}

fn parse_diam4(spec: &str, body: &str) -> Result<Diam4Code, TreeError> {
    let (list, hair) = body
        .split_once(';')
        .ok_or_else(|| syntax(spec, "missing `;q`"))?;
    let hair = parse_usize(spec, hair)?;
    let mut pivots = Vec::new();
    let mut rest = list.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| syntax(spec, "expected `(`"))?;
        let (pair, tail) = open
            .split_once(')')
            .ok_or_else(|| syntax(spec, "expected `)`"))?;
        let (d, k) = pair
            .split_once(',')
            .ok_or_else(|| syntax(spec, "expected `d,k`"))?;
        pivots.push((parse_usize(spec, d)?, parse_usize(spec, k)?));
        rest = tail.trim_start();
        if let Some(t) = rest.strip_prefix(',') {
            rest = t.trim_start();
            if rest.is_empty() {
                return Err(syntax(spec, "trailing comma"));
            }
        } else if !rest.is_empty() {
            return Err(syntax(spec, "expected `,` between pairs"));
        }
    }
    Ok(Diam4Code { pivots, hair })
}

/// Parses whitespace-separated `u v` pairs; `#` starts a comment.
/// The vertex count is one more than the largest id.
pub fn parse_adjacency(text: &str) -> Result<Tree, TreeError> {
    let mut numbers = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            numbers.push(parse_usize(text, tok)?);
        }
    }
    if numbers.len() % 2 != 0 {
        return Err(syntax("adj", "odd number of vertex ids"));
    }
    if numbers.is_empty() {
        return Ok(Tree::single_vertex());
    }
    let edges: Vec<_> = numbers.chunks(2).map(|c| (c[0], c[1])).collect();
    let n = numbers.iter().max().unwrap() + 1;
    Tree::from_edges(n, &edges)
}

/// Parses the tree mini-language: `path:N`, `t4:(d,k),...;q`, `tkk:K`, `adj:u v ...`.
pub fn parse_tree_spec(text: &str) -> Result<Tree, TreeError> {
    let spec = text.trim();
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| syntax(spec, "expected `kind:body`"))?;
    match kind.trim() {
        "path" => Ok(Tree::path(parse_usize(spec, body)?)),
        "tkk" => {
            let k = parse_usize(spec, body)?;
            if k == 0 {
                return Err(syntax(spec, "K must be at least 1"));
            }
            Tree::tkk(k)
        }
        "t4" => Tree::from_diam4_code(&parse_diam4(spec, body)?),
        "adj" => parse_adjacency(body),
        other => Err(syntax(spec, format!("unknown tree kind `{other}`"))),
    }
}

impl FromStr for Tree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tree_spec(s)
    }
}

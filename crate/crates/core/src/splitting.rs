//! Labelled quotient graphs of the reduced centralizer splitting.
//!
//! A finite-index subgroup given as the preimage of a cover under the
//! retraction killing every generator outside the cover's alphabet acts on the
//! Bass–Serre tree; its quotient is read off the cover as components of
//! label subgraphs. The module also builds the model graph glued from
//! diamonds, finds labelled isomorphisms, and turns a matched pair of
//! quotients into an assignment for the linear system.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::covers::{build_cover_s, build_cover_z, z_letter, z_letter_prime, CoverError, CoverGraph};
use crate::product::{ProductError, ProductGraph, Side};
use crate::system::{build_full_system, CheckReport, SystemError, VarId};
use crate::trees::{Tree, TreeError};

#[derive(Debug, Error)]
pub enum SplittingError {
    #[error("k must be at least 1")]
    BadK,
    #[error("cover alphabet does not match the retraction letters: {0}")]
    Alphabet(String),
    #[error("inconsistent label: {0}")]
    Inconsistent(String),
    #[error("mapping is not type-consistent: {0}")]
    TypeMismatch(String),
    #[error("skeleton has no labels")]
    MissingLabels,
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkeletonVertex {
    /// `s` in the vertex group `Z x F_s`.
    pub rank: u64,
    #[serde(rename = "L")]
    pub big_l: Option<u64>,
    /// Tree vertex this vertex lies over.
    pub over: Option<usize>,
    /// Cover vertices of the component this vertex came from.
    #[serde(skip)]
    pub cover_vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkeletonEdge {
    pub a: usize,
    pub b: usize,
    pub l_a: Option<u64>,
    pub l_b: Option<u64>,
    /// Tree edge `(u, v)` with `a` over `u` and `b` over `v`.
    pub over: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SplittingSkeleton {
    pub vertices: Vec<SkeletonVertex>,
    pub edges: Vec<SkeletonEdge>,
}

#[derive(Serialize)]
struct VertexJson<'a> {
    id: usize,
    #[serde(flatten)]
    vertex: &'a SkeletonVertex,
}

#[derive(Serialize)]
struct SkeletonJson<'a> {
    vertices: Vec<VertexJson<'a>>,
    edges: &'a [SkeletonEdge],
}

impl SplittingSkeleton {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn add_vertex(&mut self, rank: u64) -> usize {
        self.vertices.push(SkeletonVertex {
            rank,
            big_l: None,
            over: None,
            cover_vertices: Vec::new(),
        });
        self.vertices.len() - 1
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        self.edges.push(SkeletonEdge {
            a,
            b,
            l_a: None,
            l_b: None,
            over: None,
        });
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|e| (e.a == v) as usize + (e.b == v) as usize).sum()
    }

    /// Neighbors with multiplicity, sorted.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .flat_map(|e| {
                let mut n = Vec::new();
                if e.a == v {
                    n.push(e.b);
                }
                if e.b == v {
                    n.push(e.a);
                }
                n
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Rank -> number of vertices with that rank.
    pub fn rank_multiset(&self) -> BTreeMap<u64, usize> {
        let mut out = BTreeMap::new();
        for v in &self.vertices {
            *out.entry(v.rank).or_default() += 1;
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let adj = adjacency(self);
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// Type invariants: ranks at least 2, `L >= l` at every labelled end,
    /// connected. Returns the violations.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (id, v) in self.vertices.iter().enumerate() {
            if v.rank < 2 {
                out.push(format!("vertex {id} has rank {} < 2", v.rank));
            }
        }
        for (id, e) in self.edges.iter().enumerate() {
            for (end, l) in [(e.a, e.l_a), (e.b, e.l_b)] {
                if let (Some(big), Some(l)) = (self.vertices[end].big_l, l) {
                    if big < l {
                        out.push(format!("edge {id}: L({end}) = {big} < l = {l}"));
                    }
                }
            }
        }
        if !self.is_connected() {
            out.push("skeleton is not connected".into());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let json = SkeletonJson {
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(id, vertex)| VertexJson { id, vertex })
                .collect(),
            edges: &self.edges,
        };
        serde_json::to_string(&json).expect("skeletons serialize")
    }
}

/// Per vertex: `(neighbor, multiplicity)` sorted by neighbor.
fn adjacency(s: &SplittingSkeleton) -> Vec<Vec<(usize, usize)>> {
    let mut adj: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); s.vertex_count()];
    for e in &s.edges {
        *adj[e.a].entry(e.b).or_default() += 1;
        if e.a != e.b {
            *adj[e.b].entry(e.a).or_default() += 1;
        }
    }
    adj.into_iter().map(|m| m.into_iter().collect()).collect()
}

/// The model graph glued from the pieces `D_k, D_1, D_{k-1}, D_2, ..., D_{k-1}, D_1, D_k`.
///
/// The `2k-1` centers form a chain; consecutive centers share the middle
/// vertices of one diamond (rank 2). Each end center carries `k` arms: a rank-2
/// vertex followed by a rank-`(k+2)` vertex. Centers have rank `k^2+k+1`.
pub fn build_x(k: usize) -> Result<SplittingSkeleton, SplittingError> {
    if k == 0 {
        return Err(SplittingError::BadK);
    }
    let k64 = k as u64;
    let mut x = SplittingSkeleton::default();
    let centers: Vec<usize> = (0..2 * k - 1).map(|_| x.add_vertex(k64 * k64 + k64 + 1)).collect();
    let add_arms = |x: &mut SplittingSkeleton, center: usize| {
        for _ in 0..k {
            let u = x.add_vertex(2);
            let u_end = x.add_vertex(k64 + 2);
            x.add_edge(center, u);
            x.add_edge(u, u_end);
        }
    };
    add_arms(&mut x, centers[0]);
    for (t, pair) in centers.windows(2).enumerate() {
        // Diamonds alternate D_1, D_{k-1}, D_2, D_{k-2}, ...
        let size = if t % 2 == 0 { t / 2 + 1 } else { k - 1 - t / 2 };
        for _ in 0..size {
            let u = x.add_vertex(2);
            x.add_edge(pair[0], u);
            x.add_edge(u, pair[1]);
        }
    }
    add_arms(&mut x, centers[2 * k - 2]);
    Ok(x)
}

/// The path `P_{4k+2}` with vertices named `A, D1, C1, B1, C1', D2, ..., Ck', D{k+1}, E`.
pub fn z_path(k: usize) -> Result<Tree, SplittingError> {
    if k == 0 {
        return Err(SplittingError::BadK);
    }
    let mut names = vec!["A".to_string()];
    for i in 1..=k {
        names.push(format!("D{i}"));
        names.push(z_letter(i));
        names.push(format!("B{i}"));
        names.push(z_letter_prime(i));
    }
    names.push(format!("D{}", k + 1));
    names.push("E".into());
    Ok(Tree::path(4 * k + 2).with_names(names)?)
}

/// Quotient of the reduced Bass–Serre tree by the preimage of `cover` under
/// the retraction onto the letters `retraction` (tree vertex ids, named like
/// the cover's alphabet).
///
/// Vertices over a non-leaf `v` are the components of the cover under the
/// letters among `v` and its neighbors; edges over a reduced edge `(u, v)` are
/// the components under the letters among `u, v`. The rank of a vertex over
/// `v` with component size `n` and `v`-cycle length `L` is
/// `1 + (n / L)(deg(v) - 1)`; `L` is 1 when `v` is killed.
pub fn quotient_graph(
    tree: &Tree,
    retraction: &[usize],
    cover: &CoverGraph,
) -> Result<SplittingSkeleton, SplittingError> {
    let mut letter_of: Vec<Option<usize>> = vec![None; tree.vertex_count()];
    for &v in retraction {
        let name = tree.name(v);
        let letter = cover
            .letter(&name)
            .map_err(|_| SplittingError::Alphabet(format!("`{name}` is not a cover letter")))?;
        letter_of[v] = Some(letter);
    }
    if retraction.len() != cover.alphabet().len() {
        return Err(SplittingError::Alphabet(format!(
            "{} retraction letters for an alphabet of {}",
            retraction.len(),
            cover.alphabet().len()
        )));
    }
    let letters_among = |vs: &mut dyn Iterator<Item = usize>| -> Vec<usize> {
        let mut ls: Vec<usize> = vs.filter_map(|v| letter_of[v]).collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    };

    let mut psi = SplittingSkeleton::default();
    let mut vertex_at: Vec<Vec<usize>> = vec![Vec::new(); tree.vertex_count()];
    for v in (0..tree.vertex_count()).filter(|&v| !tree.is_leaf(v)) {
        let letters = letters_among(&mut std::iter::once(v).chain(tree.neighbors(v).iter().copied()));
        vertex_at[v] = vec![usize::MAX; cover.vertex_count()];
        for comp in cover.components_by_index(&letters) {
            let big_l = match letter_of[v] {
                Some(x) => {
                    let len = cover.cycle_length(x, comp[0]);
                    if comp.iter().any(|&y| cover.cycle_length(x, y) != len) {
                        return Err(SplittingError::Inconsistent(format!(
                            "cycle length of `{}` varies over a component",
                            tree.name(v)
                        )));
                    }
                    len
                }
                None => 1,
            };
            if comp.len() % big_l != 0 {
                return Err(SplittingError::Inconsistent(format!(
                    "component of size {} over `{}` is not a union of {big_l}-cycles",
                    comp.len(),
                    tree.name(v)
                )));
            }
            let rank = 1 + (comp.len() / big_l) as u64 * (tree.degree(v) as u64 - 1);
            let id = psi.add_vertex(rank);
            psi.vertices[id].big_l = Some(big_l as u64);
            psi.vertices[id].over = Some(v);
            for &y in &comp {
                vertex_at[v][y] = id;
            }
            psi.vertices[id].cover_vertices = comp;
        }
    }

    let end_label = |u: usize, v: usize, x: usize| -> u64 {
        let Some(lu) = letter_of[u] else { return 1 };
        let target: Vec<usize> = match letter_of[v] {
            Some(lv) => cover.cycles(lv).into_iter().find(|c| c.contains(&x)).unwrap(),
            None => vec![x],
        };
        let mut y = cover.step(lu, x);
        let mut kappa = 1;
        while !target.contains(&y) {
            y = cover.step(lu, y);
            kappa += 1;
        }
        kappa
    };
    for &(u, v) in tree.edges() {
        if tree.is_leaf(u) || tree.is_leaf(v) {
            continue;
        }
        let letters = letters_among(&mut [u, v].into_iter());
        for comp in cover.components_by_index(&letters) {
            let x = comp[0];
            let (l_a, l_b) = (end_label(u, v, x), end_label(v, u, x));
            if comp.iter().any(|&y| end_label(u, v, y) != l_a || end_label(v, u, y) != l_b) {
                return Err(SplittingError::Inconsistent(format!(
                    "edge label over ({}, {}) varies over a component",
                    tree.name(u),
                    tree.name(v)
                )));
            }
            psi.edges.push(SkeletonEdge {
                a: vertex_at[u][x],
                b: vertex_at[v][x],
                l_a: Some(l_a),
                l_b: Some(l_b),
                over: Some((u, v)),
            });
        }
    }
    Ok(psi)
}

/// The quotient for the subgroup of the diameter-4 tree side: `tkk:k` with the cover `S`.
pub fn build_psi_h(k: usize) -> Result<(Tree, SplittingSkeleton), SplittingError> {
    let tree = Tree::tkk(k)?;
    let cover = build_cover_s(k)?;
    let letters = ["a1", "e1"].map(|n| tree.find(n).expect("tkk names"));
    let psi = quotient_graph(&tree, &letters, &cover)?;
    Ok((tree, psi))
}

/// The quotient for the subgroup of the path side: `P_{4k+2}` with the cover `Z`.
pub fn build_psi_k(k: usize) -> Result<(Tree, SplittingSkeleton), SplittingError> {
    let tree = z_path(k)?;
    let (cover, _) = build_cover_z(k)?;
    let letters: Vec<usize> = cover
        .alphabet()
        .iter()
        .map(|n| tree.find(n).expect("path names cover the alphabet"))
        .collect();
    let psi = quotient_graph(&tree, &letters, &cover)?;
    Ok((tree, psi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compare {
    Ranks,
    /// Ranks plus vertex labels `L` and edge labels `l`.
    Labels,
}

type EndLabels = Vec<(Option<u64>, Option<u64>)>;

struct IsoSide {
    adj: Vec<Vec<(usize, usize)>>,
    key: Vec<(u64, Option<u64>, usize, Vec<u64>)>,
    /// Ordered pair -> sorted list of (label at first, label at second).
    ends: BTreeMap<(usize, usize), EndLabels>,
}

impl IsoSide {
    fn new(s: &SplittingSkeleton, compare: Compare) -> IsoSide {
        let adj = adjacency(s);
        let key = (0..s.vertex_count())
            .map(|v| {
                let mut sig: Vec<u64> = s.neighbors(v).iter().map(|&w| s.vertices[w].rank).collect();
                sig.sort_unstable();
                let big_l = match compare {
                    Compare::Ranks => None,
                    Compare::Labels => s.vertices[v].big_l,
                };
                (s.vertices[v].rank, big_l, s.degree(v), sig)
            })
            .collect();
        let mut ends: BTreeMap<(usize, usize), EndLabels> = BTreeMap::new();
        if compare == Compare::Labels {
            for e in &s.edges {
                ends.entry((e.a, e.b)).or_default().push((e.l_a, e.l_b));
                if e.a != e.b {
                    ends.entry((e.b, e.a)).or_default().push((e.l_b, e.l_a));
                }
            }
            for list in ends.values_mut() {
                list.sort_unstable();
            }
        }
        IsoSide { adj, key, ends }
    }

    fn multiplicity(&self, v: usize, w: usize) -> usize {
        self.adj[v]
            .binary_search_by_key(&w, |&(n, _)| n)
            .map_or(0, |i| self.adj[v][i].1)
    }
}

/// Calls `visit` on each isomorphism `a -> b` (as a vertex map) respecting
/// the chosen labels, in a fixed order, until `visit` returns true. Returns
/// the number of isomorphisms visited.
pub fn for_each_iso<F>(a: &SplittingSkeleton, b: &SplittingSkeleton, compare: Compare, mut visit: F) -> usize
where
    F: FnMut(&[usize]) -> bool,
{
    let n = a.vertex_count();
    if n != b.vertex_count() || a.edges.len() != b.edges.len() {
        return 0;
    }
    let sa = IsoSide::new(a, compare);
    let sb = IsoSide::new(b, compare);
    let mut a_keys = sa.key.clone();
    let mut b_keys = sb.key.clone();
    a_keys.sort();
    b_keys.sort();
    if a_keys != b_keys {
        return 0;
    }
    // BFS order from the vertex with the rarest key, so every later vertex
    // has an already placed neighbor.
    let rarity = |v: usize| sa.key.iter().filter(|k| **k == sa.key[v]).count();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let start = (0..n).filter(|&v| !placed[v]).min_by_key(|&v| (rarity(v), v)).unwrap();
        placed[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in &sa.adj[v] {
                if !placed[w] {
                    placed[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_by(|&x, &y| sb.key[x].cmp(&sb.key[y]).then(x.cmp(&y)));

    struct State<'s> {
        sa: &'s IsoSide,
        sb: &'s IsoSide,
        order: Vec<usize>,
        candidates: Vec<usize>,
        map: Vec<usize>,
        used: Vec<bool>,
        visited: usize,
    }
    fn extend<F: FnMut(&[usize]) -> bool>(st: &mut State<'_>, depth: usize, visit: &mut F) -> bool {
        if depth == st.order.len() {
            st.visited += 1;
            return visit(&st.map);
        }
        let x = st.order[depth];
        for ci in 0..st.candidates.len() {
            let y = st.candidates[ci];
            if st.used[y] || st.sa.key[x] != st.sb.key[y] {
                continue;
            }
            let fits = st.order[..depth].iter().all(|&x2| {
                let y2 = st.map[x2];
                st.sa.multiplicity(x, x2) == st.sb.multiplicity(y, y2)
                    && st.sa.ends.get(&(x, x2)) == st.sb.ends.get(&(y, y2))
            }) && st.sa.multiplicity(x, x) == st.sb.multiplicity(y, y);
            if !fits {
                continue;
            }
            st.map[x] = y;
            st.used[y] = true;
            if extend(st, depth + 1, visit) {
                return true;
            }
            st.used[y] = false;
            st.map[x] = usize::MAX;
        }
        false
    }
    let mut st = State {
        sa: &sa,
        sb: &sb,
        order,
        candidates,
        map: vec![usize::MAX; n],
        used: vec![false; n],
        visited: 0,
    };
    extend(&mut st, 0, &mut visit);
    st.visited
}

/// First isomorphism found by [`for_each_iso`], if any.
pub fn labelled_iso(a: &SplittingSkeleton, b: &SplittingSkeleton, compare: Compare) -> Option<Vec<usize>> {
    let mut found = None;
    for_each_iso(a, b, compare, |m| {
        found = Some(m.to_vec());
        true
    });
    found
}

fn label(x: Option<u64>) -> Result<u64, SplittingError> {
    x.ok_or(SplittingError::MissingLabels)
}

/// Pairs each edge of `a` with an edge of `b` under the vertex map `phi`:
/// parallel edges are matched in id order.
fn edge_map(a: &SplittingSkeleton, b: &SplittingSkeleton, phi: &[usize]) -> Result<Vec<(usize, bool)>, SplittingError> {
    let mut pool: BTreeMap<(usize, usize), VecDeque<(usize, bool)>> = BTreeMap::new();
    for (id, e) in b.edges.iter().enumerate() {
        pool.entry((e.a, e.b)).or_default().push_back((id, false));
        if e.a != e.b {
            pool.entry((e.b, e.a)).or_default().push_back((id, true));
        }
    }
    let mut taken = vec![false; b.edges.len()];
    a.edges
        .iter()
        .map(|e| {
            let list = pool
                .get_mut(&(phi[e.a], phi[e.b]))
                .ok_or_else(|| SplittingError::TypeMismatch("an edge has no image".into()))?;
            while let Some((id, flipped)) = list.pop_front() {
                if !taken[id] {
                    taken[id] = true;
                    return Ok((id, flipped));
                }
            }
            Err(SplittingError::TypeMismatch("an edge has no image".into()))
        })
        .collect()
}

/// The four edge labels of every oriented product edge, summed over the
/// quotient edges of that type. `p` must be the product of the reductions of
/// the trees `psi_h` and `psi_k` lie over (left and right), and `phi` maps
/// vertices of `psi_h` to vertices of `psi_k`. Edges of `p` outside the image
/// get zeros.
pub fn m_labels(
    psi_h: &SplittingSkeleton,
    psi_k: &SplittingSkeleton,
    phi: &[usize],
    p: &ProductGraph,
) -> Result<BTreeMap<VarId, BigInt>, SplittingError> {
    let reduced_id = |side: Side, over: Option<usize>| -> Result<usize, SplittingError> {
        let over = over.ok_or_else(|| SplittingError::TypeMismatch("vertex without a type".into()))?;
        (0..p.factor(side).vertex_count())
            .find(|&v| p.origin(side, v) == over)
            .ok_or_else(|| SplittingError::TypeMismatch(format!("vertex {over} is not in the reduced tree")))
    };
    let type_of = |x: usize| -> Result<usize, SplittingError> {
        let i = reduced_id(Side::Left, psi_h.vertices[x].over)?;
        let j = reduced_id(Side::Right, psi_k.vertices[phi[x]].over)?;
        Ok(p.vertex_id(i, j))
    };
    let mut sums = vec![[0u64; 4]; p.edges().len()];
    for (e, &(image, flipped)) in psi_h.edges.iter().zip(&edge_map(psi_h, psi_k, phi)?) {
        let f = &psi_k.edges[image];
        let (fl_a, fl_b) = if flipped { (f.l_b, f.l_a) } else { (f.l_a, f.l_b) };
        for (u, v, l_v, l2_v) in [(e.a, e.b, e.l_b, fl_b), (e.b, e.a, e.l_a, fl_a)] {
            let source = type_of(u)?;
            let target = type_of(v)?;
            let id = p.find_edge(source, target).ok_or_else(|| {
                SplittingError::TypeMismatch(format!("no product edge {source} -> {target}"))
            })?;
            let big = label(psi_h.vertices[u].big_l)?;
            let big2 = label(psi_k.vertices[phi[u]].big_l)?;
            let (l, l2) = (label(l_v)?, label(l2_v)?);
            let add = [big * l, big * l2, big2 * l, big2 * l2];
            for (s, a) in sums[id].iter_mut().zip(add) {
                *s += a;
            }
        }
    }
    let mut out = BTreeMap::new();
    for (edge, vals) in sums.iter().enumerate() {
        for (f, &(k, l)) in crate::system::FAMILIES.iter().enumerate() {
            out.insert(VarId { edge, k, l }, BigInt::from(vals[f]));
        }
    }
    Ok(out)
}

/// The common ratio `L/l` at both ends of every edge, on both sides.
/// Returns one `q` per edge of `psi_h`, or the first violation.
pub fn proportions(
    psi_h: &SplittingSkeleton,
    psi_k: &SplittingSkeleton,
    phi: &[usize],
) -> Result<Vec<u64>, String> {
    let images = edge_map(psi_h, psi_k, phi).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (id, (e, &(image, flipped))) in psi_h.edges.iter().zip(&images).enumerate() {
        let f = &psi_k.edges[image];
        let (fl_a, fl_b) = if flipped { (f.l_b, f.l_a) } else { (f.l_a, f.l_b) };
        let pairs = [
            (psi_h.vertices[e.a].big_l, e.l_a),
            (psi_k.vertices[phi[e.a]].big_l, fl_a),
            (psi_h.vertices[e.b].big_l, e.l_b),
            (psi_k.vertices[phi[e.b]].big_l, fl_b),
        ];
        let mut q = None;
        for (big, l) in pairs {
            let (Some(big), Some(l)) = (big, l) else {
                return Err(format!("edge {id}: labels missing"));
            };
            if l == 0 || big % l != 0 {
                return Err(format!("edge {id}: L = {big} is not a multiple of l = {l}"));
            }
            if *q.get_or_insert(big / l) != big / l {
                return Err(format!("edge {id}: ratios disagree"));
            }
        }
        out.push(q.unwrap());
    }
    Ok(out)
}

/// Outcome of matching the two quotients against each other and the system.
#[derive(Clone, Debug, Serialize)]
pub struct CrossValidation {
    pub k: usize,
    /// Isomorphisms tried before one satisfied the system.
    pub isomorphisms_tried: usize,
    pub mapping: Option<Vec<usize>>,
    pub component: Option<u8>,
    pub report: Option<CheckReport>,
    pub ratios: Option<Vec<u64>>,
}

impl CrossValidation {
    pub fn passed(&self) -> bool {
        self.report.as_ref().is_some_and(CheckReport::is_ok) && self.ratios.is_some()
    }
}

/// Cap on isomorphisms tried by [`cross_validate`].
pub const MAX_ISOMORPHISMS: usize = 100_000;

/// Builds both quotients for `k`, walks their label-respecting isomorphisms
/// and stops at the first whose labels satisfy every constraint of the
/// component system of `(tkk:k, P_{4k+2})` and the ratio check.
pub fn cross_validate(k: usize) -> Result<CrossValidation, SplittingError> {
    let (tree_h, psi_h) = build_psi_h(k)?;
    let (tree_k, psi_k) = build_psi_k(k)?;
    let full = build_full_system(&tree_h, &tree_k)?;
    let mut out = CrossValidation {
        k,
        isomorphisms_tried: 0,
        mapping: None,
        component: None,
        report: None,
        ratios: None,
    };
    let mut last_err = None;
    let tried = for_each_iso(&psi_h, &psi_k, Compare::Ranks, |phi| {
        if out.isomorphisms_tried >= MAX_ISOMORPHISMS {
            return true;
        }
        out.isomorphisms_tried += 1;
        let labels = match m_labels(&psi_h, &psi_k, phi, &full.product) {
            Ok(l) => l,
            Err(e) => {
                last_err = Some(e);
                return false;
            }
        };
        let Some(c) = full.systems.iter().position(|s| {
            s.variables
                .iter()
                .any(|id| labels.get(id).is_some_and(|v| *v != BigInt::from(0)))
        }) else {
            return false;
        };
        let report = full.systems[c].check_assignment_map(&labels).expect("labels cover every variable");
        let ratios = proportions(&psi_h, &psi_k, phi).ok();
        let done = report.is_ok() && ratios.is_some();
        if done || out.report.is_none() {
            out.mapping = Some(phi.to_vec());
            out.component = Some(full.systems[c].component);
            out.report = Some(report);
            out.ratios = ratios;
        }
        done
    });
    if tried == 0 {
        if let Some(e) = last_err {
            return Err(e);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn census(s: &SplittingSkeleton) -> Vec<(u64, usize)> {
        s.rank_multiset().into_iter().collect()
    }

    #[test]
    fn x_for_k3() {
        let x = build_x(3).unwrap();
        assert_eq!(x.vertex_count(), 23);
        assert_eq!(census(&x), vec![(2, 12), (5, 6), (13, 5)]);
        assert!(x.validate().is_empty());
    }

    #[test]
    fn x_closed_form_counts() {
        for k in 1..=6u64 {
            let x = build_x(k as usize).unwrap();
            assert_eq!(x.vertex_count() as u64, k * k + 5 * k - 1);
            let m = x.rank_multiset();
            assert_eq!(m[&(k * k + k + 1)] as u64, 2 * k - 1 + if k == 1 { 2 } else { 0 });
            assert_eq!(m[&2] as u64, k * k + k);
        }
    }

    #[test]
    fn psi_h_for_k3_matches_centralizer_ranks() {
        let (tree, psi) = build_psi_h(3).unwrap();
        let over = |name: &str| {
            let v = tree.find(name).unwrap();
            let mut ranks: Vec<u64> = psi.vertices.iter().filter(|x| x.over == Some(v)).map(|x| x.rank).collect();
            ranks.sort_unstable();
            ranks
        };
        assert_eq!(over("b"), vec![13; 3]);
        assert_eq!(over("c"), vec![2; 12]);
        assert_eq!(over("d"), vec![5, 5, 5, 5, 5, 5, 13, 13]);
        assert!(psi.vertices.iter().all(|v| v.big_l == Some(1)));
        assert!(psi.edges.iter().all(|e| e.l_a == Some(1) && e.l_b == Some(1)));
        assert!(psi.validate().is_empty());
    }

    #[test]
    fn psi_k_for_k3_matches_centralizer_ranks() {
        let (tree, psi) = build_psi_k(3).unwrap();
        assert_eq!(psi.vertex_count(), 23);
        for v in &psi.vertices {
            let name = tree.name(v.over.unwrap());
            let expected = match name.as_str() {
                "D1" | "D4" => 5,
                n if n.starts_with('C') => 2,
                _ => 13,
            };
            assert_eq!(v.rank, expected, "over {name}");
        }
        assert!(psi.validate().is_empty());
    }

    #[test]
    fn skeletons_isomorphic_on_ranks() {
        for k in 2..=3 {
            let x = build_x(k).unwrap();
            let (_, h) = build_psi_h(k).unwrap();
            let (_, kk) = build_psi_k(k).unwrap();
            assert!(labelled_iso(&x, &h, Compare::Ranks).is_some());
            assert!(labelled_iso(&h, &kk, Compare::Ranks).is_some());
        }
    }

    #[test]
    fn path_and_star_are_not_isomorphic() {
        let mut path = SplittingSkeleton::default();
        let mut star = SplittingSkeleton::default();
        for _ in 0..4 {
            path.add_vertex(2);
            star.add_vertex(2);
        }
        for i in 0..3 {
            path.add_edge(i, i + 1);
            star.add_edge(0, i + 1);
        }
        assert_eq!(labelled_iso(&path, &star, Compare::Ranks), None);
        assert!(labelled_iso(&path, &path, Compare::Labels).is_some());
    }

    #[test]
    fn cross_validation_k2() {
        let cv = cross_validate(2).unwrap();
        assert!(cv.passed(), "{cv:?}");
        assert!(cv.ratios.unwrap().iter().all(|&q| q == 1));
    }

    #[test]
    fn all_ones_h_side_counts_edges() {
        let (tree_h, psi_h) = build_psi_h(2).unwrap();
        let (tree_k, psi_k) = build_psi_k(2).unwrap();
        let p = ProductGraph::of_reductions(&tree_h, &tree_k).unwrap();
        let phi = labelled_iso(&psi_h, &psi_k, Compare::Ranks).unwrap();
        let labels = m_labels(&psi_h, &psi_k, &phi, &p).unwrap();
        let total: BigInt = labels.iter().filter(|(id, _)| id.k == 1 && id.l == 1).map(|(_, v)| v.clone()).sum();
        // Every quotient edge contributes once per orientation.
        assert_eq!(total, BigInt::from(2 * psi_h.edges.len()));
    }

    #[test]
    fn json_shape() {
        let x = build_x(1).unwrap();
        let json = x.to_json();
        assert!(json.starts_with("{\"vertices\":[{\"id\":0,\"rank\":3,\"L\":null,\"over\":null}"));
    }
}

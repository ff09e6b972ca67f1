//! Direct (tensor) product of two trees with oriented edges.
//!
//! `(i1, j1) ~ (i2, j2)` iff `i1 ~ i2` on the left and `j1 ~ j2` on the right.
//! A product of two trees with at least one edge each splits into exactly two
//! connected components.

use std::fmt::Write as _;

use thiserror::Error;

use crate::trees::{Tree, TreeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProductError {
    #[error("degenerate product: a factor has no edges")]
    Degenerate,
    #[error("component must be 1 or 2, got {0}")]
    BadComponent(u8),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Which factor of the product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrientedEdge {
    pub source: usize,
    pub target: usize,
    pub inverse: usize,
    /// Index into `left.edges()` of the projected left edge.
    pub left_edge: usize,
    /// Index into `right.edges()` of the projected right edge.
    pub right_edge: usize,
}

#[derive(Clone, Debug)]
pub struct ProductGraph {
    left: Tree,
    right: Tree,
    edges: Vec<OrientedEdge>,
    /// `out_start[v]..out_start[v + 1]` are the edges leaving `v`.
    out_start: Vec<usize>,
    /// 1 or 2 per vertex; `None` when a factor has no edges.
    vertex_component: Option<Vec<u8>>,
    /// Vertex ids of the unreduced trees, when built by [`ProductGraph::of_reductions`].
    left_origin: Option<Vec<usize>>,
    right_origin: Option<Vec<usize>>,
}

impl ProductGraph {
    pub fn direct_product(left: &Tree, right: &Tree) -> ProductGraph {
        let nl = left.vertex_count();
        let nr = right.vertex_count();
        let n = nl * nr;
        let mut edges = Vec::new();
        let mut out_start = Vec::with_capacity(n + 1);
        for i in 0..nl {
            for j in 0..nr {
                out_start.push(edges.len());
                let source = i * nr + j;
                for &i2 in left.neighbors(i) {
                    let left_edge = left.edge_index(i, i2).unwrap();
                    for &j2 in right.neighbors(j) {
                        edges.push(OrientedEdge {
                            source,
                            target: i2 * nr + j2,
                            inverse: usize::MAX,
                            left_edge,
                            right_edge: right.edge_index(j, j2).unwrap(),
                        });
                    }
                }
            }
        }
        out_start.push(edges.len());
        for id in 0..edges.len() {
            let OrientedEdge { source, target, .. } = edges[id];
            let range = out_start[target]..out_start[target + 1];
            let inverse = range
                .into_iter()
                .find(|&f| edges[f].target == source)
                .expect("product adjacency is symmetric");
            edges[id].inverse = inverse;
        }

        let vertex_component = if left.edges().is_empty() || right.edges().is_empty() {
            None
        } else {
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for e in &edges {
                let a = find(&mut parent, e.source);
                let b = find(&mut parent, e.target);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
            // Every vertex has an edge, so vertex 0 = (0, 0) tags component 1.
            let root0 = find(&mut parent, 0);
            Some(
                (0..n)
                    .map(|v| if find(&mut parent, v) == root0 { 1 } else { 2 })
                    .collect(),
            )
        };

        ProductGraph {
            left: left.clone(),
            right: right.clone(),
            edges,
            out_start,
            vertex_component,
            left_origin: None,
            right_origin: None,
        }
    }

    /// Product of the leaf-reductions of two trees, remembering the original ids.
    pub fn of_reductions(g1: &Tree, g2: &Tree) -> Result<ProductGraph, ProductError> {
        let r1 = g1.reduce()?;
        let r2 = g2.reduce()?;
        let mut p = ProductGraph::direct_product(&r1.tree, &r2.tree);
        p.left_origin = Some(r1.to_old);
        p.right_origin = Some(r2.to_old);
        Ok(p)
    }

    pub fn left(&self) -> &Tree {
        &self.left
    }

    pub fn right(&self) -> &Tree {
        &self.right
    }

    pub fn factor(&self, side: Side) -> &Tree {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// Maps a factor vertex back to the unreduced tree, if known.
    pub fn origin(&self, side: Side, v: usize) -> usize {
        let map = match side {
            Side::Left => &self.left_origin,
            Side::Right => &self.right_origin,
        };
        map.as_ref().map_or(v, |m| m[v])
    }

    pub fn vertex_count(&self) -> usize {
        self.left.vertex_count() * self.right.vertex_count()
    }

    pub fn vertex_id(&self, i: usize, j: usize) -> usize {
        i * self.right.vertex_count() + j
    }

    /// `(left vertex, right vertex)` of a product vertex.
    pub fn vertex(&self, v: usize) -> (usize, usize) {
        (v / self.right.vertex_count(), v % self.right.vertex_count())
    }

    pub fn project(&self, side: Side, v: usize) -> usize {
        let (i, j) = self.vertex(v);
        match side {
            Side::Left => i,
            Side::Right => j,
        }
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &OrientedEdge {
        &self.edges[id]
    }

    /// Projected factor edge index of a product edge.
    pub fn projected_edge(&self, side: Side, id: usize) -> usize {
        match side {
            Side::Left => self.edges[id].left_edge,
            Side::Right => self.edges[id].right_edge,
        }
    }

    /// Ids of the oriented edges leaving `v`, ordered by left then right neighbor.
    pub fn out_edges(&self, v: usize) -> std::ops::Range<usize> {
        self.out_start[v]..self.out_start[v + 1]
    }

    pub fn find_edge(&self, source: usize, target: usize) -> Option<usize> {
        self.out_edges(source).find(|&e| self.edges[e].target == target)
    }

    /// Number of unoriented edges.
    pub fn unoriented_edge_count(&self) -> usize {
        self.edges.len() / 2
    }

    /// Component tag (1 or 2) of every vertex.
    pub fn components(&self) -> Result<&[u8], ProductError> {
        self.vertex_component.as_deref().ok_or(ProductError::Degenerate)
    }

    pub fn component_of_vertex(&self, v: usize) -> Result<u8, ProductError> {
        Ok(self.components()?[v])
    }

    pub fn component_vertices(&self, component: u8) -> Result<Vec<usize>, ProductError> {
        check_component(component)?;
        let tags = self.components()?;
        Ok((0..self.vertex_count()).filter(|&v| tags[v] == component).collect())
    }

    /// Oriented edge ids of a component, ascending.
    pub fn component_edges(&self, component: u8) -> Result<Vec<usize>, ProductError> {
        check_component(component)?;
        let tags = self.components()?;
        Ok((0..self.edges.len())
            .filter(|&e| tags[self.edges[e].source] == component)
            .collect())
    }

    /// Edges leaving `v` whose projection on `side` ends at the factor vertex `toward`.
    pub fn local_preimage(&self, v: usize, side: Side, toward: usize) -> Vec<usize> {
        self.out_edges(v)
            .filter(|&e| self.project(side, self.edges[e].target) == toward)
            .collect()
    }

    pub fn preimage_index(&self) -> EdgePreimageIndex {
        let mut left = vec![Vec::new(); self.left.edges().len()];
        let mut right = vec![Vec::new(); self.right.edges().len()];
        for (id, e) in self.edges.iter().enumerate() {
            left[e.left_edge].push(id);
            right[e.right_edge].push(id);
        }
        let local = (0..self.vertex_count())
            .map(|v| {
                let (i, j) = self.vertex(v);
                let l = self
                    .left
                    .neighbors(i)
                    .iter()
                    .map(|&u| (u, self.local_preimage(v, Side::Left, u)))
                    .collect();
                let r = self
                    .right
                    .neighbors(j)
                    .iter()
                    .map(|&u| (u, self.local_preimage(v, Side::Right, u)))
                    .collect();
                [l, r]
            })
            .collect();
        EdgePreimageIndex { left, right, local }
    }

    pub fn vertex_label(&self, v: usize) -> String {
        let (i, j) = self.vertex(v);
        format!("({},{})", self.left.name(i), self.right.name(j))
    }

    /// Graphviz rendering; component 1 black, component 2 red.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph product {\n");
        for v in 0..self.vertex_count() {
            writeln!(out, "  v{v} [label=\"{}\"];", self.vertex_label(v)).unwrap();
        }
        for e in &self.edges {
            if e.source < e.target {
                let colour = match self.vertex_component.as_ref().map(|c| c[e.source]) {
                    Some(2) => "red",
                    _ => "black",
                };
                writeln!(out, "  v{} -- v{} [color={colour}];", e.source, e.target).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

fn check_component(component: u8) -> Result<(), ProductError> {
    match component {
        1 | 2 => Ok(()),
        c => Err(ProductError::BadComponent(c)),
    }
}

/// Projection preimages of factor edges.
#[derive(Clone, Debug)]
pub struct EdgePreimageIndex {
    /// Oriented product edges over each left edge (both orientations).
    pub left: Vec<Vec<usize>>,
    pub right: Vec<Vec<usize>>,
    /// `local[v][side]`: for each factor neighbor `u` of `π_side(v)`, the edges
    /// leaving `v` over the factor edge toward `u`.
    pub local: Vec<[LocalPreimages; 2]>,
}

/// Per factor neighbor, the product edges leaving a vertex toward it.
pub type LocalPreimages = Vec<(usize, Vec<usize>)>;

impl EdgePreimageIndex {
    pub fn over(&self, side: Side, factor_edge: usize) -> &[usize] {
        match side {
            Side::Left => &self.left[factor_edge],
            Side::Right => &self.right[factor_edge],
        }
    }

    pub fn local(&self, v: usize, side: Side) -> &[(usize, Vec<usize>)] {
        &self.local[v][side as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_product(a: usize, b: usize) -> ProductGraph {
        ProductGraph::direct_product(&Tree::path(a), &Tree::path(b))
    }

    #[test]
    fn p1_times_p1() {
        let p = path_product(1, 1);
        assert_eq!(p.vertex_count(), 4);
        assert_eq!(p.unoriented_edge_count(), 2);
        assert_eq!(p.component_vertices(1).unwrap(), vec![0, 3]);
        assert_eq!(p.component_vertices(2).unwrap(), vec![1, 2]);
        assert_eq!(p.component_edges(1).unwrap().len(), 2);
        let idx = p.preimage_index();
        assert_eq!(idx.over(Side::Left, 0).len(), 4);
    }

    #[test]
    fn p6_times_p1_components_are_paths() {
        let p = ProductGraph::of_reductions(&Tree::path(8), &Tree::path(3)).unwrap();
        assert_eq!(p.vertex_count(), 14);
        let c1 = p.component_vertices(1).unwrap();
        let c2 = p.component_vertices(2).unwrap();
        assert_eq!((c1.len(), c2.len()), (7, 7));
        // A connected component with 7 vertices, 6 edges and max degree 2 is P_6.
        let c1_edges = p.component_edges(1).unwrap();
        assert_eq!(c1_edges.len(), 12);
        assert!(c1.iter().all(|&v| p.out_edges(v).len() <= 2));
        let idx = p.preimage_index();
        assert_eq!(idx.over(Side::Right, 0).len(), p.edges().len());
    }

    #[test]
    fn path_components_are_parity_classes() {
        let p = path_product(4, 5);
        let tags = p.components().unwrap();
        for (v, &tag) in tags.iter().enumerate() {
            let (i, j) = p.vertex(v);
            assert_eq!(tag, if (i + j) % 2 == 0 { 1 } else { 2 });
        }
    }

    #[test]
    fn center_vertex_adjacency_against_tkk() {
        let k = 2;
        let p = ProductGraph::of_reductions(&Tree::path(7), &Tree::tkk(k).unwrap()).unwrap();
        let c = p.right().find("c").unwrap();
        let b = p.right().find("b").unwrap();
        let d = p.right().find("d").unwrap();
        for i in 1..4 {
            let v = p.vertex_id(i, c);
            for i2 in [i - 1, i + 1] {
                for j2 in [b, d] {
                    assert!(p.find_edge(v, p.vertex_id(i2, j2)).is_some());
                }
            }
        }
    }

    #[test]
    fn local_preimage_single_edge() {
        let p = path_product(4, 2);
        // a_2 = 1, a_3 = 2, b_1 = 0 (an end of P_2, one neighbor b_2 = 1).
        let v = p.vertex_id(1, 0);
        let toward = p.local_preimage(v, Side::Left, 2);
        assert_eq!(toward.len(), 1);
        assert_eq!(p.edge(toward[0]).target, p.vertex_id(2, 1));
        // The middle of P_2 has two neighbors.
        let v = p.vertex_id(1, 1);
        assert_eq!(p.local_preimage(v, Side::Left, 2).len(), 2);
    }

    #[test]
    fn degenerate_product() {
        let p = ProductGraph::direct_product(&Tree::single_vertex(), &Tree::path(3));
        assert_eq!(p.components().unwrap_err(), ProductError::Degenerate);
        assert!(p.edges().is_empty());
    }

    #[test]
    fn dot_export_mentions_colours() {
        let dot = path_product(2, 1).to_dot();
        assert!(dot.contains("red") && dot.contains("black"));
    }
}

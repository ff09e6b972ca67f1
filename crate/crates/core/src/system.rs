//! The homogeneous linear system over edge labels of one product component.
//!
//! Every oriented product edge `e` carries four variables `M_kl(e)`. The
//! system holds the edge equations linking `e` with its inverse, the two
//! vertex chains at every vertex, nonnegativity, strict surjectivity sums and
//! local-surjectivity implications.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::product::{ProductError, ProductGraph, Side};
use crate::trees::{Tree, TreeError};

/// Label families in variable order: `11, 12, 21, 22`.
pub const FAMILIES: [(u8, u8); 4] = [(1, 1), (1, 2), (2, 1), (2, 2)];

pub fn family_index(k: u8, l: u8) -> usize {
    ((k - 1) * 2 + (l - 1)) as usize
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("tree has diameter {diameter}; at least 3 is required")]
    TooSmall { diameter: usize },
    #[error("component {0} has no edges")]
    EmptyComponent(u8),
    #[error("assignment has {got} values, system has {expected} variables")]
    PartialAssignment { expected: usize, got: usize },
    #[error("assignment misses variable {0:?}")]
    MissingVariable(VarId),
    #[error("malformed system JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarId {
    pub edge: usize,
    pub k: u8,
    pub l: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub left_spec: String,
    pub right_spec: String,
}

/// `trigger > 0` implies `Σ consequent > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Implication {
    pub trigger: usize,
    pub consequent: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSystem {
    pub pair: PairSpec,
    pub component: u8,
    pub variables: Vec<VarId>,
    /// Sparse rows `Σ coeff · x[var] = 0`.
    pub equalities: Vec<Vec<(usize, i64)>>,
    pub strict_sums: Vec<Vec<usize>>,
    pub implications: Vec<Implication>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Equality { row: usize, value: String },
    Negative { var: usize },
    StrictSum { index: usize },
    Implication { index: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Both component systems of a pair together with their product graph.
#[derive(Clone, Debug)]
pub struct FullSystem {
    pub product: ProductGraph,
    pub systems: [LinearSystem; 2],
}

/// Per-vertex chain values; `consistent` is false when a chain's sums disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RLabels {
    pub vertex: usize,
    pub r1: BigInt,
    pub r2: BigInt,
    pub consistent: bool,
}

type Sum = Vec<(usize, i64)>;

struct VertexChains {
    vertex: usize,
    /// Sums of the first and second vertex chain, in chain order.
    chains: [Vec<Sum>; 2],
}

/// Maps product edges of one component to variable blocks.
struct VarIndex {
    position: Vec<usize>,
}

impl VarIndex {
    fn new(p: &ProductGraph, edges: &[usize]) -> VarIndex {
        let mut position = vec![usize::MAX; p.edges().len()];
        for (pos, &e) in edges.iter().enumerate() {
            position[e] = pos;
        }
        VarIndex { position }
    }

    fn var(&self, edge: usize, family: usize) -> usize {
        debug_assert!(self.position[edge] != usize::MAX);
        4 * self.position[edge] + family
    }
}

fn vertex_chains(
    p: &ProductGraph,
    component: u8,
    g1: &Tree,
    g2: &Tree,
    index: &VarIndex,
) -> Result<Vec<VertexChains>, SystemError> {
    let mut out = Vec::new();
    for v in p.component_vertices(component)? {
        let (i, j) = p.vertex(v);
        let d1 = g1.big_d(p.origin(Side::Left, i))? as i64;
        let d2 = g2.big_d(p.origin(Side::Right, j))? as i64;
        let left_dirs: Vec<Vec<usize>> = p
            .left()
            .neighbors(i)
            .iter()
            .map(|&u| p.local_preimage(v, Side::Left, u))
            .collect();
        let right_dirs: Vec<Vec<usize>> = p
            .right()
            .neighbors(j)
            .iter()
            .map(|&u| p.local_preimage(v, Side::Right, u))
            .collect();
        let chain = |left_family: usize, right_family: usize| -> Vec<Sum> {
            let mut sums: Vec<Sum> = left_dirs
                .iter()
                .map(|dir| dir.iter().map(|&e| (index.var(e, left_family), d1)).collect())
                .collect();
            sums.extend(
                right_dirs
                    .iter()
                    .map(|dir| dir.iter().map(|&e| (index.var(e, right_family), d2)).collect()),
            );
            sums
        };
        out.push(VertexChains {
            vertex: v,
            chains: [chain(0, 1), chain(2, 3)],
        });
    }
    Ok(out)
}

fn difference(a: &Sum, b: &Sum) -> Vec<(usize, i64)> {
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for &(v, c) in a {
        *acc.entry(v).or_default() += c;
    }
    for &(v, c) in b {
        *acc.entry(v).or_default() -= c;
    }
    acc.into_iter().filter(|&(_, c)| c != 0).collect()
}

/// Builds the system of one component. `p` must be the product of the
/// reductions of `g1` and `g2` (see [`ProductGraph::of_reductions`]).
pub fn build_component_system(
    p: &ProductGraph,
    component: u8,
    g1: &Tree,
    g2: &Tree,
) -> Result<LinearSystem, SystemError> {
    let edges = p.component_edges(component)?;
    if edges.is_empty() {
        return Err(SystemError::EmptyComponent(component));
    }
    let index = VarIndex::new(p, &edges);
    let variables: Vec<VarId> = edges
        .iter()
        .flat_map(|&edge| FAMILIES.iter().map(move |&(k, l)| VarId { edge, k, l }))
        .collect();

    let mut equalities = Vec::new();
    for &e in &edges {
        let inv = p.edge(e).inverse;
        if e < inv {
            // 11 <-> 11, 12 <-> 21, 21 <-> 12, 22 <-> 22.
            for (f, g) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                equalities.push(vec![(index.var(e, f), 1), (index.var(inv, g), -1)]);
            }
        }
    }
    for vc in vertex_chains(p, component, g1, g2, &index)? {
        for chain in &vc.chains {
            for pair in chain.windows(2) {
                equalities.push(difference(&pair[0], &pair[1]));
            }
        }
    }

    let mut strict_sums = Vec::new();
    for side in [Side::Left, Side::Right] {
        for factor_edge in 0..p.factor(side).edges().len() {
            let over: Vec<usize> = edges
                .iter()
                .copied()
                .filter(|&e| p.projected_edge(side, e) == factor_edge)
                .collect();
            debug_assert!(!over.is_empty(), "tree product components cover every factor edge");
            for f in 0..4 {
                strict_sums.push(over.iter().map(|&e| index.var(e, f)).collect());
            }
        }
    }

    let mut implications = Vec::new();
    for v in p.component_vertices(component)? {
        let mut consequents: Vec<Vec<usize>> = Vec::new();
        for side in [Side::Left, Side::Right] {
            let base = p.project(side, v);
            for &u in p.factor(side).neighbors(base) {
                let local = p.local_preimage(v, side, u);
                for f in 0..4 {
                    consequents.push(local.iter().map(|&e| index.var(e, f)).collect());
                }
            }
        }
        for e in p.out_edges(v) {
            for f in 0..4 {
                let trigger = index.var(e, f);
                for consequent in &consequents {
                    implications.push(Implication {
                        trigger,
                        consequent: consequent.clone(),
                    });
                }
            }
        }
    }

    Ok(LinearSystem {
        pair: PairSpec {
            left_spec: g1.to_spec(),
            right_spec: g2.to_spec(),
        },
        component,
        variables,
        equalities,
        strict_sums,
        implications,
    })
}

/// Both component systems for a pair of trees of diameter at least 3.
pub fn build_full_system(g1: &Tree, g2: &Tree) -> Result<FullSystem, SystemError> {
    for g in [g1, g2] {
        let diameter = g.diameter();
        if diameter < 3 {
            return Err(SystemError::TooSmall { diameter });
        }
    }
    let product = ProductGraph::of_reductions(g1, g2)?;
    let systems = [
        build_component_system(&product, 1, g1, g2)?,
        build_component_system(&product, 2, g1, g2)?,
    ];
    Ok(FullSystem { product, systems })
}

impl FullSystem {
    /// Replaces the echoed tree specs, e.g. with the text the user typed.
    pub fn with_pair(mut self, left_spec: &str, right_spec: &str) -> FullSystem {
        for s in &mut self.systems {
            s.pair = PairSpec {
                left_spec: left_spec.to_string(),
                right_spec: right_spec.to_string(),
            };
        }
        self
    }
}

fn eval(row: &[(usize, i64)], x: &[BigInt]) -> BigInt {
    row.iter()
        .fold(BigInt::zero(), |acc, &(v, c)| acc + BigInt::from(c) * &x[v])
}

impl LinearSystem {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Index of a variable, if present.
    pub fn var_of(&self, id: VarId) -> Option<usize> {
        self.variables.binary_search(&id).ok()
    }

    /// Exact evaluation of every constraint.
    pub fn check_assignment(&self, x: &[BigInt]) -> Result<CheckReport, SystemError> {
        if x.len() != self.num_vars() {
            return Err(SystemError::PartialAssignment {
                expected: self.num_vars(),
                got: x.len(),
            });
        }
        let mut violations = Vec::new();
        for (row, eq) in self.equalities.iter().enumerate() {
            let value = eval(eq, x);
            if !value.is_zero() {
                violations.push(Violation::Equality {
                    row,
                    value: value.to_string(),
                });
            }
        }
        for (var, v) in x.iter().enumerate() {
            if v.is_negative() {
                violations.push(Violation::Negative { var });
            }
        }
        let positive_sum =
            |set: &[usize]| set.iter().fold(BigInt::zero(), |acc, &v| acc + &x[v]).is_positive();
        for (index, set) in self.strict_sums.iter().enumerate() {
            if !positive_sum(set) {
                violations.push(Violation::StrictSum { index });
            }
        }
        for (index, imp) in self.implications.iter().enumerate() {
            if x[imp.trigger].is_positive() && !positive_sum(&imp.consequent) {
                violations.push(Violation::Implication { index });
            }
        }
        Ok(CheckReport { violations })
    }

    /// Same as [`LinearSystem::check_assignment`] for an assignment keyed by variable.
    pub fn check_assignment_map(
        &self,
        x: &BTreeMap<VarId, BigInt>,
    ) -> Result<CheckReport, SystemError> {
        let dense = self
            .variables
            .iter()
            .map(|id| x.get(id).cloned().ok_or(SystemError::MissingVariable(*id)))
            .collect::<Result<Vec<_>, _>>()?;
        self.check_assignment(&dense)
    }

    /// Product edges whose four labels are all positive under `x`.
    pub fn support_edges(&self, x: &[BigInt]) -> Vec<usize> {
        self.variables
            .chunks(4)
            .zip(x.chunks(4))
            .filter(|(_, vals)| vals.iter().all(Signed::is_positive))
            .map(|(ids, _)| ids[0].edge)
            .collect()
    }

    /// Chain values at every vertex of the component. Requires the product and
    /// trees the system was built from.
    pub fn r_labels(
        &self,
        p: &ProductGraph,
        g1: &Tree,
        g2: &Tree,
        x: &[BigInt],
    ) -> Result<Vec<RLabels>, SystemError> {
        if x.len() != self.num_vars() {
            return Err(SystemError::PartialAssignment {
                expected: self.num_vars(),
                got: x.len(),
            });
        }
        let edges = p.component_edges(self.component)?;
        let index = VarIndex::new(p, &edges);
        let out = vertex_chains(p, self.component, g1, g2, &index)?
            .into_iter()
            .map(|vc| {
                let values: Vec<Vec<BigInt>> = vc
                    .chains
                    .iter()
                    .map(|chain| chain.iter().map(|sum| eval(sum, x)).collect())
                    .collect();
                let consistent = values.iter().all(|vals| vals.windows(2).all(|w| w[0] == w[1]));
                RLabels {
                    vertex: vc.vertex,
                    r1: values[0][0].clone(),
                    r2: values[1].last().unwrap().clone(),
                    consistent,
                }
            })
            .collect();
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("systems serialize")
    }

    pub fn from_json(text: &str) -> Result<LinearSystem, SystemError> {
        let s: LinearSystem = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        let n = self.num_vars();
        let invalid = |m: &str| Err(SystemError::Invalid(m.to_string()));
        if !matches!(self.component, 1 | 2) {
            return invalid("component must be 1 or 2");
        }
        if self
            .variables
            .iter()
            .any(|v| !(1..=2).contains(&v.k) || !(1..=2).contains(&v.l))
        {
            return invalid("label indices must be 1 or 2");
        }
        if self.variables.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("variables must be strictly increasing");
        }
        if self.equalities.iter().flatten().any(|&(v, _)| v >= n) {
            return invalid("equality refers to a missing variable");
        }
        for set in &self.strict_sums {
            if set.is_empty() || set.iter().any(|&v| v >= n) {
                return invalid("strict sums must be nonempty and in range");
            }
        }
        for imp in &self.implications {
            if imp.trigger >= n || imp.consequent.is_empty() || imp.consequent.iter().any(|&v| v >= n)
            {
                return invalid("implications must be nonempty and in range");
            }
        }
        Ok(())
    }
}

//! Integer feasibility of a component system.
//!
//! Nonnegative solutions of the equalities that also satisfy every
//! implication are closed under addition, so there is a unique largest set of
//! variables that can be simultaneously positive. The solver computes it by
//! alternating an exact maximal-support LP with pruning of triggers whose
//! consequents were forced to zero. Because the system is homogeneous with
//! integer coefficients, a rational point positive on that support scales to
//! an integer witness.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactlp::{lp_maximize, scale_to_integers, LpProblem, Optimum, Rational};
use crate::system::{build_full_system, FullSystem, LinearSystem, SystemError, VarId};
use crate::product::ProductGraph;
use crate::trees::Tree;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("brute force guard exceeded: {0}")]
    Guard(String),
    #[error("witness failed verification: {0}")]
    WitnessRejected(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
}

/// One pruned trigger and the implication that forced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PruneStep {
    pub round: usize,
    pub trigger: VarId,
    pub implication: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComponentStatus {
    Feasible { witness: Vec<BigInt> },
    /// A strict sum that no longer meets the support.
    Infeasible { strict_sum: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentOutcome {
    pub component: u8,
    pub status: ComponentStatus,
    pub trace: Vec<PruneStep>,
    pub rounds: usize,
    /// Variable indices in the final support.
    pub support: Vec<usize>,
}

impl ComponentOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, ComponentStatus::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&[BigInt]> {
        match &self.status {
            ComponentStatus::Feasible { witness } => Some(witness),
            ComponentStatus::Infeasible { .. } => None,
        }
    }
}

/// Both component outcomes of a pair.
#[derive(Clone, Debug)]
pub struct Decision {
    pub full: FullSystem,
    pub outcomes: [ComponentOutcome; 2],
}

impl Decision {
    pub fn verdict(&self) -> Verdict {
        if self.outcomes.iter().any(ComponentOutcome::is_feasible) {
            Verdict::Feasible
        } else {
            Verdict::Infeasible
        }
    }

    /// The first feasible component and its system.
    pub fn feasible_component(&self) -> Option<(&LinearSystem, &ComponentOutcome)> {
        self.outcomes
            .iter()
            .position(ComponentOutcome::is_feasible)
            .map(|i| (&self.full.systems[i], &self.outcomes[i]))
    }
}

/// Variables grouped into proportional classes, `x_i = factor_i · x_rep(i)`.
struct Presolved {
    rep: Vec<usize>,
    factor: Vec<Rational>,
    /// Per representative: pinned to zero.
    zero: Vec<bool>,
    /// Surviving rows over representatives.
    rows: Vec<Vec<(usize, Rational)>>,
}

fn substitute(row: &[(usize, i64)], rep: &[usize], factor: &[Rational], zero: &[bool]) -> Vec<(usize, Rational)> {
    let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
    for &(v, c) in row {
        let r = rep[v];
        if !zero[r] {
            *acc.entry(r).or_insert_with(Rational::zero) += &factor[v] * Rational::from_integer(c.into());
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Pins inactive variables, then repeatedly resolves rows whose nonzero
/// coefficients share a sign (all pinned) or that relate exactly two classes.
fn presolve(s: &LinearSystem, active: &[bool]) -> Presolved {
    let n = s.num_vars();
    let mut rep: Vec<usize> = (0..n).collect();
    let mut factor = vec![Rational::one(); n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut zero: Vec<bool> = active.iter().map(|a| !a).collect();
    let mut done = vec![false; s.equalities.len()];
    loop {
        let mut changed = false;
        for (r, row) in s.equalities.iter().enumerate() {
            if done[r] {
                continue;
            }
            let sub = substitute(row, &rep, &factor, &zero);
            let positives = sub.iter().filter(|(_, c)| c.is_positive()).count();
            if positives == 0 || positives == sub.len() {
                for (v, _) in &sub {
                    zero[*v] = true;
                }
                done[r] = true;
                changed |= !sub.is_empty();
            } else if sub.len() == 2 {
                let (a, ca) = &sub[0];
                let (b, cb) = &sub[1];
                // ca·x_a + cb·x_b = 0.
                let (keep, drop, ratio) = if members[*a].len() >= members[*b].len() {
                    (*a, *b, -(ca / cb))
                } else {
                    (*b, *a, -(cb / ca))
                };
                for m in std::mem::take(&mut members[drop]) {
                    rep[m] = keep;
                    factor[m] = &factor[m] * &ratio;
                    members[keep].push(m);
                }
                done[r] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let rows = s
        .equalities
        .iter()
        .enumerate()
        .filter(|(r, _)| !done[*r])
        .map(|(_, row)| substitute(row, &rep, &factor, &zero))
        .filter(|row| !row.is_empty())
        .collect();
    Presolved {
        rep,
        factor,
        zero,
        rows,
    }
}

/// The largest set of active variables that can be simultaneously positive
/// in a nonnegative solution of the equalities (inactive variables pinned to
/// zero), and a solution positive exactly there.
///
/// One LP suffices: with `y = t + s`, `0 <= t <= 1`, `s >= 0`, maximizing
/// `Σ t` reaches `t = 1` on exactly the maximal support, since the feasible
/// set is a cone.
pub fn maximal_support(s: &LinearSystem, active: &[bool]) -> (Vec<bool>, Vec<Rational>) {
    let n = s.num_vars();
    let pre = presolve(s, active);
    let mut lp_index: BTreeMap<usize, usize> = BTreeMap::new();
    for row in &pre.rows {
        for (r, _) in row {
            let next = lp_index.len();
            lp_index.entry(*r).or_insert(next);
        }
    }
    let m = lp_index.len();
    let mut rep_value: BTreeMap<usize, Rational> = BTreeMap::new();
    if m > 0 {
        let mut lp = LpProblem::new(2 * m);
        for j in 0..m {
            lp.set_upper(j, 1);
        }
        for row in &pre.rows {
            let mut dense = Vec::with_capacity(2 * row.len());
            for (r, c) in row {
                let j = lp_index[r];
                dense.push((j, c.clone()));
                dense.push((m + j, c.clone()));
            }
            lp.add_row(dense);
        }
        let objective: Vec<(usize, Rational)> = (0..m).map(|j| (j, Rational::one())).collect();
        let Optimum::Optimal { point, .. } = lp_maximize(&lp, &objective) else {
            unreachable!("the zero point is feasible and t is bounded");
        };
        for (&r, &j) in &lp_index {
            let t = &point[j];
            assert!(t.is_zero() || t.is_one(), "max-support LP returned a fractional t");
            rep_value.insert(r, t + &point[m + j]);
        }
    }
    let mut support = vec![false; n];
    let mut x = vec![Rational::zero(); n];
    for i in 0..n {
        let r = pre.rep[i];
        if pre.zero[r] {
            continue;
        }
        // Classes outside every remaining row are unconstrained.
        let y = rep_value.get(&r).cloned().unwrap_or_else(Rational::one);
        if y.is_positive() {
            support[i] = true;
            x[i] = &pre.factor[i] * y;
        }
    }
    (support, x)
}

/// Prunes every violated trigger in each round, in ascending order.
pub fn prune_fixpoint(s: &LinearSystem) -> Result<ComponentOutcome, SolverError> {
    prune_fixpoint_by(s, |violated| violated.to_vec())
}

/// Like [`prune_fixpoint`], but `select` chooses which of the currently
/// violated triggers (ascending, deduplicated) to prune this round. It must
/// return a nonempty subset.
pub fn prune_fixpoint_by<F>(s: &LinearSystem, mut select: F) -> Result<ComponentOutcome, SolverError>
where
    F: FnMut(&[usize]) -> Vec<usize>,
{
    let n = s.num_vars();
    let mut active = vec![true; n];
    let mut trace = Vec::new();
    let mut round = 0;
    loop {
        round += 1;
        let (support, point) = maximal_support(s, &active);
        let support_list: Vec<usize> = (0..n).filter(|&v| support[v]).collect();
        if let Some(strict_sum) = s
            .strict_sums
            .iter()
            .position(|set| set.iter().all(|&v| !support[v]))
        {
            return Ok(ComponentOutcome {
                component: s.component,
                status: ComponentStatus::Infeasible { strict_sum },
                trace,
                rounds: round,
                support: support_list,
            });
        }
        let mut violated: BTreeMap<usize, usize> = BTreeMap::new();
        for (index, imp) in s.implications.iter().enumerate() {
            if support[imp.trigger] && imp.consequent.iter().all(|&v| !support[v]) {
                violated.entry(imp.trigger).or_insert(index);
            }
        }
        if violated.is_empty() {
            let witness = scale_to_integers(&point);
            let report = s.check_assignment(&witness)?;
            if !report.is_ok() {
                return Err(SolverError::WitnessRejected(format!("{:?}", report.violations)));
            }
            return Ok(ComponentOutcome {
                component: s.component,
                status: ComponentStatus::Feasible { witness },
                trace,
                rounds: round,
                support: support_list,
            });
        }
        let triggers: Vec<usize> = violated.keys().copied().collect();
        let chosen = select(&triggers);
        assert!(
            !chosen.is_empty() && chosen.iter().all(|t| violated.contains_key(t)),
            "select must return a nonempty subset of the violated triggers"
        );
        for t in chosen {
            active[t] = false;
            trace.push(PruneStep {
                round,
                trigger: s.variables[t],
                implication: violated[&t],
            });
        }
    }
}

/// Connected pieces of the subgraph of `p` formed by edges with a positive
/// label under `x`, as sorted vertex lists. Connectivity is reported, not
/// required.
pub fn support_components(p: &ProductGraph, s: &LinearSystem, x: &[BigInt]) -> Vec<Vec<usize>> {
    let n = p.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut touched = vec![false; n];
    for (id, value) in s.variables.iter().zip(x) {
        if value.is_positive() {
            let e = p.edge(id.edge);
            touched[e.source] = true;
            touched[e.target] = true;
            let (a, b) = (find(&mut parent, e.source), find(&mut parent, e.target));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in (0..n).filter(|&v| touched[v]) {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    groups.into_values().collect()
}

/// Runs both components (concurrently).
pub fn decide_full(full: FullSystem) -> Result<Decision, SolverError> {
    let (a, b) = rayon::join(
        || prune_fixpoint(&full.systems[0]),
        || prune_fixpoint(&full.systems[1]),
    );
    Ok(Decision {
        outcomes: [a?, b?],
        full,
    })
}

/// Builds and decides the system of a pair of trees of diameter at least 3.
pub fn decide(g1: &Tree, g2: &Tree) -> Result<Decision, SolverError> {
    decide_full(build_full_system(g1, g2)?)
}

/// Largest search space the brute-force oracle accepts: 16 classes at bound 4.
pub const BRUTE_FORCE_MAX_STATES: u128 = 152_587_890_625; // 5^16

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceOutcome {
    pub feasible: bool,
    pub witness: Option<Vec<BigInt>>,
    /// Number of classes after identifying variables joined by `x = y` rows.
    pub classes: usize,
}

/// Exhaustive search over values `0..=bound` after identifying variables
/// linked by rows `x - y = 0`. Accepts with the same predicate as
/// [`LinearSystem::check_assignment`].
pub fn brute_force_feasible(s: &LinearSystem, bound: u32) -> Result<BruteForceOutcome, SolverError> {
    let n = s.num_vars();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for row in &s.equalities {
        if let [(a, ca), (b, cb)] = row.as_slice() {
            if *ca == -*cb && *ca != 0 {
                let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut classes = 0;
    for v in 0..n {
        let r = find(&mut parent, v);
        if class_of[r] == usize::MAX {
            class_of[r] = classes;
            classes += 1;
        }
        class_of[v] = class_of[r];
    }
    let states = (bound as u128 + 1).checked_pow(classes as u32);
    if states.is_none_or(|st| st > BRUTE_FORCE_MAX_STATES) {
        return Err(SolverError::Guard(format!(
            "{classes} classes at bound {bound} exceed {BRUTE_FORCE_MAX_STATES} states"
        )));
    }

    let rows: Vec<Vec<(usize, i64)>> = s
        .equalities
        .iter()
        .map(|row| {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for &(v, c) in row {
                *acc.entry(class_of[v]).or_default() += c;
            }
            acc.into_iter().filter(|&(_, c)| c != 0).collect::<Vec<_>>()
        })
        .filter(|row: &Vec<(usize, i64)>| !row.is_empty())
        .collect();
    let class_sets = |set: &[usize]| {
        let mut cs: Vec<usize> = set.iter().map(|&v| class_of[v]).collect();
        cs.sort_unstable();
        cs.dedup();
        cs
    };
    let strict: Vec<Vec<usize>> = s.strict_sums.iter().map(|set| class_sets(set)).collect();
    let implications: Vec<(usize, Vec<usize>)> = s
        .implications
        .iter()
        .map(|imp| (class_of[imp.trigger], class_sets(&imp.consequent)))
        .collect();

    let mut search = Search {
        bound: bound as i64,
        rows_touching: vec![Vec::new(); classes],
        strict_at: vec![Vec::new(); classes],
        implications_at: vec![Vec::new(); classes],
        rows,
        strict,
        implications,
        values: vec![0; classes],
    };
    for (r, row) in search.rows.iter().enumerate() {
        for &(c, _) in row {
            search.rows_touching[c].push(r);
        }
    }
    for (i, set) in search.strict.iter().enumerate() {
        if let Some(&last) = set.last() {
            search.strict_at[last].push(i);
        }
    }
    for (i, (t, set)) in search.implications.iter().enumerate() {
        let last = set.last().copied().unwrap_or(0).max(*t);
        search.implications_at[last].push(i);
    }
    if search.strict.iter().any(Vec::is_empty) {
        return Ok(BruteForceOutcome {
            feasible: false,
            witness: None,
            classes,
        });
    }
    let found = classes == 0 || search.extend(0);
    let witness = found.then(|| {
        (0..n)
            .map(|v| BigInt::from(if classes == 0 { 0 } else { search.values[class_of[v]] }))
            .collect::<Vec<_>>()
    });
    if let Some(w) = &witness {
        let report = s.check_assignment(w)?;
        if !report.is_ok() {
            return Ok(BruteForceOutcome {
                feasible: false,
                witness: None,
                classes,
            });
        }
    }
    Ok(BruteForceOutcome {
        feasible: witness.is_some(),
        witness,
        classes,
    })
}

struct Search {
    bound: i64,
    rows: Vec<Vec<(usize, i64)>>,
    strict: Vec<Vec<usize>>,
    implications: Vec<(usize, Vec<usize>)>,
    rows_touching: Vec<Vec<usize>>,
    strict_at: Vec<Vec<usize>>,
    implications_at: Vec<Vec<usize>>,
    values: Vec<i64>,
}

impl Search {
    /// Can the row still vanish once classes `> depth` are filled in?
    fn row_open(&self, row: &[(usize, i64)], depth: usize) -> bool {
        let (mut sum, mut lo, mut hi) = (0i64, 0i64, 0i64);
        for &(c, coeff) in row {
            if c <= depth {
                sum += coeff * self.values[c];
            } else if coeff > 0 {
                hi += coeff * self.bound;
            } else {
                lo += coeff * self.bound;
            }
        }
        sum + lo <= 0 && 0 <= sum + hi
    }

    fn consistent(&self, depth: usize) -> bool {
        self.rows_touching[depth]
            .iter()
            .all(|&r| self.row_open(&self.rows[r], depth))
            && self.strict_at[depth]
                .iter()
                .all(|&i| self.strict[i].iter().any(|&c| self.values[c] > 0))
            && self.implications_at[depth].iter().all(|&i| {
                let (t, set) = &self.implications[i];
                self.values[*t] == 0 || set.iter().any(|&c| self.values[c] > 0)
            })
    }

    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.values.len() {
            return true;
        }
        for v in 0..=self.bound {
            self.values[depth] = v;
            if self.consistent(depth) && self.extend(depth + 1) {
                return true;
            }
        }
        self.values[depth] = 0;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Implication, PairSpec};

    fn tree(spec: &str) -> Tree {
        spec.parse().unwrap()
    }

    fn toy(equalities: Vec<Vec<(usize, i64)>>, n: usize) -> LinearSystem {
        LinearSystem {
            pair: PairSpec {
                left_spec: "toy".into(),
                right_spec: "toy".into(),
            },
            component: 1,
            variables: (0..n).map(|i| VarId { edge: i / 4, k: (i % 4 / 2 + 1) as u8, l: (i % 2 + 1) as u8 }).collect(),
            equalities,
            strict_sums: vec![(0..n).collect()],
            implications: vec![],
        }
    }

    #[test]
    fn empty_active_set() {
        let s = toy(vec![vec![(0, 1), (1, -1)]], 2);
        let (support, x) = maximal_support(&s, &[false, false]);
        assert!(support.iter().all(|&b| !b));
        assert!(x.iter().all(Zero::is_zero));
    }

    #[test]
    fn presolve_pins_sign_definite_rows() {
        // x0 = x1 + x2, x1 + x3 = 0  ->  x1 = x3 = 0, x0 = x2.
        let s = toy(vec![vec![(0, 1), (1, -1), (2, -1)], vec![(1, 1), (3, 1)]], 4);
        let (support, _) = maximal_support(&s, &[true; 4]);
        assert_eq!(support, vec![true, false, true, false]);
    }

    #[test]
    fn implication_pruning_cascades() {
        let mut s = toy(vec![vec![(0, 1), (1, -1)], vec![(2, 1), (3, 1)]], 4);
        s.implications = vec![Implication {
            trigger: 0,
            consequent: vec![2],
        }];
        s.strict_sums = vec![vec![0, 1]];
        let out = prune_fixpoint(&s).unwrap();
        assert!(!out.is_feasible());
        assert_eq!(out.trace.len(), 1);
        assert!(!brute_force_feasible(&s, 3).unwrap().feasible);
    }

    #[test]
    fn p3_p5_infeasible_both_ways() {
        let d = decide(&tree("path:3"), &tree("path:5")).unwrap();
        assert_eq!(d.verdict(), Verdict::Infeasible);
        for s in &d.full.systems {
            assert!(!brute_force_feasible(s, 3).unwrap().feasible);
        }
    }

    #[test]
    fn p3_p8_component_one_excludes_m22_e3() {
        let g1 = tree("path:8");
        let g2 = tree("path:3");
        let full = build_full_system(&g1, &g2).unwrap();
        let p = &full.product;
        let s = &full.systems[0];
        let e3 = p.find_edge(p.vertex_id(2, 0), p.vertex_id(3, 1)).unwrap();
        let v = s.var_of(VarId { edge: e3, k: 2, l: 2 }).unwrap();
        let (support, _) = maximal_support(s, &vec![true; s.num_vars()]);
        assert!(!support[v]);
    }

    #[test]
    fn p3_p3_feasible_and_brute_force_agrees() {
        let d = decide(&tree("path:3"), &tree("path:3")).unwrap();
        assert_eq!(d.verdict(), Verdict::Feasible);
        for s in &d.full.systems {
            assert!(brute_force_feasible(s, 1).unwrap().feasible);
        }
    }

    #[test]
    fn diagonal_support_is_connected() {
        let g = tree("tkk:2");
        let d = decide(&g, &g).unwrap();
        let (s, o) = d.feasible_component().unwrap();
        let pieces = support_components(&d.full.product, s, o.witness().unwrap());
        assert!(!pieces.is_empty());
        let diagonal = pieces.iter().any(|piece| {
            (0..d.full.product.left().vertex_count()).all(|v| piece.contains(&d.full.product.vertex_id(v, v)))
        });
        assert!(diagonal);
    }

    #[test]
    fn witness_doubles() {
        let d = decide(&tree("path:6"), &tree("tkk:1")).unwrap();
        let (s, out) = d.feasible_component().unwrap();
        let doubled: Vec<BigInt> = out.witness().unwrap().iter().map(|v| v * 2).collect();
        assert!(s.check_assignment(&doubled).unwrap().is_ok());
    }

    #[test]
    fn brute_force_guard() {
        let full = build_full_system(&tree("path:9"), &tree("path:9")).unwrap();
        assert!(matches!(
            brute_force_feasible(&full.systems[0], 4),
            Err(SolverError::Guard(_))
        ));
    }
}

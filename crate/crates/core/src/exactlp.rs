//! Exact rational linear feasibility and optimization.
//!
//! A dense two-phase simplex with Bland's rule. The tableau runs over
//! `Ratio<i128>` with checked arithmetic first and restarts over `BigRational`
//! if any operation overflows, so verdicts never depend on floating point.
//! Every returned point is re-substituted into the original problem before it
//! is handed back.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("Fourier-Motzkin guard exceeded: {0}")]
    Guard(String),
    #[error("inconsistent problem dimensions: {0}")]
    Dimension(String),
}

/// Equality rows with zero right-hand side plus per-variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    /// Sparse rows `Σ coeff · x_var = 0`.
    pub rows: Vec<Vec<(usize, Rational)>>,
    pub lower: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
}

impl LpProblem {
    /// All variables nonnegative and unbounded above.
    pub fn new(num_vars: usize) -> LpProblem {
        LpProblem {
            num_vars,
            rows: Vec::new(),
            lower: vec![Rational::zero(); num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn add_row(&mut self, row: Vec<(usize, Rational)>) {
        self.rows.push(row);
    }

    pub fn add_int_row(&mut self, row: &[(usize, i64)]) {
        self.rows
            .push(row.iter().map(|&(v, c)| (v, Rational::from_integer(c.into()))).collect());
    }

    pub fn set_lower(&mut self, var: usize, value: i64) {
        self.lower[var] = Rational::from_integer(value.into());
    }

    pub fn set_upper(&mut self, var: usize, value: i64) {
        self.upper[var] = Some(Rational::from_integer(value.into()));
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return Err(LpError::Dimension("bound vectors".into()));
        }
        if self.rows.iter().flatten().any(|&(v, _)| v >= self.num_vars) {
            return Err(LpError::Dimension("row refers to a missing variable".into()));
        }
        if self.lower.iter().any(Signed::is_negative) {
            return Err(LpError::Dimension("negative lower bound".into()));
        }
        Ok(())
    }

    /// Exact check of every row and bound.
    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        let rows_ok = self.rows.iter().all(|row| {
            row.iter()
                .fold(Rational::zero(), |acc, (v, c)| acc + c * &x[*v])
                .is_zero()
        });
        let bounds_ok = (0..self.num_vars).all(|j| {
            x[j] >= self.lower[j] && self.upper[j].as_ref().is_none_or(|u| &x[j] <= u)
        });
        rows_ok && bounds_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Optimum {
    Optimal { point: Vec<Rational>, value: Rational },
    Unbounded,
    Infeasible,
}

/// Phase-one simplex: a point satisfying every constraint, or `Infeasible`.
pub fn lp_feasible(p: &LpProblem) -> Feasibility {
    match lp_maximize(p, &[]) {
        Optimum::Optimal { point, .. } => Feasibility::Feasible(point),
        Optimum::Infeasible => Feasibility::Infeasible,
        Optimum::Unbounded => unreachable!("a zero objective is bounded"),
    }
}

/// Maximizes `Σ coeff · x_var` over the problem.
pub fn lp_maximize(p: &LpProblem, objective: &[(usize, Rational)]) -> Optimum {
    p.validate().expect("malformed LP problem");
    let result = match simplex::run_simplex::<Ratio<i128>>(p, objective) {
        Some(r) => r,
        None => simplex::run_simplex::<BigRational>(p, objective).expect("big rationals do not overflow"),
    };
    if let Optimum::Optimal { point, value } = &result {
        assert!(p.satisfied_by(point), "simplex returned a point violating the problem");
        let recomputed = objective
            .iter()
            .fold(<Rational as Zero>::zero(), |acc, (v, c)| acc + c * &point[*v]);
        assert_eq!(&recomputed, value, "simplex objective mismatch");
    }
    result
}

mod simplex {
    use num_bigint::BigInt;
    use num_rational::{BigRational, Ratio};
    use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

    use super::{LpProblem, Optimum, Rational};

    /// Arithmetic used inside the tableau; `None` signals overflow.
    pub(super) trait Field: Clone + PartialOrd + Sized {
        fn zero() -> Self;
        fn one() -> Self;
        fn is_zero(&self) -> bool;
        fn is_positive(&self) -> bool;
        fn is_negative(&self) -> bool;
        fn add(&self, o: &Self) -> Option<Self>;
        fn sub(&self, o: &Self) -> Option<Self>;
        fn mul(&self, o: &Self) -> Option<Self>;
        fn div(&self, o: &Self) -> Option<Self>;
        fn neg(&self) -> Self;
        fn from_rational(r: &BigRational) -> Option<Self>;
        fn to_rational(&self) -> BigRational;
    }

    impl Field for Ratio<i128> {
        fn zero() -> Self {
            Zero::zero()
        }
        fn one() -> Self {
            One::one()
        }
        fn is_zero(&self) -> bool {
            Zero::is_zero(self)
        }
        fn is_positive(&self) -> bool {
            Signed::is_positive(self)
        }
        fn is_negative(&self) -> bool {
            Signed::is_negative(self)
        }
        fn add(&self, o: &Self) -> Option<Self> {
            self.checked_add(o)
        }
        fn sub(&self, o: &Self) -> Option<Self> {
            self.checked_sub(o)
        }
        fn mul(&self, o: &Self) -> Option<Self> {
            self.checked_mul(o)
        }
        fn div(&self, o: &Self) -> Option<Self> {
            self.checked_div(o)
        }
        fn neg(&self) -> Self {
            -self
        }
        fn from_rational(r: &BigRational) -> Option<Self> {
            Some(Ratio::new(r.numer().to_i128()?, r.denom().to_i128()?))
        }
        fn to_rational(&self) -> BigRational {
            BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
        }
    }

    impl Field for BigRational {
        fn zero() -> Self {
            Zero::zero()
        }
        fn one() -> Self {
            One::one()
        }
        fn is_zero(&self) -> bool {
            Zero::is_zero(self)
        }
        fn is_positive(&self) -> bool {
            Signed::is_positive(self)
        }
        fn is_negative(&self) -> bool {
            Signed::is_negative(self)
        }
        fn add(&self, o: &Self) -> Option<Self> {
            Some(self + o)
        }
        fn sub(&self, o: &Self) -> Option<Self> {
            Some(self - o)
        }
        fn mul(&self, o: &Self) -> Option<Self> {
            Some(self * o)
        }
        fn div(&self, o: &Self) -> Option<Self> {
            Some(self / o)
        }
        fn neg(&self) -> Self {
            -self
        }
        fn from_rational(r: &BigRational) -> Option<Self> {
            Some(r.clone())
        }
        fn to_rational(&self) -> BigRational {
            self.clone()
        }
    }

    struct Tableau<T> {
        /// Constraint rows; the last entry of each row is the right-hand side.
        rows: Vec<Vec<T>>,
        /// Reduced-cost row of the current (minimization) objective; last entry is
        /// minus the objective value.
        cost: Vec<T>,
        basis: Vec<usize>,
        /// Columns at or beyond this index are artificial and never enter.
        artificial_start: usize,
    }

    enum Step {
        Optimal,
        Unbounded,
    }

    impl<T: Field> Tableau<T> {
        fn width(&self) -> usize {
            self.cost.len()
        }

        fn pivot(&mut self, r: usize, c: usize) -> Option<()> {
            let w = self.width();
            let inv = T::one().div(&self.rows[r][c])?;
            let mut support = Vec::new();
            for j in 0..w {
                if !self.rows[r][j].is_zero() {
                    let v = self.rows[r][j].mul(&inv)?;
                    self.rows[r][j] = v;
                    support.push(j);
                }
            }
            let pivot_row = self.rows[r].clone();
            let eliminate = |row: &mut Vec<T>| -> Option<()> {
                let factor = row[c].clone();
                if factor.is_zero() {
                    return Some(());
                }
                for &j in &support {
                    row[j] = row[j].sub(&factor.mul(&pivot_row[j])?)?;
                }
                Some(())
            };
            for i in 0..self.rows.len() {
                if i != r {
                    eliminate(&mut self.rows[i])?;
                }
            }
            eliminate(&mut self.cost)?;
            self.basis[r] = c;
            Some(())
        }

        /// Bland's rule: lowest-index improving column, ties in the ratio test
        /// broken by lowest basic variable.
        fn optimize(&mut self) -> Option<Step> {
            let rhs = self.width() - 1;
            loop {
                let entering = (0..self.artificial_start).find(|&j| self.cost[j].is_negative());
                let Some(c) = entering else {
                    return Some(Step::Optimal);
                };
                let mut best: Option<(usize, T)> = None;
                for i in 0..self.rows.len() {
                    let a = &self.rows[i][c];
                    if !a.is_positive() {
                        continue;
                    }
                    let ratio = self.rows[i][rhs].div(a)?;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
                match best {
                    None => return Some(Step::Unbounded),
                    Some((r, _)) => self.pivot(r, c)?,
                }
            }
        }
    }

    /// Returns `None` on arithmetic overflow.
    pub(super) fn run_simplex<T: Field>(p: &LpProblem, objective: &[(usize, Rational)]) -> Option<Optimum> {
        let n = p.num_vars;
        for j in 0..n {
            if let Some(u) = &p.upper[j] {
                if u < &p.lower[j] {
                    return Some(Optimum::Infeasible);
                }
            }
        }
        let bounded: Vec<usize> = (0..n).filter(|&j| p.upper[j].is_some()).collect();
        let structural = n + bounded.len();
        let equality_rows = p.rows.len();
        let width = structural + equality_rows + 1;
        let rhs = width - 1;

        // Shift x = lower + x'.
        let mut rows: Vec<Vec<T>> = Vec::new();
        let mut basis = Vec::new();
        for (r, row) in p.rows.iter().enumerate() {
            let mut dense = vec![T::zero(); width];
            let mut b = <BigRational as Zero>::zero();
            for (v, c) in row {
                dense[*v] = dense[*v].add(&T::from_rational(c)?)?;
                b -= c * &p.lower[*v];
            }
            dense[rhs] = T::from_rational(&b)?;
            if Signed::is_negative(&b) {
                for x in dense.iter_mut() {
                    *x = x.neg();
                }
            }
            dense[structural + r] = T::one();
            rows.push(dense);
            basis.push(structural + r);
        }
        for (s, &j) in bounded.iter().enumerate() {
            let mut dense = vec![T::zero(); width];
            dense[j] = T::one();
            dense[n + s] = T::one();
            let room = p.upper[j].as_ref().unwrap() - &p.lower[j];
            dense[rhs] = T::from_rational(&room)?;
            rows.push(dense);
            basis.push(n + s);
        }

        // Phase one: minimize the sum of artificials.
        let mut cost = vec![T::zero(); width];
        for row in rows.iter().take(equality_rows) {
            for j in 0..structural {
                cost[j] = cost[j].sub(&row[j])?;
            }
            cost[rhs] = cost[rhs].sub(&row[rhs])?;
        }
        let mut t = Tableau {
            rows,
            cost,
            basis,
            artificial_start: structural,
        };
        t.optimize()?;
        if !t.cost[rhs].is_zero() {
            return Some(Optimum::Infeasible);
        }

        // Drive zero-level artificials out; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= structural {
                match (0..structural).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(c) => t.pivot(i, c)?,
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }

        // Phase two: minimize -objective.
        let mut cost = vec![T::zero(); width];
        for (v, c) in objective {
            cost[*v] = cost[*v].sub(&T::from_rational(c)?)?;
        }
        for (i, row) in t.rows.iter().enumerate() {
            let b = t.basis[i];
            if !cost[b].is_zero() {
                let factor = cost[b].clone();
                for j in 0..width {
                    if !row[j].is_zero() {
                        cost[j] = cost[j].sub(&factor.mul(&row[j])?)?;
                    }
                }
            }
        }
        t.cost = cost;
        if let Step::Unbounded = t.optimize()? {
            return Some(Optimum::Unbounded);
        }

        let mut shifted = vec![<BigRational as Zero>::zero(); structural];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < structural {
                shifted[b] = t.rows[i][rhs].to_rational();
            }
        }
        let point: Vec<Rational> = (0..n).map(|j| &p.lower[j] + &shifted[j]).collect();
        let value = objective
            .iter()
            .fold(<Rational as Zero>::zero(), |acc, (v, c)| acc + c * &point[*v]);
        Some(Optimum::Optimal { point, value })
    }
}

/// Largest problem the Fourier-Motzkin oracle accepts.
pub const FM_MAX_VARS: usize = 24;
const FM_MAX_INEQUALITIES: usize = 200_000;

/// Fourier-Motzkin verdict for the same problem; a test oracle only.
pub fn fm_feasible(p: &LpProblem) -> Result<bool, LpError> {
    p.validate()?;
    if p.num_vars > FM_MAX_VARS {
        return Err(LpError::Guard(format!(
            "{} variables exceed the limit of {FM_MAX_VARS}",
            p.num_vars
        )));
    }
    let n = p.num_vars;
    // Inequalities `a · x >= b`.
    let mut ineqs: Vec<(Vec<Rational>, Rational)> = Vec::new();
    let mut eqs: Vec<Vec<Rational>> = Vec::new();
    for row in &p.rows {
        let mut dense = vec![Rational::zero(); n];
        for (v, c) in row {
            dense[*v] += c;
        }
        eqs.push(dense);
    }
    for j in 0..n {
        let mut unit = vec![Rational::zero(); n];
        unit[j] = Rational::one();
        ineqs.push((unit.clone(), p.lower[j].clone()));
        if let Some(u) = &p.upper[j] {
            ineqs.push((unit.into_iter().map(|x| -x).collect(), -u.clone()));
        }
    }

    // Equalities are eliminated exactly by substitution.
    let mut eliminated = vec![false; n];
    while let Some(eq) = eqs.pop() {
        let Some(j) = (0..n).find(|&j| !eliminated[j] && !eq[j].is_zero()) else {
            continue;
        };
        eliminated[j] = true;
        let pivot = eq[j].clone();
        let substitute = |row: &mut Vec<Rational>| {
            if !row[j].is_zero() {
                let f = &row[j] / &pivot;
                for k in 0..n {
                    let d = &f * &eq[k];
                    row[k] -= d;
                }
            }
        };
        for other in eqs.iter_mut() {
            substitute(other);
        }
        for (a, _) in ineqs.iter_mut() {
            substitute(a);
        }
    }

    for j in 0..n {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for ineq in ineqs.drain(..) {
            if ineq.0[j].is_positive() {
                pos.push(ineq);
            } else if ineq.0[j].is_negative() {
                neg.push(ineq);
            } else {
                rest.push(ineq);
            }
        }
        if pos.len() * neg.len() + rest.len() > FM_MAX_INEQUALITIES {
            return Err(LpError::Guard("too many derived inequalities".into()));
        }
        for (pa, pb) in &pos {
            for (na, nb) in &neg {
                let fp = -&na[j];
                let fn_ = pa[j].clone();
                let a: Vec<Rational> = (0..n).map(|k| &fp * &pa[k] + &fn_ * &na[k]).collect();
                let b = &fp * pb + &fn_ * nb;
                rest.push((a, b));
            }
        }
        ineqs = dedup_inequalities(rest);
    }
    Ok(ineqs.iter().all(|(_, b)| !b.is_positive()))
}

fn dedup_inequalities(ineqs: Vec<(Vec<Rational>, Rational)>) -> Vec<(Vec<Rational>, Rational)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (a, b) in ineqs {
        let scale = a
            .iter()
            .chain(std::iter::once(&b))
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rational::zero);
        if scale.is_zero() {
            continue;
        }
        let a: Vec<Rational> = a.iter().map(|x| x / &scale).collect();
        let b = &b / &scale;
        if a.iter().all(Zero::is_zero) && !b.is_positive() {
            continue;
        }
        if seen.insert((a.clone(), b.clone())) {
            out.push((a, b));
        }
    }
    out
}

/// Multiplies a nonnegative rational point by the lcm of its denominators.
pub fn scale_to_integers(x: &[Rational]) -> Vec<BigInt> {
    assert!(x.iter().all(|v| !v.is_negative()), "point must be nonnegative");
    let lcm = x
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    x.iter().map(|v| v.numer() * (&lcm / v.denom())).collect()
}

/// Rank of a set of sparse rational rows over `num_vars` columns.
pub fn rank(rows: &[Vec<(usize, Rational)>], num_vars: usize) -> usize {
    let mut dense: Vec<Vec<Rational>> = rows
        .iter()
        .map(|row| {
            let mut d = vec![Rational::zero(); num_vars];
            for (v, c) in row {
                d[*v] += c;
            }
            d
        })
        .collect();
    let mut rank = 0;
    for col in 0..num_vars {
        let Some(p) = (rank..dense.len()).find(|&r| !dense[r][col].is_zero()) else {
            continue;
        };
        dense.swap(rank, p);
        let pivot_row = dense[rank].clone();
        for (r, row) in dense.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = &row[col] / &pivot_row[col];
                for k in col..num_vars {
                    let d = &f * &pivot_row[k];
                    row[k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn two_var(sum_sign: i64) -> LpProblem {
        let mut p = LpProblem::new(2);
        p.add_int_row(&[(0, 1), (1, sum_sign)]);
        p.set_lower(0, 1);
        p
    }

    #[test]
    fn difference_is_feasible() {
        let p = two_var(-1);
        match lp_feasible(&p) {
            Feasibility::Feasible(x) => assert_eq!(x, vec![q(1, 1), q(1, 1)]),
            Feasibility::Infeasible => panic!("expected feasible"),
        }
        assert!(fm_feasible(&p).unwrap());
    }

    #[test]
    fn sum_is_infeasible() {
        let p = two_var(1);
        assert_eq!(lp_feasible(&p), Feasibility::Infeasible);
        assert!(!fm_feasible(&p).unwrap());
    }

    #[test]
    fn upper_bounds_and_maximization() {
        let mut p = LpProblem::new(3);
        p.add_int_row(&[(0, 1), (1, -1), (2, -1)]);
        p.set_upper(1, 1);
        p.set_upper(2, 2);
        let obj = vec![(0, q(1, 1))];
        match lp_maximize(&p, &obj) {
            Optimum::Optimal { value, .. } => assert_eq!(value, q(3, 1)),
            other => panic!("{other:?}"),
        }
        let mut p = LpProblem::new(1);
        p.set_upper(0, 1);
        p.set_lower(0, 2);
        assert_eq!(lp_feasible(&p), Feasibility::Infeasible);
    }

    #[test]
    fn unbounded_objective() {
        let mut p = LpProblem::new(2);
        p.add_int_row(&[(0, 1), (1, -2)]);
        assert_eq!(lp_maximize(&p, &[(0, q(1, 1))]), Optimum::Unbounded);
    }

    #[test]
    fn fractional_vertex() {
        // 2x = 3y, y >= 1  ->  the phase-one vertex is (3/2, 1).
        let mut p = LpProblem::new(2);
        p.add_int_row(&[(0, 2), (1, -3)]);
        p.set_lower(1, 1);
        let Feasibility::Feasible(x) = lp_feasible(&p) else {
            panic!("feasible")
        };
        assert_eq!(x, vec![q(3, 2), q(1, 1)]);
        assert_eq!(scale_to_integers(&x), vec![BigInt::from(3), BigInt::from(2)]);
    }

    #[test]
    fn overflow_falls_back_to_big_rationals() {
        // A chain x_{i+1} = 10^6 x_i forces values far beyond i128.
        let n = 12;
        let mut p = LpProblem::new(n);
        for i in 0..n - 1 {
            p.add_int_row(&[(i + 1, 1), (i, -1_000_000)]);
        }
        p.set_lower(0, 1);
        let Feasibility::Feasible(x) = lp_feasible(&p) else {
            panic!("feasible")
        };
        assert_eq!(x[n - 1], Rational::from_integer(BigInt::from(10u8).pow(66)));
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(
            scale_to_integers(&[q(1, 2), q(3, 2)]),
            vec![BigInt::from(1), BigInt::from(3)]
        );
        assert_eq!(
            scale_to_integers(&[q(0, 1), q(0, 1)]),
            vec![BigInt::from(0), BigInt::from(0)]
        );
    }

    #[test]
    fn fm_guard() {
        let p = LpProblem::new(FM_MAX_VARS + 1);
        assert!(matches!(fm_feasible(&p), Err(LpError::Guard(_))));
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![
            vec![(0, q(1, 1)), (1, q(1, 1))],
            vec![(0, q(2, 1)), (1, q(2, 1))],
            vec![(2, q(1, 1))],
        ];
        assert_eq!(rank(&rows, 3), 2);
    }
}

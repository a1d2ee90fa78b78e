//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Problems are `min c^T v` subject to equality rows, `>=` rows and `v >= 0`.
//! Optimal results carry one dual multiplier per row: free on equality rows,
//! nonnegative on `>=` rows. Infeasible results carry a Farkas ray taken from
//! the phase-one multipliers.

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Geq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow<S> {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, S)>,
    pub rhs: S,
}

impl<S: Scalar> LpRow<S> {
    /// `a^T v` for a dense point `v`.
    pub fn activity(&self, v: &[S]) -> S {
        self.coeffs
            .iter()
            .fold(S::zero(), |acc, (j, a)| acc + a.clone() * v[*j].clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<S = Rational> {
    num_vars: usize,
    objective: Vec<S>,
    rows: Vec<LpRow<S>>,
}

pub type RationalLpProblem = LpProblem<Rational>;

impl<S: Scalar> LpProblem<S> {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![S::zero(); num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[S] {
        &self.objective
    }

    pub fn rows(&self) -> &[LpRow<S>] {
        &self.rows
    }

    pub fn set_objective(&mut self, objective: Vec<S>) {
        assert_eq!(objective.len(), self.num_vars, "objective length");
        self.objective = objective;
    }

    pub fn set_cost(&mut self, j: usize, c: S) {
        self.objective[j] = c;
    }

    /// Adds `a^T v = rhs` and returns its row index.
    pub fn add_eq(&mut self, coeffs: Vec<(usize, S)>, rhs: S) -> usize {
        self.push(RowKind::Eq, coeffs, rhs)
    }

    /// Adds `a^T v >= rhs` and returns its row index.
    pub fn add_geq(&mut self, coeffs: Vec<(usize, S)>, rhs: S) -> usize {
        self.push(RowKind::Geq, coeffs, rhs)
    }

    /// Adds `a^T v <= rhs`, stored as `-a^T v >= -rhs`.
    pub fn add_leq(&mut self, coeffs: Vec<(usize, S)>, rhs: S) -> usize {
        let neg = coeffs.into_iter().map(|(j, a)| (j, -a)).collect();
        self.push(RowKind::Geq, neg, -rhs)
    }

    fn push(&mut self, kind: RowKind, coeffs: Vec<(usize, S)>, rhs: S) -> usize {
        self.rows.push(LpRow { kind, coeffs, rhs });
        self.rows.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::DimensionMismatch("objective length".into()));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if let Some((j, _)) = row.coeffs.iter().find(|(j, _)| *j >= self.num_vars) {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} references column {j} of {}",
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    /// Primal feasibility of `v` (exact for rationals).
    pub fn is_feasible_point(&self, v: &[S]) -> bool {
        v.len() == self.num_vars
            && v.iter().all(|x| !x.is_neg())
            && self.rows.iter().all(|row| {
                let a = row.activity(v);
                match row.kind {
                    RowKind::Eq => a.approx_eq(&row.rhs),
                    RowKind::Geq => a.ge_tol(&row.rhs),
                }
            })
    }

    pub fn objective_at(&self, v: &[S]) -> S {
        crate::scalar::dot(&self.objective, v)
    }

    /// Dense `y^T A` over the variable columns.
    pub fn dual_activity(&self, y: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.num_vars];
        for (row, yi) in self.rows.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (j, a) in &row.coeffs {
                out[*j] = out[*j].clone() + a.clone() * yi.clone();
            }
        }
        out
    }

    /// Same problem with the objective negated.
    pub fn negated(&self) -> Self {
        Self {
            num_vars: self.num_vars,
            objective: self.objective.iter().map(|c| -c.clone()).collect(),
            rows: self.rows.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Infeasibility certificate: `y^T A <= 0` on every column, `y >= 0` on `>=`
/// rows, and `y^T b > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasRay<S = Rational> {
    pub y: Vec<S>,
}

impl<S: Scalar> FarkasRay<S> {
    pub fn certifies(&self, p: &LpProblem<S>) -> bool {
        if self.y.len() != p.rows.len() {
            return false;
        }
        let signs_ok = p
            .rows
            .iter()
            .zip(&self.y)
            .all(|(row, y)| row.kind == RowKind::Eq || !y.is_neg());
        let cols_ok = p.dual_activity(&self.y).iter().all(|v| !v.is_pos());
        let rhs = p
            .rows
            .iter()
            .zip(&self.y)
            .fold(S::zero(), |acc, (row, y)| acc + row.rhs.clone() * y.clone());
        signs_ok && cols_ok && rhs.is_pos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S = Rational> {
    pub status: LpStatus,
    pub primal: Vec<S>,
    pub duals: Vec<S>,
    pub objective_value: Option<S>,
    pub farkas: Option<FarkasRay<S>>,
}

impl<S: Scalar> LpSolution<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Checks primal feasibility, dual feasibility, complementary slackness and
    /// equal objectives of a minimization result.
    pub fn verify(&self, p: &LpProblem<S>) -> bool {
        match self.status {
            LpStatus::Optimal => {
                let Some(value) = &self.objective_value else {
                    return false;
                };
                if !p.is_feasible_point(&self.primal) || self.duals.len() != p.rows.len() {
                    return false;
                }
                let reduced: Vec<S> = p
                    .dual_activity(&self.duals)
                    .into_iter()
                    .zip(&p.objective)
                    .map(|(ya, c)| c.clone() - ya)
                    .collect();
                let dual_ok = reduced.iter().all(|r| !r.is_neg())
                    && p
                        .rows
                        .iter()
                        .zip(&self.duals)
                        .all(|(row, y)| row.kind == RowKind::Eq || !y.is_neg());
                let cs_cols = reduced
                    .iter()
                    .zip(&self.primal)
                    .all(|(r, x)| (r.clone() * x.clone()).is_zero_tol());
                let cs_rows = p.rows.iter().zip(&self.duals).all(|(row, y)| {
                    (y.clone() * (row.activity(&self.primal) - row.rhs.clone())).is_zero_tol()
                });
                let dual_value = p
                    .rows
                    .iter()
                    .zip(&self.duals)
                    .fold(S::zero(), |acc, (row, y)| acc + row.rhs.clone() * y.clone());
                dual_ok
                    && cs_cols
                    && cs_rows
                    && p.objective_at(&self.primal).approx_eq(value)
                    && dual_value.approx_eq(value)
            }
            LpStatus::Infeasible => self.farkas.as_ref().is_some_and(|f| f.certifies(p)),
            LpStatus::Unbounded => true,
        }
    }
}

/// Phase-one outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<S = Rational> {
    Feasible(Vec<S>),
    Infeasible(FarkasRay<S>),
}

impl<S> Feasibility<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Minimizes the problem.
pub fn solve<S: Scalar>(p: &LpProblem<S>) -> LpSolution<S> {
    let mut t = Tableau::build(p);
    if let Some(ray) = t.phase_one() {
        return LpSolution {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            duals: Vec::new(),
            objective_value: None,
            farkas: Some(ray),
        };
    }
    if !t.phase_two(&p.objective) {
        return LpSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            duals: Vec::new(),
            objective_value: None,
            farkas: None,
        };
    }
    LpSolution {
        status: LpStatus::Optimal,
        primal: t.primal(),
        duals: t.duals_phase_two(),
        objective_value: Some(-t.obj[t.rhs_col()].clone()),
        farkas: None,
    }
}

/// Maximizes the problem. Duals are those of the negated minimization, negated
/// back, so `>=` multipliers are nonpositive and `value = y^T b`.
pub fn solve_max<S: Scalar>(p: &LpProblem<S>) -> LpSolution<S> {
    let mut sol = solve(&p.negated());
    if sol.is_optimal() {
        sol.objective_value = sol.objective_value.map(|v| -v);
        sol.duals = sol.duals.into_iter().map(|y| -y).collect();
    }
    sol
}

/// Runs phase one only.
pub fn feasible<S: Scalar>(p: &LpProblem<S>) -> Feasibility<S> {
    let mut t = Tableau::build(p);
    match t.phase_one() {
        Some(ray) => Feasibility::Infeasible(ray),
        None => Feasibility::Feasible(t.primal()),
    }
}

/// Columns: structural, then one surplus per `>=` row, then one artificial per row.
struct Tableau<S> {
    rows: Vec<Vec<S>>,
    obj: Vec<S>,
    basis: Vec<usize>,
    sign: Vec<bool>,
    num_vars: usize,
    first_art: usize,
}

impl<S: Scalar> Tableau<S> {
    fn build(p: &LpProblem<S>) -> Self {
        let m = p.rows.len();
        let num_surplus = p.rows.iter().filter(|r| r.kind == RowKind::Geq).count();
        let first_art = p.num_vars + num_surplus;
        let width = first_art + m + 1;
        let mut rows = Vec::with_capacity(m);
        let mut sign = Vec::with_capacity(m);
        let mut surplus = p.num_vars;
        for (i, row) in p.rows.iter().enumerate() {
            let mut dense = vec![S::zero(); width];
            for (j, a) in &row.coeffs {
                dense[*j] = dense[*j].clone() + a.clone();
            }
            if row.kind == RowKind::Geq {
                dense[surplus] = -S::one();
                surplus += 1;
            }
            dense[width - 1] = row.rhs.clone();
            let flip = row.rhs.is_negative();
            if flip {
                for v in dense.iter_mut() {
                    *v = -v.clone();
                }
            }
            dense[first_art + i] = S::one();
            rows.push(dense);
            sign.push(flip);
        }
        Self {
            rows,
            obj: vec![S::zero(); width],
            basis: (first_art..first_art + m).collect(),
            sign,
            num_vars: p.num_vars,
            first_art,
        }
    }

    fn rhs_col(&self) -> usize {
        self.obj.len() - 1
    }

    /// Loads an objective given per column and prices out the basis.
    fn load_objective(&mut self, costs: &[S]) {
        self.obj = costs.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = costs[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (o, v) in self.obj.iter_mut().zip(&self.rows[r]) {
                if !v.is_zero() {
                    *o = o.clone() - cb.clone() * v.clone();
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = S::one() / self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        self.rows[r][c] = S::one();
        let support: Vec<usize> = (0..self.rows[r].len())
            .filter(|&k| !self.rows[r][k].is_zero())
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |target: &mut Vec<S>| {
            let f = target[c].clone();
            if f.is_zero() {
                return;
            }
            for &k in &support {
                target[k] = target[k].clone() - f.clone() * pivot_row[k].clone();
                if !S::EXACT && target[k].is_zero_tol() {
                    target[k] = S::zero();
                }
            }
            target[c] = S::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Bland's rule on columns `< limit`. Returns false on unboundedness.
    fn optimize(&mut self, limit: usize) -> bool {
        let rhs = self.rhs_col();
        loop {
            let Some(enter) = (0..limit).find(|&j| self.obj[j].is_neg()) else {
                return true;
            };
            let mut leave: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_pos() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((li, best)) => match ratio.cmp_tol(best) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Equal => self.basis[i] < self.basis[*li],
                        std::cmp::Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    /// Returns a Farkas ray when the problem is infeasible.
    fn phase_one(&mut self) -> Option<FarkasRay<S>> {
        let width = self.obj.len();
        let mut costs = vec![S::zero(); width];
        for c in costs.iter_mut().take(width - 1).skip(self.first_art) {
            *c = S::one();
        }
        self.load_objective(&costs);
        let bounded = self.optimize(width - 1);
        debug_assert!(bounded, "phase one is bounded below by zero");
        let infeasibility = -self.obj[self.rhs_col()].clone();
        if infeasibility.is_pos() {
            // Reduced cost of artificial i is 1 - y'_i.
            let y = (0..self.rows.len())
                .map(|i| {
                    let yi = S::one() - self.obj[self.first_art + i].clone();
                    if self.sign[i] {
                        -yi
                    } else {
                        yi
                    }
                })
                .collect();
            return Some(FarkasRay { y });
        }
        self.expel_artificials();
        None
    }

    /// Pivots zero-valued artificials out of the basis where possible. Rows
    /// with no nonzero real column are redundant and keep their artificial.
    fn expel_artificials(&mut self) {
        for r in 0..self.rows.len() {
            if self.basis[r] < self.first_art {
                continue;
            }
            if let Some(c) = (0..self.first_art).find(|&c| !self.rows[r][c].is_zero_tol()) {
                self.pivot(r, c);
            }
        }
    }

    fn phase_two(&mut self, objective: &[S]) -> bool {
        let mut costs = vec![S::zero(); self.obj.len()];
        costs[..self.num_vars].clone_from_slice(objective);
        self.load_objective(&costs);
        self.optimize(self.first_art)
    }

    fn primal(&self) -> Vec<S> {
        let mut x = vec![S::zero(); self.num_vars];
        let rhs = self.rhs_col();
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rows[r][rhs].clone();
            }
        }
        x
    }

    /// Reduced cost of artificial i is -y'_i in phase two.
    fn duals_phase_two(&self) -> Vec<S> {
        (0..self.rows.len())
            .map(|i| {
                let yi = -self.obj[self.first_art + i].clone();
                if self.sign[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn single_lower_bound() {
        let mut p = LpProblem::new(1);
        p.set_objective(vec![int(1)]);
        p.add_geq(vec![(0, int(1))], int(3));
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.primal, vec![int(3)]);
        assert_eq!(s.objective_value, Some(int(3)));
        assert_eq!(s.duals, vec![int(1)]);
        assert!(s.verify(&p));
    }

    #[test]
    fn contradictory_equalities() {
        let mut p: LpProblem = LpProblem::new(1);
        p.add_eq(vec![(0, int(1))], int(1));
        p.add_eq(vec![(0, int(1))], int(2));
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(s.farkas.as_ref().unwrap().certifies(&p));
        assert!(s.verify(&p));
    }

    #[test]
    fn negative_target() {
        let mut p: LpProblem = LpProblem::new(1);
        p.add_eq(vec![(0, int(1))], int(-1));
        match feasible(&p) {
            Feasibility::Infeasible(ray) => assert!(ray.certifies(&p)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn empty_constraints_are_feasible_at_origin() {
        let p: LpProblem = LpProblem::new(3);
        assert_eq!(feasible(&p), Feasibility::Feasible(vec![int(0); 3]));
        let s = solve(&p);
        assert_eq!(s.objective_value, Some(int(0)));
    }

    #[test]
    fn unbounded_direction() {
        let mut p: LpProblem = LpProblem::new(2);
        p.set_objective(vec![int(-1), int(0)]);
        p.add_geq(vec![(0, int(1)), (1, int(-1))], int(0));
        assert_eq!(solve(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_keep_duals_consistent() {
        let mut p: LpProblem = LpProblem::new(2);
        p.set_objective(vec![int(1), int(2)]);
        p.add_eq(vec![(0, int(1)), (1, int(1))], int(1));
        p.add_eq(vec![(0, int(2)), (1, int(2))], int(2));
        let s = solve(&p);
        assert_eq!(s.objective_value, Some(int(1)));
        assert!(s.verify(&p));
    }

    #[test]
    fn maximization() {
        let mut p: LpProblem = LpProblem::new(2);
        p.set_objective(vec![int(3), int(2)]);
        p.add_leq(vec![(0, int(1)), (1, int(1))], int(4));
        p.add_leq(vec![(0, int(1)), (1, int(3))], int(6));
        p.add_leq(vec![(0, int(1))], int(3));
        let s = solve_max(&p);
        assert_eq!(s.objective_value, Some(int(11)));
        assert_eq!(s.primal, vec![int(3), int(1)]);
    }

    #[test]
    fn beale_cycling_instance_terminates() {
        // Classic degenerate instance on which the largest-coefficient rule cycles.
        let mut p: LpProblem = LpProblem::new(4);
        p.set_objective(vec![rat(-3, 4), int(150), rat(-1, 50), int(6)]);
        p.add_leq(vec![(0, rat(1, 4)), (1, int(-60)), (2, rat(-1, 25)), (3, int(9))], int(0));
        p.add_leq(vec![(0, rat(1, 2)), (1, int(-90)), (2, rat(-1, 50)), (3, int(3))], int(0));
        p.add_leq(vec![(2, int(1))], int(1));
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective_value, Some(rat(-1, 20)));
        assert!(s.verify(&p));
    }

    #[test]
    fn float_mode_matches() {
        let mut p: LpProblem<f64> = LpProblem::new(2);
        p.set_objective(vec![1.0, 1.0]);
        p.add_geq(vec![(0, 1.0), (1, 2.0)], 3.0);
        p.add_geq(vec![(0, 3.0), (1, 1.0)], 4.0);
        let s = solve(&p);
        assert!((s.objective_value.unwrap() - 2.0).abs() < 1e-12);
        assert!(s.verify(&p));
    }

    fn small_problem() -> impl Strategy<Value = LpProblem> {
        let coef = -3i64..=3;
        (
            prop::collection::vec(0i64..=5, 4),
            prop::collection::vec((prop::collection::vec(coef, 4), -4i64..=6, any::<bool>()), 1..4),
        )
            .prop_map(|(obj, rows)| {
                let mut p = LpProblem::new(4);
                p.set_objective(obj.into_iter().map(int).collect());
                for (coeffs, rhs, eq) in rows {
                    let c = coeffs.into_iter().enumerate().map(|(j, a)| (j, int(a))).collect();
                    if eq {
                        p.add_eq(c, int(rhs));
                    } else {
                        p.add_geq(c, int(rhs));
                    }
                }
                p
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn every_outcome_is_certified(p in small_problem()) {
            let s = solve(&p);
            prop_assert!(s.status != LpStatus::Unbounded);
            prop_assert!(s.verify(&p));
            prop_assert_eq!(feasible(&p).is_feasible(), s.is_optimal());
        }
    }
}

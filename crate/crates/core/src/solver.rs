//! Minimum-cost simultaneous transport in kernel variables.
//!
//! The kernel LP has one variable `kappa(i, k)` per source/target pair, stored
//! at column `i * m + k`. Rows `0..n` force each kernel row to sum to one and
//! row `n + j * m + k` asks the pushforward of component `j` to cover
//! `nu_j({y_k})`.

use crate::error::{Error, Result};
use crate::measures::{DiscreteVectorMeasure, ReferenceMeasure};
use crate::ratlp::{self, FarkasRay, LpProblem, LpSolution, LpStatus, RowKind};
use crate::scalar::{Extended, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostKind {
    Custom,
    /// `|x - y|^p` for Euclidean distance on coordinates.
    EuclideanPow(String),
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<S = Rational> {
    entries: Vec<Vec<S>>,
    pub kind: CostKind,
}

impl<S: Scalar> CostMatrix<S> {
    pub fn new(entries: Vec<Vec<S>>) -> Result<Self> {
        let m = entries.first().map_or(0, Vec::len);
        if entries.is_empty() || m == 0 {
            return Err(Error::InvalidInput("cost matrix is empty".into()));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "cost row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(k) = row.iter().position(|c| c.is_neg()) {
                return Err(Error::InvalidInput(format!("negative cost at ({i}, {k})")));
            }
        }
        Ok(Self {
            entries,
            kind: CostKind::Custom,
        })
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(usize, usize) -> S) -> Result<Self> {
        Self::new((0..n).map(|i| (0..m).map(|k| f(i, k)).collect()).collect())
    }

    /// `|x - y|` on scalar coordinates.
    pub fn absolute(xs: &[Rational], ys: &[Rational]) -> Result<Self> {
        let mut c = Self::from_fn(xs.len(), ys.len(), |i, k| {
            S::from_rational(&num::Signed::abs(&(&xs[i] - &ys[k])))
        })?;
        c.kind = CostKind::Absolute;
        Ok(c)
    }

    /// `(x - y)^2` on scalar coordinates.
    pub fn squared(xs: &[Rational], ys: &[Rational]) -> Result<Self> {
        let mut c = Self::from_fn(xs.len(), ys.len(), |i, k| {
            let d = &xs[i] - &ys[k];
            S::from_rational(&(&d * &d))
        })?;
        c.kind = CostKind::EuclideanPow("2".into());
        Ok(c)
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn get(&self, i: usize, k: usize) -> &S {
        &self.entries[i][k]
    }

    pub fn entries(&self) -> &[Vec<S>] {
        &self.entries
    }

    pub fn row_min(&self, i: usize) -> S {
        self.entries[i]
            .iter()
            .skip(1)
            .fold(self.entries[i][0].clone(), |a, b| {
                if *b < a {
                    b.clone()
                } else {
                    a
                }
            })
    }
}

/// Row-stochastic matrix from the source support to the target support.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportKernel<S = Rational> {
    pub rows: Vec<Vec<S>>,
}

impl<S: Scalar> TransportKernel<S> {
    pub fn from_lp(primal: &[S], n: usize, m: usize) -> Self {
        Self {
            rows: (0..n).map(|i| primal[i * m..(i + 1) * m].to_vec()).collect(),
        }
    }

    pub fn is_row_stochastic(&self) -> bool {
        self.rows.iter().all(|row| {
            row.iter().all(|v| !v.is_neg()) && crate::scalar::sum(row).approx_eq(&S::one())
        })
    }

    /// `pushforward[j][k] = sum_i mu_j({x_i}) kappa(i, k)`.
    pub fn pushforward(&self, mu: &DiscreteVectorMeasure<S>) -> Vec<Vec<S>> {
        let m = self.rows.first().map_or(0, Vec::len);
        mu.weights()
            .iter()
            .map(|w| {
                (0..m)
                    .map(|k| {
                        w.iter()
                            .zip(&self.rows)
                            .fold(S::zero(), |acc, (a, row)| acc + a.clone() * row[k].clone())
                    })
                    .collect()
            })
            .collect()
    }

    /// Row-stochastic and covering `nu` componentwise.
    pub fn covers(&self, mu: &DiscreteVectorMeasure<S>, nu: &DiscreteVectorMeasure<S>) -> bool {
        self.rows.len() == mu.len()
            && self.rows.iter().all(|r| r.len() == nu.len())
            && self.is_row_stochastic()
            && self
                .pushforward(mu)
                .iter()
                .zip(nu.weights())
                .all(|(push, target)| push.iter().zip(target).all(|(p, t)| p.ge_tol(t)))
    }

    /// Pushforward equals `nu` exactly.
    pub fn transports_exactly(
        &self,
        mu: &DiscreteVectorMeasure<S>,
        nu: &DiscreteVectorMeasure<S>,
    ) -> bool {
        self.covers(mu, nu)
            && self
                .pushforward(mu)
                .iter()
                .zip(nu.weights())
                .all(|(push, target)| crate::scalar::vec_approx_eq(push, target))
    }

    /// `sum_{i,k} eta(i) kappa(i, k) c(i, k)`.
    pub fn cost(&self, eta: &[S], cost: &CostMatrix<S>) -> S {
        let mut total = S::zero();
        for (i, row) in self.rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if !v.is_zero() && !eta[i].is_zero() {
                    total = total + eta[i].clone() * v.clone() * cost.get(i, k).clone();
                }
            }
        }
        total
    }

    /// `pi(i, k) = eta(i) kappa(i, k)`.
    pub fn plan(&self, eta: &[S]) -> Vec<Vec<S>> {
        self.rows
            .iter()
            .zip(eta)
            .map(|(row, e)| row.iter().map(|v| v.clone() * e.clone()).collect())
            .collect()
    }
}

/// A full instance: source and target tuples, reference measure and cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SotInstance<S = Rational> {
    pub mu: DiscreteVectorMeasure<S>,
    pub nu: DiscreteVectorMeasure<S>,
    pub eta: ReferenceMeasure<S>,
    pub cost: CostMatrix<S>,
}

impl<S: Scalar> SotInstance<S> {
    /// Instance with `eta = mubar`.
    pub fn with_mubar(
        mu: DiscreteVectorMeasure<S>,
        nu: DiscreteVectorMeasure<S>,
        cost: CostMatrix<S>,
    ) -> Result<Self> {
        let eta = ReferenceMeasure::mubar(&mu)?;
        Ok(Self { mu, nu, eta, cost })
    }

    pub fn solve(&self) -> Result<SotOutcome<S>> {
        solve_sot(&self.mu, &self.nu, &self.eta, &self.cost)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<S = Rational> {
    pub optimal_cost: S,
    pub kernel: TransportKernel<S>,
    pub plan: Vec<Vec<S>>,
    pub is_balanced: bool,
    /// Row multipliers of the kernel LP, in its row order.
    pub lp_duals: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SotOutcome<S = Rational> {
    Optimal(SolveResult<S>),
    Infeasible(FarkasRay<S>),
}

impl<S: Scalar> SotOutcome<S> {
    pub fn optimal_cost(&self) -> Extended<S> {
        match self {
            SotOutcome::Optimal(r) => Extended::Finite(r.optimal_cost.clone()),
            SotOutcome::Infeasible(_) => Extended::Infinite,
        }
    }

    pub fn result(&self) -> Option<&SolveResult<S>> {
        match self {
            SotOutcome::Optimal(r) => Some(r),
            SotOutcome::Infeasible(_) => None,
        }
    }

    pub fn into_result(self) -> Result<SolveResult<S>> {
        match self {
            SotOutcome::Optimal(r) => Ok(r),
            SotOutcome::Infeasible(_) => Err(Error::Infeasible),
        }
    }
}

/// Kernel LP on raw weight rows, without the measure invariants. `mu[j][i]`,
/// `nu[j][k]`, `eta[i]`, `cost[i][k]`. Coverage rows use `coverage`.
pub fn kernel_lp_from_weights<S: Scalar>(
    mu: &[Vec<S>],
    nu: &[Vec<S>],
    eta: &[S],
    cost: &[Vec<S>],
    coverage: RowKind,
) -> LpProblem<S> {
    let n = eta.len();
    let m = nu.first().map_or(0, Vec::len);
    let mut lp = LpProblem::new(n * m);
    let mut objective = vec![S::zero(); n * m];
    for i in 0..n {
        if eta[i].is_zero() {
            continue;
        }
        for k in 0..m {
            objective[i * m + k] = eta[i].clone() * cost[i][k].clone();
        }
    }
    lp.set_objective(objective);
    for i in 0..n {
        lp.add_eq((0..m).map(|k| (i * m + k, S::one())).collect(), S::one());
    }
    for (muj, nuj) in mu.iter().zip(nu) {
        for (k, target) in nuj.iter().enumerate() {
            let coeffs = (0..n)
                .filter(|&i| !muj[i].is_zero())
                .map(|i| (i * m + k, muj[i].clone()))
                .collect();
            match coverage {
                RowKind::Eq => lp.add_eq(coeffs, target.clone()),
                RowKind::Geq => lp.add_geq(coeffs, target.clone()),
            };
        }
    }
    lp
}

fn check_shapes<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch(format!(
            "source has {} components, target has {}",
            mu.dim(),
            nu.dim()
        )));
    }
    if eta.len() != mu.len() {
        return Err(Error::DimensionMismatch("eta length differs from source support".into()));
    }
    if cost.rows() != mu.len() || cost.cols() != nu.len() {
        return Err(Error::DimensionMismatch(format!(
            "cost is {}x{}, supports are {}x{}",
            cost.rows(),
            cost.cols(),
            mu.len(),
            nu.len()
        )));
    }
    Ok(())
}

/// Kernel LP of an instance with `>=` coverage rows.
pub fn kernel_lp<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<LpProblem<S>> {
    check_shapes(mu, nu, eta, cost)?;
    Ok(kernel_lp_from_weights(
        mu.weights(),
        nu.weights(),
        &eta.weights,
        cost.entries(),
        RowKind::Geq,
    ))
}

pub(crate) fn outcome_from_lp<S: Scalar>(
    sol: LpSolution<S>,
    n: usize,
    m: usize,
    eta: &[S],
    balanced: bool,
) -> SotOutcome<S> {
    match sol.status {
        LpStatus::Optimal => {
            let kernel = TransportKernel::from_lp(&sol.primal, n, m);
            let plan = kernel.plan(eta);
            SotOutcome::Optimal(SolveResult {
                optimal_cost: sol.objective_value.expect("optimal value"),
                kernel,
                plan,
                is_balanced: balanced,
                lp_duals: sol.duals,
            })
        }
        LpStatus::Infeasible => SotOutcome::Infeasible(sol.farkas.expect("farkas ray")),
        LpStatus::Unbounded => unreachable!("kernel LP objective is bounded on a compact polytope"),
    }
}

/// Minimum of `sum eta(i) kappa(i,k) c(i,k)` over kernels covering `nu`.
pub fn solve_sot<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<SotOutcome<S>> {
    let lp = kernel_lp(mu, nu, eta, cost)?;
    let sol = ratlp::solve(&lp);
    Ok(outcome_from_lp(
        sol,
        mu.len(),
        nu.len(),
        &eta.weights,
        mu.is_balanced_with(nu),
    ))
}

/// Optimal costs for targets `t * nu`, one per scale `0 < t <= 1`.
pub fn solve_sot_monotone_check<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
    scales: &[S],
) -> Result<Vec<Extended<S>>> {
    if scales.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("scales must be nondecreasing".into()));
    }
    scales
        .iter()
        .map(|t| {
            if !t.is_pos() || *t > S::one() {
                return Err(Error::InvalidInput(format!("scale {t} outside (0, 1]")));
            }
            Ok(solve_sot(mu, &nu.scaled(t)?, eta, cost)?.optimal_cost())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport<S = Rational> {
    pub is_invariant: bool,
    pub min_cost: S,
    pub max_cost: S,
}

/// Minimizes and maximizes the same cost over all feasible kernels.
pub fn decomposable_cost_check<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<InvarianceReport<S>> {
    let lp = kernel_lp(mu, nu, eta, cost)?;
    let lo = ratlp::solve(&lp);
    let hi = ratlp::solve_max(&lp);
    match (lo.objective_value, hi.objective_value) {
        (Some(min_cost), Some(max_cost)) => Ok(InvarianceReport {
            is_invariant: min_cost.approx_eq(&max_cost),
            min_cost,
            max_cost,
        }),
        _ => Err(Error::Infeasible),
    }
}

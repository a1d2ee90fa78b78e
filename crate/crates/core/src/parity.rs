//! Simultaneous transport as backward martingale transport between profile
//! laws, for costs that depend on a pair of points only through their profile
//! vectors. Injective profiles are the main case.

use crate::error::{Error, Result};
use crate::feasibility::{order_coupling_lp, verify_order_witness};
use crate::measures::{DerivativeLaw, DiscreteVectorMeasure, ReferenceMeasure};
use crate::ratlp::{self, RowKind};
use crate::scalar::{Rational, Scalar};
use crate::solver::{solve_sot, CostMatrix, TransportKernel};

/// `c(x, y)` as a function of the source atom `b` and target atom `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCost<S = Rational> {
    /// `entries[b][a]`.
    pub entries: Vec<Vec<S>>,
}

/// Coupling `r[a][b]` of target atom `a` and source atom `b` with
/// `sum_b r(a, b) z_b = m_nu(a) z'_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleCoupling<S = Rational> {
    pub r: Vec<Vec<S>>,
}

impl<S: Scalar> MartingaleCoupling<S> {
    pub fn is_valid(&self, law_mu: &DerivativeLaw<S>, law_nu: &DerivativeLaw<S>) -> bool {
        verify_order_witness(&self.r, law_mu, law_nu, RowKind::Eq)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityResult<S = Rational> {
    pub mot_value: S,
    pub coupling: MartingaleCoupling<S>,
    pub sot_value: S,
    pub equal: bool,
    pub reduced_cost: ReducedCost<S>,
}

/// Reduced cost, or `NotInjectiveProfile` when `c` varies between points
/// sharing a profile.
pub fn reduced_cost<S: Scalar>(
    law_mu: &DerivativeLaw<S>,
    law_nu: &DerivativeLaw<S>,
    cost: &CostMatrix<S>,
) -> Result<ReducedCost<S>> {
    let mut entries = Vec::with_capacity(law_mu.len());
    for xs in &law_mu.members {
        let mut row = Vec::with_capacity(law_nu.len());
        for ys in &law_nu.members {
            let value = cost.get(xs[0], ys[0]);
            let constant = xs
                .iter()
                .all(|&x| ys.iter().all(|&y| cost.get(x, y).approx_eq(value)));
            if !constant {
                return Err(Error::NotInjectiveProfile(format!(
                    "points {xs:?} and {ys:?} share profiles but the cost varies between them"
                )));
            }
            row.push(value.clone());
        }
        entries.push(row);
    }
    Ok(ReducedCost { entries })
}

/// Solves the martingale problem on the profile laws and the kernel problem
/// with `eta = mubar`, and compares the values.
pub fn parity_solve<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<ParityResult<S>> {
    if !mu.is_balanced_with(nu) {
        return Err(Error::UnbalancedInput("component totals differ".into()));
    }
    let (law_mu, law_nu) = (mu.derivative_law()?, nu.derivative_law()?);
    let hat = reduced_cost(&law_mu, &law_nu, cost)?;
    let mut lp = order_coupling_lp(&law_mu, &law_nu, RowKind::Eq)?;
    let (na, nb) = (law_nu.len(), law_mu.len());
    lp.set_objective(
        (0..na)
            .flat_map(|a| (0..nb).map(move |b| (a, b)))
            .map(|(a, b)| hat.entries[b][a].clone())
            .collect(),
    );
    let sol = ratlp::solve(&lp);
    let mot_value = sol.objective_value.clone().ok_or(Error::Infeasible)?;
    let r = (0..na).map(|a| sol.primal[a * nb..(a + 1) * nb].to_vec()).collect();
    let eta = ReferenceMeasure::mubar(mu)?;
    let sot_value = solve_sot(mu, nu, &eta, cost)?.into_result()?.optimal_cost;
    Ok(ParityResult {
        equal: mot_value.approx_eq(&sot_value),
        mot_value,
        coupling: MartingaleCoupling { r },
        sot_value,
        reduced_cost: hat,
    })
}

/// `kappa(x, y) = r(nu'(y), mu'(x)) / mubar(A) * nubar(y) / nubar(B)` where
/// `A` and `B` are the profile slices of `x` and `y`. With injective profiles
/// this is `r(nu'(y), mu'(x)) / mubar(x)`.
pub fn kernel_from_martingale<S: Scalar>(
    coupling: &MartingaleCoupling<S>,
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
) -> Result<TransportKernel<S>> {
    let (law_mu, law_nu) = (mu.derivative_law()?, nu.derivative_law()?);
    if coupling.r.len() != law_nu.len() || coupling.r.iter().any(|row| row.len() != law_mu.len()) {
        return Err(Error::DimensionMismatch("coupling shape differs from the laws".into()));
    }
    let bar_nu = nu.mubar()?;
    let mut rows = vec![vec![S::zero(); nu.len()]; mu.len()];
    for (a, ys) in law_nu.members.iter().enumerate() {
        for (b, xs) in law_mu.members.iter().enumerate() {
            let share = coupling.r[a][b].clone() / law_mu.masses[b].clone();
            for &y in ys {
                let split = share.clone() * bar_nu[y].clone() / law_nu.masses[a].clone();
                for &x in xs {
                    rows[x][y] = split.clone();
                }
            }
        }
    }
    Ok(TransportKernel { rows })
}

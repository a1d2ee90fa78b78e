//! Existence of simultaneous transports.
//!
//! Two routes are offered: the kernel LP itself, and a coupling LP between the
//! derivative laws in the (increasing) convex order. They must agree.

use crate::error::{Error, Result};
use crate::measures::{DerivativeLaw, DiscreteVectorMeasure};
use crate::ratlp::{self, FarkasRay, Feasibility, LpProblem, RowKind};
use crate::scalar::{sum, Rational, Scalar};
use crate::solver::{kernel_lp_from_weights, TransportKernel};

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<S = Rational> {
    pub feasible: bool,
    pub witness_kernel: Option<TransportKernel<S>>,
    /// `r[a][b]`: mass coupled between target atom `a` and source atom `b`.
    pub order_witness: Option<Vec<Vec<S>>>,
    pub farkas: Option<FarkasRay<S>>,
}

impl<S: Scalar> FeasibilityReport<S> {
    fn from_phase_one(
        result: Feasibility<S>,
        to_witness: impl FnOnce(Vec<S>) -> (Option<TransportKernel<S>>, Option<Vec<Vec<S>>>),
    ) -> Self {
        match result {
            Feasibility::Feasible(x) => {
                let (witness_kernel, order_witness) = to_witness(x);
                Self {
                    feasible: true,
                    witness_kernel,
                    order_witness,
                    farkas: None,
                }
            }
            Feasibility::Infeasible(ray) => Self {
                feasible: false,
                witness_kernel: None,
                order_witness: None,
                farkas: Some(ray),
            },
        }
    }
}

/// Zero-cost kernel LP used for existence.
pub fn kernel_feasibility_lp<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
) -> Result<LpProblem<S>> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch(format!(
            "source has {} components, target has {}",
            mu.dim(),
            nu.dim()
        )));
    }
    let n = mu.len();
    let zeros = vec![vec![S::zero(); nu.len()]; n];
    Ok(kernel_lp_from_weights(
        mu.weights(),
        nu.weights(),
        &vec![S::zero(); n],
        &zeros,
        RowKind::Geq,
    ))
}

/// Decides whether some kernel pushes `mu` onto a cover of `nu`.
pub fn kernel_feasible<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
) -> Result<FeasibilityReport<S>> {
    let lp = kernel_feasibility_lp(mu, nu)?;
    let (n, m) = (mu.len(), nu.len());
    Ok(FeasibilityReport::from_phase_one(ratlp::feasible(&lp), |x| {
        (Some(TransportKernel::from_lp(&x, n, m)), None)
    }))
}

/// Coupling LP over `law_nu` atoms x `law_mu` atoms with variable `r(a, b)` at
/// column `a * B + b`. Barycenter rows use `barycenter` (`Geq` for the
/// increasing convex order, `Eq` for the convex order).
pub fn order_coupling_lp<S: Scalar>(
    law_mu: &DerivativeLaw<S>,
    law_nu: &DerivativeLaw<S>,
    barycenter: RowKind,
) -> Result<LpProblem<S>> {
    if law_mu.dim() != law_nu.dim() {
        return Err(Error::DimensionMismatch("laws live in different dimensions".into()));
    }
    let (na, nb) = (law_nu.len(), law_mu.len());
    let mut lp = LpProblem::new(na * nb);
    for a in 0..na {
        lp.add_eq((0..nb).map(|b| (a * nb + b, S::one())).collect(), law_nu.masses[a].clone());
    }
    for b in 0..nb {
        lp.add_eq((0..na).map(|a| (a * nb + b, S::one())).collect(), law_mu.masses[b].clone());
    }
    for a in 0..na {
        for j in 0..law_nu.dim() {
            let coeffs = (0..nb)
                .filter(|&b| !law_mu.atoms[b][j].is_zero())
                .map(|b| (a * nb + b, law_mu.atoms[b][j].clone()))
                .collect();
            let rhs = law_nu.masses[a].clone() * law_nu.atoms[a][j].clone();
            match barycenter {
                RowKind::Eq => lp.add_eq(coeffs, rhs),
                RowKind::Geq => lp.add_geq(coeffs, rhs),
            };
        }
    }
    Ok(lp)
}

fn coupling_matrix<S: Scalar>(x: &[S], na: usize, nb: usize) -> Vec<Vec<S>> {
    (0..na).map(|a| x[a * nb..(a + 1) * nb].to_vec()).collect()
}

/// `m_mu` dominates `m_nu` in the increasing convex order.
pub fn icx_order_feasible<S: Scalar>(
    law_mu: &DerivativeLaw<S>,
    law_nu: &DerivativeLaw<S>,
) -> Result<FeasibilityReport<S>> {
    let lp = order_coupling_lp(law_mu, law_nu, RowKind::Geq)?;
    let (na, nb) = (law_nu.len(), law_mu.len());
    Ok(FeasibilityReport::from_phase_one(ratlp::feasible(&lp), |x| {
        (None, Some(coupling_matrix(&x, na, nb)))
    }))
}

/// `m_mu` dominates `m_nu` in the convex order; needs equal component totals.
pub fn cx_order_feasible<S: Scalar>(
    law_mu: &DerivativeLaw<S>,
    law_nu: &DerivativeLaw<S>,
) -> Result<FeasibilityReport<S>> {
    if !crate::scalar::vec_approx_eq(&law_mu.mean(), &law_nu.mean()) {
        return Err(Error::UnbalancedInput(
            "component totals differ between source and target".into(),
        ));
    }
    let lp = order_coupling_lp(law_mu, law_nu, RowKind::Eq)?;
    let (na, nb) = (law_nu.len(), law_mu.len());
    Ok(FeasibilityReport::from_phase_one(ratlp::feasible(&lp), |x| {
        (None, Some(coupling_matrix(&x, na, nb)))
    }))
}

/// Checks a coupling against the defining constraints of the order LP.
pub fn verify_order_witness<S: Scalar>(
    r: &[Vec<S>],
    law_mu: &DerivativeLaw<S>,
    law_nu: &DerivativeLaw<S>,
    barycenter: RowKind,
) -> bool {
    let Ok(lp) = order_coupling_lp(law_mu, law_nu, barycenter) else {
        return false;
    };
    let flat: Vec<S> = r.iter().flatten().cloned().collect();
    lp.is_feasible_point(&flat)
}

/// Kernel sending every source point to the normalized pointwise maximum of
/// the targets. Returns it when `min_j mu_j(X) >= (max_j nu_j)(Y)`.
pub fn max_dominance_witness<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
) -> Option<TransportKernel<S>> {
    let top: Vec<S> = (0..nu.len())
        .map(|k| {
            nu.column(k)
                .into_iter()
                .fold(S::zero(), crate::scalar::max_of)
        })
        .collect();
    let top_mass = sum(&top);
    let min_total = mu
        .totals()
        .into_iter()
        .reduce(|a, b| if b < a { b } else { a })?;
    if !min_total.ge_tol(&top_mass) {
        return None;
    }
    let row: Vec<S> = top.into_iter().map(|t| t / top_mass.clone()).collect();
    Some(TransportKernel {
        rows: vec![row; mu.len()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaClass {
    IncreasingLogConcave,
    DecreasingLogConvex,
    NeitherInfeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaScheduleReport {
    pub classification: SigmaClass,
    /// The necessary condition is also sufficient (three periods only).
    pub sufficient: bool,
    /// Sequences of length two fall outside the three-or-more period result.
    pub covered: bool,
}

/// Necessary condition for transporting `N(0, s_1), ..., N(0, s_{T-1})` onto
/// `N(0, s_2), ..., N(0, s_T)`. Works on standard deviations or on variances;
/// both give the same classification.
pub fn gaussian_markov_check(values: &[Rational]) -> Result<SigmaScheduleReport> {
    if values.len() < 2 {
        return Err(Error::InvalidInput("need at least two periods".into()));
    }
    if values.iter().any(|v| !v.is_pos()) {
        return Err(Error::NonPositiveSigma);
    }
    let increasing = values.windows(2).all(|w| w[0] <= w[1]);
    let decreasing = values.windows(2).all(|w| w[0] >= w[1]);
    let concave = values.windows(3).all(|w| &w[1] * &w[1] >= &w[0] * &w[2]);
    let convex = values.windows(3).all(|w| &w[1] * &w[1] <= &w[0] * &w[2]);
    let classification = if increasing && concave {
        SigmaClass::IncreasingLogConcave
    } else if decreasing && convex {
        SigmaClass::DecreasingLogConvex
    } else {
        SigmaClass::NeitherInfeasible
    };
    Ok(SigmaScheduleReport {
        classification,
        sufficient: values.len() == 3 && classification != SigmaClass::NeitherInfeasible,
        covered: values.len() >= 3,
    })
}

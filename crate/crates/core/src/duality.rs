//! Dual potentials, duality-gap certificates and equilibrium prices.

use crate::error::{Error, Result};
use crate::measures::{DiscreteVectorMeasure, ReferenceMeasure};
use crate::ratlp::{self, LpProblem, RowKind};
use crate::scalar::{Rational, Scalar};
use crate::solver::{kernel_lp, kernel_lp_from_weights, CostMatrix, TransportKernel};
use crate::twoway::slice_decomposition;

/// Potentials `phi` on the source and `psi_j` on the target with
/// `phi(x) + psi(y) . (d mu / d eta)(x) <= c(x, y)` wherever `eta(x) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate<S = Rational> {
    pub phi: Vec<S>,
    /// `psi[j][k]`.
    pub psi: Vec<Vec<S>>,
    pub dual_value: S,
    pub primal_value: S,
    pub gap: S,
    /// Unbalanced instances need `psi >= 0` for weak duality.
    pub balanced: bool,
    /// Finite LPs always attain their dual optimum.
    pub finite_lp_attainment: bool,
}

/// Dual solution in multiplier form, valid for any `eta` absolutely continuous
/// w.r.t. the normalized average: `alpha(x) + psi(y) . mu(x) <= eta(x) c(x, y)`
/// with `psi >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundCertificate<S = Rational> {
    pub alpha: Vec<S>,
    pub psi: Vec<Vec<S>>,
    pub value: S,
}

fn split_duals<S: Scalar>(duals: &[S], n: usize, m: usize, d: usize) -> (Vec<S>, Vec<Vec<S>>) {
    let alpha = duals[..n].to_vec();
    let psi = (0..d)
        .map(|j| duals[n + j * m..n + (j + 1) * m].to_vec())
        .collect();
    (alpha, psi)
}

fn target_pairing<S: Scalar>(psi: &[Vec<S>], nu: &DiscreteVectorMeasure<S>) -> S {
    psi.iter()
        .zip(nu.weights())
        .flat_map(|(p, w)| p.iter().zip(w))
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// Potentials read off the kernel LP multipliers, with a certified gap.
pub fn dual_certificate<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<DualCertificate<S>> {
    if !eta.equivalent {
        return Err(Error::ReferenceNotEquivalent);
    }
    let lp = kernel_lp(mu, nu, eta, cost)?;
    let sol = ratlp::solve(&lp);
    let primal_value = sol.objective_value.clone().ok_or(Error::Infeasible)?;
    let (n, m) = (mu.len(), nu.len());
    let (alpha, psi) = split_duals(&sol.duals, n, m, mu.dim());
    let phi: Vec<S> = (0..n)
        .map(|i| {
            if eta.weights[i].is_zero() {
                cost.row_min(i)
            } else {
                alpha[i].clone() / eta.weights[i].clone()
            }
        })
        .collect();
    let dual_value = phi
        .iter()
        .zip(&eta.weights)
        .fold(S::zero(), |acc, (p, e)| acc + p.clone() * e.clone())
        + target_pairing(&psi, nu);
    Ok(DualCertificate {
        gap: primal_value.clone() - dual_value.clone(),
        phi,
        psi,
        dual_value,
        primal_value,
        balanced: mu.is_balanced_with(nu),
        finite_lp_attainment: true,
    })
}

/// Re-checks every constraint of a certificate without touching the LP.
pub fn verify_dual_feasibility<S: Scalar>(
    cert: &DualCertificate<S>,
    mu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> bool {
    let (n, m) = (mu.len(), cost.cols());
    if cert.phi.len() != n || cert.psi.len() != mu.dim() || cert.psi.iter().any(|p| p.len() != m) {
        return false;
    }
    if !cert.balanced && cert.psi.iter().flatten().any(|v| v.is_neg()) {
        return false;
    }
    (0..n).all(|i| {
        let Some(density) = eta.density(mu, i) else {
            return false;
        };
        if eta.weights[i].is_zero() {
            return true;
        }
        (0..m).all(|k| {
            let lhs = cert.phi[i].clone()
                + (0..mu.dim()).fold(S::zero(), |acc, j| {
                    acc + cert.psi[j][k].clone() * density[j].clone()
                });
            lhs.le_tol(cost.get(i, k))
        })
    })
}

/// Multiplier-form dual optimum; exists whenever the instance is feasible.
pub fn lower_bound_certificate<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<LowerBoundCertificate<S>> {
    let lp = kernel_lp(mu, nu, eta, cost)?;
    let sol = ratlp::solve(&lp);
    if !sol.is_optimal() {
        return Err(Error::Infeasible);
    }
    let (alpha, psi) = split_duals(&sol.duals, mu.len(), nu.len(), mu.dim());
    let value = alpha.iter().fold(S::zero(), |a, b| a + b.clone()) + target_pairing(&psi, nu);
    Ok(LowerBoundCertificate { alpha, psi, value })
}

pub fn verify_lower_bound<S: Scalar>(
    cert: &LowerBoundCertificate<S>,
    mu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> bool {
    let m = cost.cols();
    if cert.psi.iter().flatten().any(|v| v.is_neg()) {
        return false;
    }
    (0..mu.len()).all(|i| {
        (0..m).all(|k| {
            let lhs = cert.alpha[i].clone()
                + (0..mu.dim()).fold(S::zero(), |acc, j| {
                    acc + cert.psi[j][k].clone() * mu.weight(j, i).clone()
                });
            lhs.le_tol(&(eta.weights[i].clone() * cost.get(i, k).clone()))
        })
    })
}

/// Scalar potentials for a two-way instance, constrained only on pairs whose
/// profiles match.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoWayDual<S = Rational> {
    pub phi: Vec<S>,
    pub psi: Vec<S>,
    pub value: S,
}

pub fn twoway_dual<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<TwoWayDual<S>> {
    let dec = slice_decomposition(mu, nu)?;
    let (n, m) = (mu.len(), nu.len());
    let (xl, yl) = dec.labels(n, m);
    let (bm, bn) = (mu.mubar()?, nu.mubar()?);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..m).map(move |k| (i, k)))
        .filter(|&(i, k)| xl[i] == yl[k])
        .collect();
    let mut lp = LpProblem::new(pairs.len());
    lp.set_objective(pairs.iter().map(|&(i, k)| cost.get(i, k).clone()).collect());
    for (i, b) in bm.iter().enumerate() {
        let coeffs = pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.0 == i)
            .map(|(v, _)| (v, S::one()))
            .collect();
        lp.add_eq(coeffs, b.clone());
    }
    for (k, b) in bn.iter().enumerate() {
        let coeffs = pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.1 == k)
            .map(|(v, _)| (v, S::one()))
            .collect();
        lp.add_eq(coeffs, b.clone());
    }
    let sol = ratlp::solve(&lp);
    let value = sol.objective_value.ok_or(Error::Infeasible)?;
    Ok(TwoWayDual {
        phi: sol.duals[..n].to_vec(),
        psi: sol.duals[n..].to_vec(),
        value,
    })
}

/// Constraint check and value recomputation for a two-way dual.
pub fn verify_twoway_dual<S: Scalar>(
    dual: &TwoWayDual<S>,
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<bool> {
    let dec = slice_decomposition(mu, nu)?;
    let (xl, yl) = dec.labels(mu.len(), nu.len());
    let feasible = (0..mu.len()).all(|i| {
        (0..nu.len()).all(|k| {
            xl[i] != yl[k] || (dual.phi[i].clone() + dual.psi[k].clone()).le_tol(cost.get(i, k))
        })
    });
    let value = crate::scalar::dot(&dual.phi, &mu.mubar()?) + crate::scalar::dot(&dual.psi, &nu.mubar()?);
    Ok(feasible && value.approx_eq(&dual.value))
}

/// Wages `w` per worker type, profits `p_j` per firm and skill, and the
/// production-maximizing matching.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumAssignment<S = Rational> {
    pub wage: Vec<S>,
    /// `profit_per_skill[j][k]`.
    pub profit_per_skill: Vec<Vec<S>>,
    pub matching: Vec<Vec<S>>,
    pub kernel: TransportKernel<S>,
    pub production_value: S,
}

impl<S: Scalar> EquilibriumAssignment<S> {
    /// `w(x) + p(y) . mu'(x) - g(x, y)` where `mu' = d mu / d eta`.
    pub fn surplus(
        &self,
        mu: &DiscreteVectorMeasure<S>,
        eta: &ReferenceMeasure<S>,
        production: &[Vec<S>],
        i: usize,
        k: usize,
    ) -> S {
        let density = eta.density(mu, i).unwrap_or_else(|| vec![S::zero(); mu.dim()]);
        self.wage[i].clone()
            + (0..mu.dim()).fold(S::zero(), |acc, j| {
                acc + self.profit_per_skill[j][k].clone() * density[j].clone()
            })
            - production[i][k].clone()
    }

    /// Stability everywhere and budget balance on matched pairs.
    pub fn is_stable(
        &self,
        mu: &DiscreteVectorMeasure<S>,
        eta: &ReferenceMeasure<S>,
        production: &[Vec<S>],
    ) -> bool {
        (0..mu.len()).all(|i| {
            (0..production[i].len()).all(|k| {
                let s = self.surplus(mu, eta, production, i, k);
                !s.is_neg() && (self.matching[i][k].is_zero_tol() || s.is_zero_tol())
            })
        })
    }
}

/// Maximizes total production over balanced transports and prices the result.
pub fn equilibrium<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    production: &[Vec<S>],
) -> Result<EquilibriumAssignment<S>> {
    if !eta.equivalent {
        return Err(Error::ReferenceNotEquivalent);
    }
    if !mu.is_balanced_with(nu) {
        return Err(Error::UnbalancedInput("equilibrium needs equal totals".into()));
    }
    let (n, m) = (mu.len(), nu.len());
    if production.len() != n || production.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch("production matrix shape".into()));
    }
    let lp = kernel_lp_from_weights(mu.weights(), nu.weights(), &eta.weights, production, RowKind::Eq);
    let sol = ratlp::solve_max(&lp);
    let production_value = sol.objective_value.clone().ok_or(Error::Infeasible)?;
    let (alpha, psi) = split_duals(&sol.duals, n, m, mu.dim());
    let wage = alpha
        .iter()
        .zip(&eta.weights)
        .map(|(a, e)| a.clone() / e.clone())
        .collect();
    let kernel = TransportKernel::from_lp(&sol.primal, n, m);
    Ok(EquilibriumAssignment {
        wage,
        profit_per_skill: psi,
        matching: kernel.plan(&eta.weights),
        kernel,
        production_value,
    })
}

//! Two-way instances, where the source and target profile laws coincide.
//!
//! Every feasible kernel then maps each profile slice of the source into the
//! slice of the target with the same profile, so the problem splits into one
//! classic transport problem per slice.

use num::Zero;

use crate::error::{Error, Result};
use crate::measures::{single_linkage, sup_dist, DiscreteVectorMeasure};
use crate::ratlp::{self, LpProblem, RowKind};
use crate::scalar::{as_usize, pow_usize, sum, vec_approx_eq, Rational, Scalar, FLOAT_TOL};
use crate::solver::{kernel_lp_from_weights, CostKind, CostMatrix, TransportKernel};

#[derive(Debug, Clone, PartialEq)]
pub struct Slice<S = Rational> {
    /// Common profile vector.
    pub z: Vec<S>,
    /// Normalized-average mass of the slice, equal on both sides.
    pub mass: S,
    pub x_members: Vec<usize>,
    pub y_members: Vec<usize>,
    /// Conditional probabilities on `x_members` / `y_members`.
    pub mu_z: Vec<S>,
    pub nu_z: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceDecomposition<S = Rational> {
    pub slices: Vec<Slice<S>>,
}

impl<S: Scalar> SliceDecomposition<S> {
    /// Slice index of every source and target point.
    pub fn labels(&self, n: usize, m: usize) -> (Vec<usize>, Vec<usize>) {
        let mut xs = vec![usize::MAX; n];
        let mut ys = vec![usize::MAX; m];
        for (s, slice) in self.slices.iter().enumerate() {
            for &i in &slice.x_members {
                xs[i] = s;
            }
            for &k in &slice.y_members {
                ys[k] = s;
            }
        }
        (xs, ys)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassCheck<S = Rational> {
    Same(SliceDecomposition<S>),
    Different(String),
}

/// Compares the profile laws of `mu` and `nu` and pairs up their slices.
pub fn same_class<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
) -> Result<ClassCheck<S>> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch("component counts differ".into()));
    }
    let (pm, pn) = (mu.derivative_profile()?, nu.derivative_profile()?);
    let (bm, bn) = (mu.mubar()?, nu.mubar()?);
    let groups: Vec<(Vec<usize>, Vec<usize>)> = if S::EXACT {
        let lm = mu.derivative_law()?;
        let ln = nu.derivative_law()?;
        let mut out = Vec::new();
        for (atom, members) in lm.atoms.iter().zip(&lm.members) {
            let ys = ln.find(atom).map(|a| ln.members[a].clone()).unwrap_or_default();
            out.push((members.clone(), ys));
        }
        for (atom, members) in ln.atoms.iter().zip(&ln.members) {
            if lm.find(atom).is_none() {
                out.push((Vec::new(), members.clone()));
            }
        }
        out
    } else {
        let n = mu.len();
        let all: Vec<Vec<S>> = pm.vectors.iter().chain(&pn.vectors).cloned().collect();
        let clusters = single_linkage(&all);
        for (c, members) in clusters.iter().enumerate() {
            for (d, others) in clusters.iter().enumerate() {
                if c == d {
                    continue;
                }
                for &a in members {
                    for &b in others {
                        if sup_dist(&all[a], &all[b]) <= 2.0 * FLOAT_TOL {
                            return Err(Error::AmbiguousGrouping(format!(
                                "profiles of points {a} and {b} are within twice the tolerance"
                            )));
                        }
                    }
                }
            }
        }
        clusters
            .into_iter()
            .map(|members| {
                let (xs, ys): (Vec<usize>, Vec<usize>) = members.into_iter().partition(|&p| p < n);
                (xs, ys.into_iter().map(|p| p - n).collect())
            })
            .collect()
    };

    let mut slices = Vec::with_capacity(groups.len());
    for (xs, ys) in groups {
        if xs.is_empty() || ys.is_empty() {
            let side = if xs.is_empty() { "target" } else { "source" };
            return Ok(ClassCheck::Different(format!(
                "a {side} profile has no counterpart on the other side"
            )));
        }
        let mass_x = xs.iter().fold(S::zero(), |a, &i| a + bm[i].clone());
        let mass_y = ys.iter().fold(S::zero(), |a, &k| a + bn[k].clone());
        if !mass_x.approx_eq(&mass_y) {
            return Ok(ClassCheck::Different(format!(
                "slice masses differ: {mass_x} versus {mass_y}"
            )));
        }
        let z = pm.vectors[xs[0]].clone();
        debug_assert!(vec_approx_eq(&z, &pn.vectors[ys[0]]) || !S::EXACT);
        let mu_z = xs.iter().map(|&i| bm[i].clone() / mass_x.clone()).collect();
        let nu_z = ys.iter().map(|&k| bn[k].clone() / mass_y.clone()).collect();
        slices.push(Slice {
            z,
            mass: mass_x,
            x_members: xs,
            y_members: ys,
            mu_z,
            nu_z,
        });
    }
    Ok(ClassCheck::Same(SliceDecomposition { slices }))
}

/// Slice decomposition or `NotTwoWay`.
pub fn slice_decomposition<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
) -> Result<SliceDecomposition<S>> {
    match same_class(mu, nu)? {
        ClassCheck::Same(d) => Ok(d),
        ClassCheck::Different(why) => Err(Error::NotTwoWay(why)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeResult<S = Rational> {
    pub total: S,
    pub per_slice: Vec<S>,
    pub kernel: TransportKernel<S>,
}

fn check_cost<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<()> {
    if cost.rows() != mu.len() || cost.cols() != nu.len() {
        return Err(Error::DimensionMismatch("cost shape differs from supports".into()));
    }
    Ok(())
}

/// Solves one classic transport problem per slice and assembles the
/// block-diagonal kernel.
pub fn decompose_solve<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<DecomposeResult<S>> {
    check_cost(mu, nu, cost)?;
    let dec = slice_decomposition(mu, nu)?;
    let mut kernel = vec![vec![S::zero(); nu.len()]; mu.len()];
    let mut per_slice = Vec::with_capacity(dec.slices.len());
    let mut total = S::zero();
    for slice in &dec.slices {
        let sub: Vec<Vec<S>> = slice
            .x_members
            .iter()
            .map(|&i| slice.y_members.iter().map(|&k| cost.get(i, k).clone()).collect())
            .collect();
        let lp = kernel_lp_from_weights(
            std::slice::from_ref(&slice.mu_z),
            std::slice::from_ref(&slice.nu_z),
            &slice.mu_z,
            &sub,
            RowKind::Geq,
        );
        let sol = ratlp::solve(&lp);
        let value = sol.objective_value.clone().ok_or(Error::Infeasible)?;
        let my = slice.y_members.len();
        for (a, &i) in slice.x_members.iter().enumerate() {
            for (b, &k) in slice.y_members.iter().enumerate() {
                kernel[i][k] = sol.primal[a * my + b].clone();
            }
        }
        total = total + slice.mass.clone() * value.clone();
        per_slice.push(value);
    }
    Ok(DecomposeResult {
        total,
        per_slice,
        kernel: TransportKernel { rows: kernel },
    })
}

/// Checks `c(x,y) + c(x',y') <= c(x,y') + c(x',y)` for all `x <= x'`, `y <= y'`.
pub fn check_submodular<S: Scalar>(
    xs: &[Rational],
    ys: &[Rational],
    cost: &CostMatrix<S>,
) -> Result<()> {
    for i in 0..xs.len() {
        for i2 in 0..xs.len() {
            if i == i2 || xs[i] > xs[i2] {
                continue;
            }
            for k in 0..ys.len() {
                for k2 in 0..ys.len() {
                    if k == k2 || ys[k] > ys[k2] {
                        continue;
                    }
                    let lhs = cost.get(i, k).clone() + cost.get(i2, k2).clone();
                    let rhs = cost.get(i, k2).clone() + cost.get(i2, k).clone();
                    if !lhs.le_tol(&rhs) {
                        return Err(Error::NotSubmodular(format!(
                            "points ({i}, {i2}) against ({k}, {k2})"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Quantile coupling of two probability vectors given in sorted order.
fn north_west_corner<S: Scalar>(a: &[S], b: &[S]) -> Vec<(usize, usize, S)> {
    let mut out = Vec::new();
    let (mut i, mut k) = (0, 0);
    let mut ra = a.first().cloned().unwrap_or_else(S::zero);
    let mut rb = b.first().cloned().unwrap_or_else(S::zero);
    while i < a.len() && k < b.len() {
        let q = if ra <= rb { ra.clone() } else { rb.clone() };
        if !q.is_zero_tol() {
            out.push((i, k, q.clone()));
        }
        ra = ra - q.clone();
        rb = rb - q;
        if ra.is_zero_tol() {
            i += 1;
            ra = a.get(i).cloned().unwrap_or_else(S::zero);
        }
        if rb.is_zero_tol() {
            k += 1;
            rb = b.get(k).cloned().unwrap_or_else(S::zero);
        }
    }
    out
}

/// Closed-form solution for submodular costs on the line: comonotone
/// coupling within each slice, no LP.
pub fn comonotone_solve<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<DecomposeResult<S>> {
    check_cost(mu, nu, cost)?;
    let dec = slice_decomposition(mu, nu)?;
    let xs = mu.scalar_coords()?;
    let ys = nu.scalar_coords()?;
    check_submodular(&xs, &ys, cost)?;
    let mut kernel = vec![vec![S::zero(); nu.len()]; mu.len()];
    let mut per_slice = Vec::with_capacity(dec.slices.len());
    let mut total = S::zero();
    for slice in &dec.slices {
        let mut xo: Vec<usize> = (0..slice.x_members.len()).collect();
        xo.sort_by(|&a, &b| xs[slice.x_members[a]].cmp(&xs[slice.x_members[b]]).then(a.cmp(&b)));
        let mut yo: Vec<usize> = (0..slice.y_members.len()).collect();
        yo.sort_by(|&a, &b| ys[slice.y_members[a]].cmp(&ys[slice.y_members[b]]).then(a.cmp(&b)));
        let a: Vec<S> = xo.iter().map(|&p| slice.mu_z[p].clone()).collect();
        let b: Vec<S> = yo.iter().map(|&p| slice.nu_z[p].clone()).collect();
        let mut value = S::zero();
        for (p, q, mass) in north_west_corner(&a, &b) {
            let i = slice.x_members[xo[p]];
            let k = slice.y_members[yo[q]];
            value = value + mass.clone() * cost.get(i, k).clone();
            kernel[i][k] = kernel[i][k].clone() + mass / a[p].clone();
        }
        total = total + slice.mass.clone() * value.clone();
        per_slice.push(value);
    }
    Ok(DecomposeResult {
        total,
        per_slice,
        kernel: TransportKernel { rows: kernel },
    })
}

/// Largest normalized-average mass any feasible kernel can move between
/// mismatched slices. Zero on every two-way instance.
pub fn max_off_slice_mass<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    dec: &SliceDecomposition<S>,
) -> Result<S> {
    let (n, m) = (mu.len(), nu.len());
    let (xl, yl) = dec.labels(n, m);
    let bar = mu.mubar()?;
    let indicator: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|k| if xl[i] == yl[k] { S::zero() } else { S::one() })
                .collect()
        })
        .collect();
    let lp: LpProblem<S> =
        kernel_lp_from_weights(mu.weights(), nu.weights(), &bar, &indicator, RowKind::Geq);
    ratlp::solve_max(&lp).objective_value.ok_or(Error::Infeasible)
}

/// `rho^p` for squared distance `rho2`, exactly when it is rational.
fn exact_power(rho2: &Rational, p: &Rational) -> Option<Rational> {
    if rho2.is_zero() {
        return Some(Rational::zero());
    }
    let k = as_usize(p)?;
    if k % 2 == 0 {
        return Some(pow_usize(rho2, k / 2));
    }
    let (n, d) = (rho2.numer(), rho2.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(pow_usize(&Rational::new(sn, sd), k))
    } else {
        None
    }
}

/// `rho(x, y)^p` with Euclidean `rho` on support coordinates.
pub fn metric_cost<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    p: &Rational,
) -> Result<CostMatrix<S>> {
    if *p < Rational::from_integer(1.into()) {
        return Err(Error::InvalidInput("p must be at least 1".into()));
    }
    let coords = |m: &DiscreteVectorMeasure<S>| -> Result<Vec<Vec<Rational>>> {
        m.support()
            .iter()
            .map(|pt| {
                pt.coords
                    .clone()
                    .ok_or_else(|| Error::MissingCoords(format!("point {:?}", pt.label)))
            })
            .collect()
    };
    let (xs, ys) = (coords(mu)?, coords(nu)?);
    let dim = xs[0].len();
    if xs.iter().chain(&ys).any(|c| c.len() != dim) {
        return Err(Error::MissingCoords("coordinates have different dimensions".into()));
    }
    let mut rows = Vec::with_capacity(xs.len());
    for x in &xs {
        let mut row = Vec::with_capacity(ys.len());
        for y in &ys {
            let rho2: Rational = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            let value = if S::EXACT {
                let exact = exact_power(&rho2, p).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "distance^{p} is irrational for squared distance {rho2}; use float mode"
                    ))
                })?;
                S::from_rational(&exact)
            } else {
                S::from_f64(Scalar::to_f64(&rho2).powf(Scalar::to_f64(p) / 2.0))
            };
            row.push(value);
        }
        rows.push(row);
    }
    let mut cost = CostMatrix::new(rows)?;
    cost.kind = CostKind::EuclideanPow(p.to_string());
    Ok(cost)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WassersteinResult<S = Rational> {
    pub p: Rational,
    /// Certified `W_p^p`.
    pub power: S,
    /// `W_p`, a float for display.
    pub distance: f64,
    /// Per-slice `W_p^p` of the conditional measures.
    pub per_slice: Vec<S>,
}

/// Simultaneous Wasserstein distance between two measures in the same class.
pub fn wasserstein<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    p: &Rational,
) -> Result<WassersteinResult<S>> {
    let cost = metric_cost(mu, nu, p)?;
    let res = decompose_solve(mu, nu, &cost)?;
    let pf = Scalar::to_f64(p);
    Ok(WassersteinResult {
        p: p.clone(),
        distance: res.total.to_f64().max(0.0).powf(1.0 / pf),
        power: res.total,
        per_slice: res.per_slice,
    })
}

/// `(1 / M) sum_j OT_p(mu_j, nu_j)` with `M = sum_j mu_j(X)`: a lower bound on
/// the simultaneous `W_p^p`.
pub fn wd_lower_bound<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    p: &Rational,
) -> Result<S> {
    slice_decomposition(mu, nu)?;
    let cost = metric_cost(mu, nu, p)?;
    let mut acc = S::zero();
    for (muj, nuj) in mu.weights().iter().zip(nu.weights()) {
        let lp = kernel_lp_from_weights(
            std::slice::from_ref(muj),
            std::slice::from_ref(nuj),
            muj,
            cost.entries(),
            RowKind::Geq,
        );
        acc = acc + ratlp::solve(&lp).objective_value.ok_or(Error::Infeasible)?;
    }
    Ok(acc / sum(&mu.totals()))
}

//! Lower bounds on the optimal cost from one-dimensional transport problems.

use crate::error::{Error, Result};
use crate::measures::{DiscreteVectorMeasure, ReferenceMeasure};
use crate::ratlp::{self, RowKind};
use crate::scalar::{sum, Extended, Rational, Scalar};
use crate::solver::{kernel_lp_from_weights, CostMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    SimplexScalarization,
    PositivePart,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundDetail<S = Rational> {
    /// Weights of the best scalarization.
    Lambda(Vec<S>),
    /// Components `(i, j)` of the best positive-part pair.
    Pair(usize, usize),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<S = Rational> {
    pub kind: BoundKind,
    pub value: Extended<S>,
    pub detail: BoundDetail<S>,
    /// The bound is only guaranteed when this holds.
    pub applicable: bool,
}

/// Grid denominator used when none is given.
pub fn default_grid(d: usize) -> usize {
    match d {
        0..=2 => 8,
        3 => 4,
        _ => 2,
    }
}

/// Points of the simplex with coordinates in `(1/grid) Z`, vertices included.
pub fn simplex_grid<S: Scalar>(d: usize, grid: usize) -> Vec<Vec<S>> {
    fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            compositions(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    compositions(grid, d, &mut Vec::new(), &mut raw);
    let g = S::from_usize(grid);
    raw.into_iter()
        .map(|c| c.into_iter().map(|v| S::from_usize(v) / g.clone()).collect())
        .collect()
}

/// Optimal cost of the one-component problem, `Infinite` when infeasible.
fn scalar_value<S: Scalar>(source: &[S], target: &[S], eta: &[S], cost: &CostMatrix<S>) -> Extended<S> {
    let lp = kernel_lp_from_weights(
        std::slice::from_ref(&source.to_vec()),
        std::slice::from_ref(&target.to_vec()),
        eta,
        cost.entries(),
        RowKind::Geq,
    );
    match ratlp::solve(&lp).objective_value {
        Some(v) => Extended::Finite(v),
        None => Extended::Infinite,
    }
}

fn combine<S: Scalar>(lambda: &[S], weights: &[Vec<S>]) -> Vec<S> {
    let len = weights.first().map_or(0, Vec::len);
    (0..len)
        .map(|i| {
            lambda
                .iter()
                .zip(weights)
                .fold(S::zero(), |acc, (l, w)| acc + l.clone() * w[i].clone())
        })
        .collect()
}

fn check<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<()> {
    if mu.dim() != nu.dim() || eta.len() != mu.len() || cost.rows() != mu.len() || cost.cols() != nu.len() {
        return Err(Error::DimensionMismatch("instance shapes disagree".into()));
    }
    Ok(())
}

/// Every kernel also moves `lambda . mu` onto a cover of `lambda . nu`, so the
/// largest one-component optimum over a grid of `lambda` is a lower bound.
pub fn simplex_bound<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
    grid: usize,
) -> Result<BoundReport<S>> {
    check(mu, nu, eta, cost)?;
    if grid == 0 {
        return Err(Error::InvalidInput("grid must be positive".into()));
    }
    let mut best: Option<(Extended<S>, Vec<S>)> = None;
    for lambda in simplex_grid::<S>(mu.dim(), grid) {
        let value = scalar_value(
            &combine(&lambda, mu.weights()),
            &combine(&lambda, nu.weights()),
            &eta.weights,
            cost,
        );
        let better = best
            .as_ref()
            .is_none_or(|(b, _)| value.cmp_tol(b) == std::cmp::Ordering::Greater);
        if better {
            best = Some((value, lambda));
        }
    }
    let (value, lambda) = best.expect("grid is nonempty");
    Ok(BoundReport {
        kind: BoundKind::SimplexScalarization,
        value,
        detail: BoundDetail::Lambda(lambda),
        applicable: true,
    })
}

fn positive_part<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.clone() - y.clone();
            if d.is_pos() {
                d
            } else {
                S::zero()
            }
        })
        .collect()
}

/// Where `mu_i` exceeds `mu_j`, mass must travel to where `nu_i` exceeds
/// `nu_j`; the two directions use disjoint source points. Requires every
/// source point to have a zero-cost target, otherwise `applicable` is false.
pub fn positive_part_bound<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
) -> Result<BoundReport<S>> {
    check(mu, nu, eta, cost)?;
    if !mu.is_balanced_with(nu) {
        return Err(Error::UnbalancedInput("component totals differ".into()));
    }
    let applicable = (0..cost.rows()).all(|i| cost.row_min(i).is_zero_tol());
    let d = mu.dim();
    let term = |i: usize, j: usize| -> Extended<S> {
        let src = positive_part(&mu.weights()[i], &mu.weights()[j]);
        let dst = positive_part(&nu.weights()[i], &nu.weights()[j]);
        if !sum(&src).ge_tol(&sum(&dst)) {
            return Extended::Infinite;
        }
        scalar_value(&src, &dst, &eta.weights, cost)
    };
    let mut best = (Extended::Finite(S::zero()), BoundDetail::None);
    for i in 0..d {
        for j in i + 1..d {
            let value = match (term(i, j), term(j, i)) {
                (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
                _ => Extended::Infinite,
            };
            if value.cmp_tol(&best.0) == std::cmp::Ordering::Greater {
                best = (value, BoundDetail::Pair(i, j));
            }
        }
    }
    Ok(BoundReport {
        kind: BoundKind::PositivePart,
        value: best.0,
        detail: best.1,
        applicable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::{int, rat};
    use crate::solver::solve_sot;

    fn optimum(mu: &DiscreteVectorMeasure, nu: &DiscreteVectorMeasure, cost: &CostMatrix) -> Rational {
        let eta = ReferenceMeasure::mubar(mu).unwrap();
        solve_sot(mu, nu, &eta, cost).unwrap().into_result().unwrap().optimal_cost
    }

    #[test]
    fn grid_contains_vertices() {
        let g: Vec<Vec<Rational>> = simplex_grid(3, 2);
        assert_eq!(g.len(), 6);
        assert!(g.contains(&vec![int(0), int(0), int(1)]));
        assert!(g.contains(&vec![rat(1, 2), int(0), rat(1, 2)]));
    }

    #[test]
    fn one_component_bound_is_exact() {
        let xs = [int(0), int(1), int(3)];
        let mu = DiscreteVectorMeasure::from_weights(vec![vec![rat(1, 2), rat(1, 4), rat(1, 4)]]).unwrap();
        let nu = DiscreteVectorMeasure::from_weights(vec![vec![rat(1, 4), rat(1, 4), rat(1, 2)]]).unwrap();
        let cost = CostMatrix::absolute(&xs, &xs).unwrap();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let b = simplex_bound(&mu, &nu, &eta, &cost, 8).unwrap();
        assert_eq!(b.value, Extended::Finite(optimum(&mu, &nu, &cost)));
    }

    #[test]
    fn disjoint_supports_are_sharp() {
        let (mu, nu, cost) = fixtures::disjoint_supports();
        let opt = Extended::Finite(optimum(&mu, &nu, &cost));
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        assert_eq!(simplex_bound(&mu, &nu, &eta, &cost, 8).unwrap().value, opt);
        let pp = positive_part_bound(&mu, &nu, &eta, &cost).unwrap();
        assert!(pp.applicable);
        assert_eq!(pp.value, opt);
    }

    #[test]
    fn strict_gap_for_scalarization() {
        let (mu, nu, cost) = fixtures::strict_gap();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let opt = optimum(&mu, &nu, &cost);
        let b = simplex_bound(&mu, &nu, &eta, &cost, 16).unwrap();
        assert!(b.value.finite().unwrap() < &opt);
    }

    #[test]
    fn identical_tuples_give_zero() {
        let (mu, _) = fixtures::intro_feasible();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let cost = fixtures::swap_cost();
        let pp = positive_part_bound(&mu, &mu, &eta, &cost).unwrap();
        assert_eq!(pp.value, Extended::Finite(int(0)));
        assert_eq!(optimum(&mu, &mu, &cost), int(0));
    }

    #[test]
    fn mass_deficit_is_infinite() {
        let (mu, nu) = fixtures::intro_infeasible();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let pp = positive_part_bound(&mu, &nu, &eta, &fixtures::swap_cost()).unwrap();
        assert!(pp.value.is_infinite());
        assert_eq!(pp.detail, BoundDetail::Pair(0, 1));
    }
}

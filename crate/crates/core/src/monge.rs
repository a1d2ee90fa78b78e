//! Map-valued transports by depth-first search, the refugee resettlement
//! program, and the gap between map and kernel optima.

use crate::error::{Error, Result};
use crate::measures::{DiscreteVectorMeasure, ReferenceMeasure};
use crate::scalar::{Extended, Rational, Scalar};
use crate::solver::{solve_sot, CostMatrix};

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MongeAssignment<S = Rational> {
    /// Target index per source point; `None` means unassigned.
    pub map: Vec<Option<usize>>,
    /// Transport cost, or total score for resettlement.
    pub cost_or_value: S,
    /// `false` when the node budget ran out before the search finished.
    pub optimal: bool,
    pub nodes: u64,
}

impl<S: Scalar> MongeAssignment<S> {
    /// `sum_{i: T(i) = k} mu_j(x_i) >= nu_j(y_k)` for all `j, k`.
    pub fn covers(&self, supply: &[Vec<S>], demand: &[Vec<S>]) -> bool {
        supply.iter().zip(demand).all(|(sj, dj)| {
            dj.iter().enumerate().all(|(k, need)| {
                let got = self
                    .map
                    .iter()
                    .zip(sj)
                    .filter(|(t, _)| **t == Some(k))
                    .fold(S::zero(), |acc, (_, w)| acc + w.clone());
                got.ge_tol(need)
            })
        })
    }
}

/// Families contribute `q[i][k]` to each quota kind `k`; affiliate `l` needs at
/// least `floors[l][k]`; placing family `i` at `l` scores `scores[i][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefugeeInstance<S = Rational> {
    pub family_ids: Vec<String>,
    pub q: Vec<Vec<S>>,
    pub affiliate_ids: Vec<String>,
    pub floors: Vec<Vec<S>>,
    pub scores: Vec<Vec<S>>,
}

impl<S: Scalar> RefugeeInstance<S> {
    pub fn new(
        family_ids: Vec<String>,
        q: Vec<Vec<S>>,
        affiliate_ids: Vec<String>,
        floors: Vec<Vec<S>>,
        scores: Vec<Vec<S>>,
    ) -> Result<Self> {
        let kinds = q.first().map_or(0, Vec::len);
        if family_ids.len() != q.len() || affiliate_ids.len() != floors.len() {
            return Err(Error::DimensionMismatch("ids and quota rows differ in count".into()));
        }
        if q.iter().chain(&floors).any(|r| r.len() != kinds) {
            return Err(Error::DimensionMismatch("quota vectors differ in length".into()));
        }
        if q.iter().chain(&floors).flatten().any(|v| v.is_neg()) {
            return Err(Error::InvalidInput("quotas must be nonnegative".into()));
        }
        if scores.len() != q.len() || scores.iter().any(|r| r.len() != floors.len()) {
            return Err(Error::DimensionMismatch("scores must be families x affiliates".into()));
        }
        Ok(Self {
            family_ids,
            q,
            affiliate_ids,
            floors,
            scores,
        })
    }

    pub fn families(&self) -> usize {
        self.q.len()
    }

    pub fn affiliates(&self) -> usize {
        self.floors.len()
    }

    pub fn kinds(&self) -> usize {
        self.q.first().map_or(0, Vec::len)
    }

    /// `supply[k][i]` and `demand[k][l]`, component-major.
    pub fn as_component_weights(&self) -> (Vec<Vec<S>>, Vec<Vec<S>>) {
        let supply = (0..self.kinds())
            .map(|k| self.q.iter().map(|r| r[k].clone()).collect())
            .collect();
        let demand = (0..self.kinds())
            .map(|k| self.floors.iter().map(|r| r[k].clone()).collect())
            .collect();
        (supply, demand)
    }
}

/// Exhaustive depth-first search over maps minimizing `sum_i obj[i][T(i)]`.
/// `allow_unassigned` adds a zero-cost option that covers nothing.
struct Search<'a, S> {
    supply: &'a [Vec<S>],
    obj: &'a [Vec<S>],
    budget: u64,
    nodes: u64,
    exhausted: bool,
    residual: Vec<Vec<S>>,
    remaining: Vec<Vec<S>>,
    /// `sum_{i' >= i} min_k obj[i'][k]`.
    tail_bound: Vec<S>,
    order: Vec<Vec<Option<usize>>>,
    current: Vec<Option<usize>>,
    best: Option<(S, Vec<Option<usize>>)>,
}

impl<'a, S: Scalar> Search<'a, S> {
    fn new(
        supply: &'a [Vec<S>],
        demand: &[Vec<S>],
        obj: &'a [Vec<S>],
        allow_unassigned: bool,
        budget: u64,
    ) -> Self {
        let n = obj.len();
        let m = demand.first().map_or(0, Vec::len);
        let remaining = supply
            .iter()
            .map(|sj| {
                let mut tail = vec![S::zero(); n + 1];
                for i in (0..n).rev() {
                    tail[i] = tail[i + 1].clone() + sj[i].clone();
                }
                tail
            })
            .collect();
        let order: Vec<Vec<Option<usize>>> = obj
            .iter()
            .map(|row| {
                let mut opts: Vec<Option<usize>> = (0..m).map(Some).collect();
                if allow_unassigned {
                    opts.push(None);
                }
                let value = |t: &Option<usize>| t.map_or(S::zero(), |k| row[k].clone());
                opts.sort_by(|a, b| {
                    value(a)
                        .partial_cmp(&value(b))
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.unwrap_or(usize::MAX).cmp(&b.unwrap_or(usize::MAX)))
                });
                opts
            })
            .collect();
        let mut tail_bound = vec![S::zero(); n + 1];
        for i in (0..n).rev() {
            let best = order[i]
                .first()
                .map_or(S::zero(), |t| t.map_or(S::zero(), |k| obj[i][k].clone()));
            tail_bound[i] = tail_bound[i + 1].clone() + best;
        }
        Self {
            supply,
            obj,
            budget,
            nodes: 0,
            exhausted: false,
            residual: demand.to_vec(),
            remaining,
            tail_bound,
            order,
            current: vec![None; n],
            best: None,
        }
    }

    fn deficit_coverable(&self, depth: usize) -> bool {
        self.residual.iter().enumerate().all(|(j, rj)| {
            let need = rj
                .iter()
                .filter(|r| r.is_pos())
                .fold(S::zero(), |acc, r| acc + r.clone());
            need.le_tol(&self.remaining[j][depth])
        })
    }

    fn run(&mut self, depth: usize, cost: S) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if !self.deficit_coverable(depth) {
            return;
        }
        if let Some((best, _)) = &self.best {
            if (cost.clone() + self.tail_bound[depth].clone()).ge_tol(best) {
                return;
            }
        }
        if depth == self.obj.len() {
            self.best = Some((cost, self.current.clone()));
            return;
        }
        for t in self.order[depth].clone() {
            if let Some(k) = t {
                for (rj, sj) in self.residual.iter_mut().zip(self.supply) {
                    rj[k] = rj[k].clone() - sj[depth].clone();
                }
            }
            self.current[depth] = t;
            let step = t.map_or(S::zero(), |k| self.obj[depth][k].clone());
            self.run(depth + 1, cost.clone() + step);
            if let Some(k) = t {
                for (rj, sj) in self.residual.iter_mut().zip(self.supply) {
                    rj[k] = rj[k].clone() + sj[depth].clone();
                }
            }
            if self.exhausted {
                return;
            }
        }
    }

    fn finish(mut self) -> Result<MongeAssignment<S>> {
        self.run(0, S::zero());
        match (self.best, self.exhausted) {
            (Some((value, map)), exhausted) => Ok(MongeAssignment {
                map,
                cost_or_value: value,
                optimal: !exhausted,
                nodes: self.nodes,
            }),
            (None, true) => Err(Error::BudgetExceeded(self.budget)),
            (None, false) => Err(Error::Infeasible),
        }
    }
}

/// Cheapest map `T` with `mu_j o T^-1 >= nu_j`, cost `sum_i eta(i) c(i, T(i))`.
pub fn monge_solve<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
    node_budget: u64,
) -> Result<MongeAssignment<S>> {
    if mu.dim() != nu.dim() || cost.rows() != mu.len() || cost.cols() != nu.len() || eta.len() != mu.len() {
        return Err(Error::DimensionMismatch("instance shapes disagree".into()));
    }
    let obj: Vec<Vec<S>> = (0..mu.len())
        .map(|i| {
            (0..nu.len())
                .map(|k| eta.weights[i].clone() * cost.get(i, k).clone())
                .collect()
        })
        .collect();
    Search::new(mu.weights(), nu.weights(), &obj, false, node_budget).finish()
}

/// Highest-scoring placement meeting every quota floor; each family goes to
/// at most one affiliate.
pub fn refugee_solve<S: Scalar>(
    inst: &RefugeeInstance<S>,
    node_budget: u64,
) -> Result<MongeAssignment<S>> {
    let (supply, demand) = inst.as_component_weights();
    let obj: Vec<Vec<S>> = inst
        .scores
        .iter()
        .map(|r| r.iter().map(|v| -v.clone()).collect())
        .collect();
    let mut res = Search::new(&supply, &demand, &obj, true, node_budget).finish()?;
    res.cost_or_value = -res.cost_or_value;
    Ok(res)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MongeGap<S = Rational> {
    pub monge_cost: Extended<S>,
    pub kernel_cost: S,
    /// `monge_cost - kernel_cost`, never negative.
    pub gap: Extended<S>,
    pub monge: Option<MongeAssignment<S>>,
}

pub fn monge_gap<S: Scalar>(
    mu: &DiscreteVectorMeasure<S>,
    nu: &DiscreteVectorMeasure<S>,
    eta: &ReferenceMeasure<S>,
    cost: &CostMatrix<S>,
    node_budget: u64,
) -> Result<MongeGap<S>> {
    let kernel_cost = solve_sot(mu, nu, eta, cost)?.into_result()?.optimal_cost;
    let monge = match monge_solve(mu, nu, eta, cost, node_budget) {
        Ok(a) => Some(a),
        Err(Error::Infeasible) => None,
        Err(e) => return Err(e),
    };
    let (monge_cost, gap) = match &monge {
        Some(a) => (
            Extended::Finite(a.cost_or_value.clone()),
            Extended::Finite(a.cost_or_value.clone() - kernel_cost.clone()),
        ),
        None => (Extended::Infinite, Extended::Infinite),
    };
    Ok(MongeGap {
        monge_cost,
        kernel_cost,
        gap,
        monge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::int;

    #[test]
    fn unique_kernel_has_no_map() {
        let (mu, nu) = fixtures::unique_kernel();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let cost = fixtures::swap_cost();
        assert!(matches!(
            monge_solve(&mu, &nu, &eta, &cost, DEFAULT_NODE_BUDGET),
            Err(Error::Infeasible)
        ));
        let gap = monge_gap(&mu, &nu, &eta, &cost, DEFAULT_NODE_BUDGET).unwrap();
        assert!(gap.gap.is_infinite());
        assert_eq!(gap.kernel_cost, crate::scalar::rat(1, 2));
    }

    #[test]
    fn identity_map_on_equal_tuples() {
        let (mu, _) = fixtures::intro_feasible();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let cost = fixtures::swap_cost();
        let a = monge_solve(&mu, &mu, &eta, &cost, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(a.map, vec![Some(0), Some(1)]);
        assert_eq!(a.cost_or_value, int(0));
        assert!(a.optimal);
        let gap = monge_gap(&mu, &mu, &eta, &cost, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(gap.gap, Extended::Finite(int(0)));
    }

    #[test]
    fn tiny_budget_reports_incumbent_or_error() {
        let (mu, _) = fixtures::intro_feasible();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let cost = fixtures::swap_cost();
        assert!(matches!(
            monge_solve(&mu, &mu, &eta, &cost, 1),
            Err(Error::BudgetExceeded(1))
        ));
        let a = monge_solve(&mu, &mu, &eta, &cost, 3).unwrap();
        assert!(a.covers(mu.weights(), mu.weights()));
    }

    fn one_family(q: i64, floor: i64) -> RefugeeInstance {
        RefugeeInstance::new(
            vec!["f".into()],
            vec![vec![int(q)]],
            vec!["a".into()],
            vec![vec![int(floor)]],
            vec![vec![int(5)]],
        )
        .unwrap()
    }

    #[test]
    fn refugee_trivial_cases() {
        let a = refugee_solve(&one_family(2, 1), DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(a.map, vec![Some(0)]);
        assert_eq!(a.cost_or_value, int(5));
        assert!(matches!(
            refugee_solve(&one_family(1, 2), DEFAULT_NODE_BUDGET),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn refugee_leaves_negative_scores_unassigned() {
        let inst = RefugeeInstance::new(
            vec!["f".into(), "g".into()],
            vec![vec![int(1)], vec![int(1)]],
            vec!["a".into()],
            vec![vec![int(1)]],
            vec![vec![int(3)], vec![int(-2)]],
        )
        .unwrap();
        let a = refugee_solve(&inst, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(a.map, vec![Some(0), None]);
        assert_eq!(a.cost_or_value, int(3));
    }
}

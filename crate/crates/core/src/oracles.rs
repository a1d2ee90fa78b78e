//! Brute-force reference solvers for tests. They share no pivoting code with
//! the simplex in `ratlp`.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::measures::{DiscreteVectorMeasure, ReferenceMeasure};
use crate::monge::RefugeeInstance;
use crate::ratlp::{RationalLpProblem, RowKind};
use crate::scalar::{Extended, Rational};
use crate::solver::CostMatrix;

pub const MAX_VARS: usize = 12;
pub const MAX_ROWS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: Extended<Rational>,
    /// A minimizer; empty when the feasible set is empty.
    pub witness: Vec<Rational>,
    /// Candidates examined.
    pub count: u64,
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(a: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..a[i].len() {
                    let delta = &f * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    pivots
}

/// Solves the square system given by columns `basis` of the reduced rows
/// `a | b`; `None` when singular.
fn solve_basis(a: &[Vec<Rational>], basis: &[usize], rhs_col: usize) -> Option<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .map(|row| {
            basis
                .iter()
                .map(|&c| row[c].clone())
                .chain(std::iter::once(row[rhs_col].clone()))
                .collect()
        })
        .collect();
    let r = basis.len();
    if rref(&mut m, r).len() < r {
        return None;
    }
    Some(m.into_iter().map(|row| row[r].clone()).collect())
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        if idx[pos] < n - k + pos {
            idx[pos] += 1;
            for q in pos + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimum over all basic feasible solutions of a bounded LP.
pub fn vertex_enumerate(p: &RationalLpProblem) -> Result<OracleResult> {
    let n = p.num_vars();
    let rows = p.rows();
    if n > MAX_VARS || rows.len() > MAX_ROWS {
        return Err(Error::TooLarge(format!(
            "{n} variables and {} rows exceed {MAX_VARS} and {MAX_ROWS}",
            rows.len()
        )));
    }
    // Standard form: one surplus column per `>=` row.
    let surplus: usize = rows.iter().filter(|r| r.kind == RowKind::Geq).count();
    let cols = n + surplus;
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(rows.len());
    let mut s = n;
    for row in rows {
        let mut dense = vec![Rational::zero(); cols + 1];
        for (j, v) in &row.coeffs {
            dense[*j] += v;
        }
        if row.kind == RowKind::Geq {
            dense[s] = -Rational::one();
            s += 1;
        }
        dense[cols] = row.rhs.clone();
        a.push(dense);
    }
    let pivots = rref(&mut a, cols + 1);
    if pivots.contains(&cols) {
        return Ok(OracleResult {
            value: Extended::Infinite,
            witness: Vec::new(),
            count: 0,
        });
    }
    let rank = pivots.len();
    a.truncate(rank);
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    let mut count = 0;
    let mut consider = |x: Vec<Rational>| {
        let value: Rational = p.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
        count += 1;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, x[..n].to_vec()));
        }
    };
    if rank == 0 {
        consider(vec![Rational::zero(); cols]);
    } else {
        let mut idx: Vec<usize> = (0..rank).collect();
        loop {
            if let Some(xb) = solve_basis(&a, &idx, cols) {
                if xb.iter().all(|v| !v.is_negative()) {
                    let mut x = vec![Rational::zero(); cols];
                    for (&c, v) in idx.iter().zip(xb) {
                        x[c] = v;
                    }
                    consider(x);
                }
            }
            if !next_combination(&mut idx, cols) {
                break;
            }
        }
    }
    Ok(match best {
        Some((value, witness)) => OracleResult {
            value: Extended::Finite(value),
            witness,
            count,
        },
        None => OracleResult {
            value: Extended::Infinite,
            witness: Vec::new(),
            count,
        },
    })
}

/// `a + b eps` for an infinitesimal `eps > 0`, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Perturbed(Rational, Rational);

impl Perturbed {
    fn add(&self, o: &Self) -> Self {
        Perturbed(&self.0 + &o.0, &self.1 + &o.1)
    }

    fn sub(&self, o: &Self) -> Self {
        Perturbed(&self.0 - &o.0, &self.1 - &o.1)
    }
}

/// Classic balanced transport `min sum pi(i,k) c(i,k)` with marginals `mu`,
/// `nu`, by the transportation simplex from a north-west-corner start.
/// The witness is the plan, row-major.
pub fn classic_ot(mu: &[Rational], nu: &[Rational], cost: &[Vec<Rational>]) -> Result<OracleResult> {
    let (n, m) = (mu.len(), nu.len());
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("empty marginal".into()));
    }
    if cost.len() != n || cost.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch("cost shape differs from marginals".into()));
    }
    if mu.iter().chain(nu).any(|v| v.is_negative()) {
        return Err(Error::InvalidInput("negative marginal mass".into()));
    }
    if mu.iter().sum::<Rational>() != nu.iter().sum::<Rational>() {
        return Err(Error::UnbalancedInput("marginal totals differ".into()));
    }
    // Perturb supplies by eps each and the last demand by n eps: no partial
    // sums tie, so every basis is nondegenerate and pivots cannot cycle.
    let zero = Rational::zero();
    let supply: Vec<Perturbed> = mu.iter().map(|a| Perturbed(a.clone(), Rational::one())).collect();
    let mut demand: Vec<Perturbed> = nu.iter().map(|b| Perturbed(b.clone(), zero.clone())).collect();
    demand[m - 1].1 = Rational::from_integer((n as i64).into());

    let mut flow: Vec<Vec<Option<Perturbed>>> = vec![vec![None; m]; n];
    let (mut i, mut k) = (0, 0);
    let (mut rs, mut rd) = (supply[0].clone(), demand[0].clone());
    loop {
        let take = rs.clone().min(rd.clone());
        flow[i][k] = Some(take.clone());
        rs = rs.sub(&take);
        rd = rd.sub(&take);
        if i == n - 1 && k == m - 1 {
            break;
        }
        if rs.0.is_zero() && rs.1.is_zero() {
            i += 1;
            rs = supply[i].clone();
        } else {
            k += 1;
            rd = demand[k].clone();
        }
    }

    let mut pivots = 0u64;
    loop {
        let (u, v) = potentials(&flow, cost);
        let entering = (0..n)
            .flat_map(|i| (0..m).map(move |k| (i, k)))
            .filter(|&(i, k)| flow[i][k].is_none())
            .map(|(i, k)| (&cost[i][k] - &u[i] - &v[k], i, k))
            .filter(|(r, _, _)| r.is_negative())
            .min_by(|a, b| a.0.cmp(&b.0));
        let Some((_, ei, ek)) = entering else {
            break;
        };
        let path = tree_path(&flow, ei, ek);
        // Cells along the path alternate between losing and gaining flow,
        // starting with a loss next to the entering row.
        let theta = path
            .iter()
            .step_by(2)
            .map(|&(a, b)| flow[a][b].clone().expect("basic cell"))
            .min()
            .expect("cycle has a losing cell");
        let mut leaving = None;
        for (t, &(a, b)) in path.iter().enumerate() {
            let cur = flow[a][b].clone().expect("basic cell");
            let next = if t % 2 == 0 { cur.sub(&theta) } else { cur.add(&theta) };
            if t % 2 == 0 && leaving.is_none() && next.0.is_zero() && next.1.is_zero() {
                leaving = Some((a, b));
            }
            flow[a][b] = Some(next);
        }
        flow[ei][ek] = Some(theta);
        let (la, lb) = leaving.expect("a losing cell reaches zero");
        flow[la][lb] = None;
        pivots += 1;
    }

    let mut value = Rational::zero();
    let mut witness = vec![Rational::zero(); n * m];
    for i in 0..n {
        for k in 0..m {
            if let Some(f) = &flow[i][k] {
                value += &f.0 * &cost[i][k];
                witness[i * m + k] = f.0.clone();
            }
        }
    }
    Ok(OracleResult {
        value: Extended::Finite(value),
        witness,
        count: pivots,
    })
}

/// Row and column potentials with `u_i + v_k = c(i,k)` on basic cells, `u_0 = 0`.
fn potentials(flow: &[Vec<Option<Perturbed>>], cost: &[Vec<Rational>]) -> (Vec<Rational>, Vec<Rational>) {
    let (n, m) = (flow.len(), flow[0].len());
    let mut u: Vec<Option<Rational>> = vec![None; n];
    let mut v: Vec<Option<Rational>> = vec![None; m];
    u[0] = Some(Rational::zero());
    let mut stack = vec![(true, 0usize)];
    while let Some((is_row, idx)) = stack.pop() {
        if is_row {
            for k in 0..m {
                if flow[idx][k].is_some() && v[k].is_none() {
                    v[k] = Some(&cost[idx][k] - u[idx].as_ref().expect("set"));
                    stack.push((false, k));
                }
            }
        } else {
            for i in 0..n {
                if flow[i][idx].is_some() && u[i].is_none() {
                    u[i] = Some(&cost[i][idx] - v[idx].as_ref().expect("set"));
                    stack.push((true, i));
                }
            }
        }
    }
    (
        u.into_iter().map(|x| x.expect("basis spans all rows")).collect(),
        v.into_iter().map(|x| x.expect("basis spans all columns")).collect(),
    )
}

/// Basic cells on the spanning-tree path from row `from` to column `to`.
fn tree_path(flow: &[Vec<Option<Perturbed>>], from: usize, to: usize) -> Vec<(usize, usize)> {
    let (n, m) = (flow.len(), flow[0].len());
    // Nodes: rows 0..n, columns n..n+m.
    let mut parent: Vec<Option<usize>> = vec![None; n + m];
    let mut seen = vec![false; n + m];
    seen[from] = true;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(node) = queue.pop_front() {
        let neighbors: Vec<usize> = if node < n {
            (0..m).filter(|&k| flow[node][k].is_some()).map(|k| n + k).collect()
        } else {
            (0..n).filter(|&i| flow[i][node - n].is_some()).collect()
        };
        for nb in neighbors {
            if !seen[nb] {
                seen[nb] = true;
                parent[nb] = Some(node);
                queue.push_back(nb);
            }
        }
    }
    let mut nodes = vec![n + to];
    while let Some(p) = parent[*nodes.last().expect("nonempty")] {
        nodes.push(p);
    }
    nodes.reverse();
    nodes
        .windows(2)
        .map(|w| if w[0] < n { (w[0], w[1] - n) } else { (w[1], w[0] - n) })
        .collect()
}

/// Outcome of an exhaustive search over maps.
#[derive(Debug, Clone, PartialEq)]
pub struct MapOracleResult {
    /// Best value and a map attaining it; `None` when nothing is feasible.
    pub best: Option<(Rational, Vec<Option<usize>>)>,
    pub count: u64,
}

fn for_each_map(n: usize, options: usize, limit: u64, mut f: impl FnMut(&[usize])) -> Result<u64> {
    let total = (options as u64).checked_pow(n as u32).filter(|&t| t <= limit);
    let total = total.ok_or_else(|| Error::TooLarge(format!("{options}^{n} maps")))?;
    let mut map = vec![0usize; n];
    for _ in 0..total {
        f(&map);
        for slot in map.iter_mut() {
            *slot += 1;
            if *slot < options {
                break;
            }
            *slot = 0;
        }
    }
    Ok(total)
}

const MAP_LIMIT: u64 = 2_000_000;

fn map_covers(map: &[Option<usize>], supply: &[Vec<Rational>], demand: &[Vec<Rational>]) -> bool {
    supply.iter().zip(demand).all(|(sj, dj)| {
        let mut got = vec![Rational::zero(); dj.len()];
        for (t, w) in map.iter().zip(sj) {
            if let Some(k) = t {
                got[*k] += w;
            }
        }
        got.iter().zip(dj).all(|(g, d)| g >= d)
    })
}

/// Every map `X -> Y`, keeping the cheapest covering one.
pub fn monge_enumerate(
    mu: &DiscreteVectorMeasure,
    nu: &DiscreteVectorMeasure,
    eta: &ReferenceMeasure,
    cost: &CostMatrix,
) -> Result<MapOracleResult> {
    let mut best: Option<(Rational, Vec<Option<usize>>)> = None;
    let count = for_each_map(mu.len(), nu.len(), MAP_LIMIT, |map| {
        let map: Vec<Option<usize>> = map.iter().copied().map(Some).collect();
        if !map_covers(&map, mu.weights(), nu.weights()) {
            return;
        }
        let value: Rational = map
            .iter()
            .enumerate()
            .map(|(i, t)| &eta.weights[i] * cost.get(i, t.expect("assigned")))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, map));
        }
    })?;
    Ok(MapOracleResult { best, count })
}

/// Every placement of families, including leaving them out, keeping the
/// highest-scoring one that meets all floors.
pub fn refugee_enumerate(inst: &RefugeeInstance) -> Result<MapOracleResult> {
    let (supply, demand) = inst.as_component_weights();
    let l = inst.affiliates();
    let mut best: Option<(Rational, Vec<Option<usize>>)> = None;
    let count = for_each_map(inst.families(), l + 1, MAP_LIMIT, |raw| {
        let map: Vec<Option<usize>> = raw.iter().map(|&t| (t < l).then_some(t)).collect();
        if !map_covers(&map, &supply, &demand) {
            return;
        }
        let value: Rational = map
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|k| inst.scores[i][k].clone()))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, map));
        }
    })?;
    Ok(MapOracleResult { best, count })
}

/// Best value of `sum_{i,k} eta(i) kappa(i,k) g(i,k)` over kernels whose
/// entries are multiples of `1 / steps` and whose pushforward of `mu` equals
/// (`RowKind::Eq`) or covers (`RowKind::Geq`) `nu`.
pub fn kernel_grid_search(
    mu: &DiscreteVectorMeasure,
    nu: &DiscreteVectorMeasure,
    eta: &[Rational],
    g: &[Vec<Rational>],
    steps: usize,
    coverage: RowKind,
    maximize: bool,
) -> Result<Option<(Rational, Vec<Vec<Rational>>)>> {
    let (n, m) = (mu.len(), nu.len());
    let rows = compositions(steps, m);
    let total = (rows.len() as u64).checked_pow(n as u32).filter(|&t| t <= MAP_LIMIT);
    let total = total.ok_or_else(|| Error::TooLarge(format!("{}^{n} kernels", rows.len())))?;
    let denom = Rational::from_integer((steps as i64).into());
    let grid_rows: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| Rational::from_integer((c as i64).into()) / &denom).collect())
        .collect();
    let mut best: Option<(Rational, Vec<Vec<Rational>>)> = None;
    let mut choice = vec![0usize; n];
    for _ in 0..total {
        let kernel: Vec<Vec<Rational>> = choice.iter().map(|&c| grid_rows[c].clone()).collect();
        let ok = mu.weights().iter().zip(nu.weights()).all(|(wj, nj)| {
            (0..m).all(|k| {
                let push: Rational = (0..n).map(|i| &wj[i] * &kernel[i][k]).sum();
                match coverage {
                    RowKind::Eq => push == nj[k],
                    RowKind::Geq => push >= nj[k],
                }
            })
        });
        if ok {
            let value: Rational = (0..n)
                .flat_map(|i| (0..m).map(move |k| (i, k)))
                .map(|(i, k)| &eta[i] * &kernel[i][k] * &g[i][k])
                .sum();
            let better = best
                .as_ref()
                .is_none_or(|(b, _)| if maximize { value > *b } else { value < *b });
            if better {
                best = Some((value, kernel));
            }
        }
        for slot in choice.iter_mut() {
            *slot += 1;
            if *slot < grid_rows.len() {
                break;
            }
            *slot = 0;
        }
    }
    Ok(best)
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ratlp::{self, LpProblem};
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn enumerates_small_lps() {
        // min x + y, x + 2y >= 2, 3x + y >= 3.
        let mut p = LpProblem::new(2);
        p.set_objective(vec![int(1), int(1)]);
        p.add_geq(vec![(0, int(1)), (1, int(2))], int(2));
        p.add_geq(vec![(0, int(3)), (1, int(1))], int(3));
        let r = vertex_enumerate(&p).unwrap();
        assert_eq!(r.value, Extended::Finite(rat(7, 5)));
        assert_eq!(r.witness, vec![rat(4, 5), rat(3, 5)]);

        let mut empty = LpProblem::new(1);
        empty.add_eq(vec![(0, int(1))], int(-1));
        assert!(vertex_enumerate(&empty).unwrap().value.is_infinite());

        let mut point = LpProblem::new(2);
        point.add_eq(vec![(0, int(1))], rat(1, 3));
        point.add_eq(vec![(1, int(1))], rat(2, 3));
        let r = vertex_enumerate(&point).unwrap();
        assert_eq!(r.witness, vec![rat(1, 3), rat(2, 3)]);
        assert_eq!(r.count, 1);

        assert!(matches!(vertex_enumerate(&LpProblem::new(13)), Err(Error::TooLarge(_))));
    }

    #[test]
    fn unique_kernel_by_enumeration() {
        let (mu, nu) = fixtures::unique_kernel();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let lp = crate::solver::kernel_lp(&mu, &nu, &eta, &fixtures::swap_cost()).unwrap();
        let r = vertex_enumerate(&lp).unwrap();
        assert_eq!(r.value, Extended::Finite(rat(1, 2)));
        assert_eq!(r.witness, vec![rat(1, 3), rat(2, 3), rat(1, 3), rat(2, 3)]);
    }

    #[test]
    fn classic_ot_small_cases() {
        // Sorted supports with submodular cost: comonotone plan.
        let xs = [int(0), int(1)];
        let cost: Vec<Vec<Rational>> = xs
            .iter()
            .map(|x| xs.iter().map(|y| (x - y) * (x - y)).collect())
            .collect();
        let r = classic_ot(&[rat(1, 2), rat(1, 2)], &[rat(1, 4), rat(3, 4)], &cost).unwrap();
        assert_eq!(r.value, Extended::Finite(rat(1, 4)));
        assert_eq!(r.witness, vec![rat(1, 4), rat(1, 4), int(0), rat(1, 2)]);

        let marg = [rat(1, 3), int(0), rat(2, 3)];
        let diag: Vec<Vec<Rational>> = (0..3)
            .map(|i| (0..3).map(|k| if i == k { int(0) } else { int(1) }).collect())
            .collect();
        assert_eq!(classic_ot(&marg, &marg, &diag).unwrap().value, Extended::Finite(int(0)));

        assert!(matches!(
            classic_ot(&[int(1)], &[int(2)], &[vec![int(0)]]),
            Err(Error::UnbalancedInput(_))
        ));
    }

    #[test]
    fn map_oracles() {
        let (mu, nu) = fixtures::unique_kernel();
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let r = monge_enumerate(&mu, &nu, &eta, &fixtures::swap_cost()).unwrap();
        assert_eq!(r.best, None);
        assert_eq!(r.count, 4);
    }

    #[test]
    fn grid_search_finds_unique_kernel() {
        let (mu, nu) = fixtures::unique_kernel();
        let eta = mu.mubar().unwrap();
        let g: Vec<Vec<Rational>> = fixtures::swap_cost().entries().to_vec();
        let (v, k) = kernel_grid_search(&mu, &nu, &eta, &g, 3, RowKind::Geq, false)
            .unwrap()
            .unwrap();
        assert_eq!(v, rat(1, 2));
        assert_eq!(k, vec![vec![rat(1, 3), rat(2, 3)]; 2]);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (0i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn transport_simplex_matches_vertices(
            raw_mu in prop::collection::vec(1i64..=5, 2..=3),
            raw_nu in prop::collection::vec(1i64..=5, 2..=3),
            cost in prop::collection::vec(small_rational(), 9),
        ) {
            let (tm, tn): (i64, i64) = (raw_mu.iter().sum(), raw_nu.iter().sum());
            let mu: Vec<Rational> = raw_mu.iter().map(|&a| rat(a * tn, tm * tn)).collect();
            let nu: Vec<Rational> = raw_nu.iter().map(|&b| rat(b * tm, tm * tn)).collect();
            let (n, m) = (mu.len(), nu.len());
            let c: Vec<Vec<Rational>> = (0..n).map(|i| cost[i * 3..i * 3 + m].to_vec()).collect();
            let ot = classic_ot(&mu, &nu, &c).unwrap();

            let mut lp = LpProblem::new(n * m);
            lp.set_objective((0..n).flat_map(|i| c[i].clone()).collect());
            for (i, a) in mu.iter().enumerate() {
                lp.add_eq((0..m).map(|k| (i * m + k, int(1))).collect(), a.clone());
            }
            for (k, b) in nu.iter().enumerate() {
                lp.add_eq((0..n).map(|i| (i * m + k, int(1))).collect(), b.clone());
            }
            prop_assert_eq!(&ot.value, &vertex_enumerate(&lp).unwrap().value);
            prop_assert!(lp.is_feasible_point(&ot.witness));
            prop_assert_eq!(Extended::Finite(ratlp::solve(&lp).objective_value.unwrap()), ot.value);
        }
    }
}

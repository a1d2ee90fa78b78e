//! Seeded random instances for property tests, the acceptance suite and the
//! `dev random-instance` command. Weights are small integers normalized to
//! probabilities, so exact arithmetic stays cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::{DiscreteVectorMeasure, SupportPoint};
use crate::monge::RefugeeInstance;
use crate::scalar::{sum, Rational};
use crate::solver::{CostMatrix, TransportKernel};

pub type InstanceRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn int(v: u64) -> Rational {
    Rational::from_integer(v.into())
}

fn normalize(raw: &[u64]) -> Vec<Rational> {
    let total: u64 = raw.iter().sum();
    raw.iter().map(|&v| Rational::new(v.into(), total.into())).collect()
}

/// Integer weights in `0..=top`, at least one positive.
fn raw_weights(rng: &mut impl Rng, n: usize, top: u64) -> Vec<u64> {
    let mut raw: Vec<u64> = (0..n).map(|_| rng.random_range(0..=top)).collect();
    if raw.iter().all(|&v| v == 0) {
        raw[rng.random_range(0..n)] = 1;
    }
    raw
}

pub fn probability_vector(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    normalize(&raw_weights(rng, n, 6))
}

/// `d` probability vectors on `n` points, every point charged by some component.
pub fn probability_tuple(rng: &mut impl Rng, d: usize, n: usize) -> DiscreteVectorMeasure {
    let mut raw: Vec<Vec<u64>> = (0..d).map(|_| raw_weights(rng, n, 6)).collect();
    for i in 0..n {
        if raw.iter().all(|row| row[i] == 0) {
            let j = rng.random_range(0..d);
            raw[j][i] = 1;
        }
    }
    let weights = raw.iter().map(|r| normalize(r)).collect();
    DiscreteVectorMeasure::from_weights(weights).expect("generated weights are valid")
}

/// Row-stochastic matrix; with `dense` every entry is positive.
pub fn random_kernel(rng: &mut impl Rng, n: usize, m: usize, dense: bool) -> TransportKernel {
    let rows = (0..n)
        .map(|_| {
            let raw: Vec<u64> = if dense {
                (0..m).map(|_| rng.random_range(1..=6)).collect()
            } else {
                raw_weights(rng, m, 4)
            };
            normalize(&raw)
        })
        .collect();
    TransportKernel { rows }
}

/// `kappa_# mu` for a random kernel, so a transport exists and both tuples
/// have the same component totals.
pub fn feasible_pair(
    rng: &mut impl Rng,
    d: usize,
    n: usize,
    m: usize,
) -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    let mu = probability_tuple(rng, d, n);
    let kernel = random_kernel(rng, n, m, false);
    let nu = DiscreteVectorMeasure::from_weights(kernel.pushforward(&mu))
        .expect("pushforward of a valid measure")
        .trim();
    (mu, nu)
}

/// Independent probability tuples; a transport may or may not exist.
pub fn independent_pair(
    rng: &mut impl Rng,
    d: usize,
    n: usize,
    m: usize,
) -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    (probability_tuple(rng, d, n), probability_tuple(rng, d, m))
}

/// Integer costs in `0..=top`.
pub fn random_cost(rng: &mut impl Rng, n: usize, m: usize, top: u64) -> CostMatrix {
    CostMatrix::new(
        (0..n)
            .map(|_| (0..m).map(|_| int(rng.random_range(0..=top))).collect())
            .collect(),
    )
    .expect("nonnegative cost")
}

/// Integer costs with a zero in every row.
pub fn zero_min_cost(rng: &mut impl Rng, n: usize, m: usize, top: u64) -> CostMatrix {
    let mut entries: Vec<Vec<Rational>> = (0..n)
        .map(|_| (0..m).map(|_| int(rng.random_range(1..=top.max(1)))).collect())
        .collect();
    for row in &mut entries {
        let k = rng.random_range(0..m);
        row[k] = int(0);
    }
    CostMatrix::new(entries).expect("nonnegative cost")
}

/// Slice structure shared by every member of an equivalence class:
/// `masses[s][j]` is the `mu_j` mass of slice `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMasses {
    pub masses: Vec<Vec<Rational>>,
}

impl SliceMasses {
    /// With `d = 1` every profile is `[1]`, so a single slice is produced.
    pub fn random(rng: &mut impl Rng, d: usize, slices: usize) -> Self {
        let slices = if d == 1 { 1 } else { slices };
        loop {
            let raw: Vec<Vec<u64>> = (0..slices)
                .map(|_| (0..d).map(|_| rng.random_range(1..=5)).collect())
                .collect();
            let totals: Vec<u64> = (0..d).map(|j| raw.iter().map(|r| r[j]).sum()).collect();
            let masses: Vec<Vec<Rational>> = raw
                .iter()
                .map(|r| (0..d).map(|j| Rational::new(r[j].into(), totals[j].into())).collect())
                .collect();
            let profiles: Vec<Vec<Rational>> = masses
                .iter()
                .map(|row| {
                    let mean = sum(row) / int(d as u64);
                    row.iter().map(|v| v / &mean).collect()
                })
                .collect();
            let distinct = (0..slices).all(|a| (a + 1..slices).all(|b| profiles[a] != profiles[b]));
            if distinct {
                return Self { masses };
            }
        }
    }

    pub fn slices(&self) -> usize {
        self.masses.len()
    }

    /// A member of the class with `sizes[s]` points in slice `s`, placed at
    /// distinct integer coordinates drawn from `0..coord_range`.
    pub fn member(&self, rng: &mut impl Rng, sizes: &[usize], coord_range: u64) -> DiscreteVectorMeasure {
        assert_eq!(sizes.len(), self.slices());
        let total: usize = sizes.iter().sum();
        let coords = distinct_coords(rng, total, coord_range);
        let d = self.masses[0].len();
        let mut weights = vec![Vec::with_capacity(total); d];
        for (s, &size) in sizes.iter().enumerate() {
            let split = normalize(&(0..size).map(|_| rng.random_range(1..=5)).collect::<Vec<u64>>());
            for p in &split {
                for (j, row) in weights.iter_mut().enumerate() {
                    row.push(&self.masses[s][j] * p);
                }
            }
        }
        let support = coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| SupportPoint::with_coords(i.to_string(), vec![int(c)]))
            .collect();
        DiscreteVectorMeasure::new(support, weights).expect("generated weights are valid")
    }
}

fn distinct_coords(rng: &mut impl Rng, count: usize, range: u64) -> Vec<u64> {
    let range = range.max(count as u64);
    let mut out: Vec<u64> = Vec::with_capacity(count);
    while out.len() < count {
        let c = rng.random_range(0..range);
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

fn random_sizes(rng: &mut impl Rng, slices: usize, max_size: usize) -> Vec<usize> {
    (0..slices).map(|_| rng.random_range(1..=max_size)).collect()
}

/// Two tuples with the same profile law, on the real line.
pub fn twoway_pair(
    rng: &mut impl Rng,
    d: usize,
    slices: usize,
    max_size: usize,
) -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    let class = SliceMasses::random(rng, d, slices);
    let sizes = random_sizes(rng, class.slices(), max_size);
    let mu = class.member(rng, &sizes, 10);
    let sizes = random_sizes(rng, class.slices(), max_size);
    let nu = class.member(rng, &sizes, 10);
    (mu, nu)
}

/// Three tuples in one equivalence class.
pub fn same_class_triple(
    rng: &mut impl Rng,
    d: usize,
    slices: usize,
    max_size: usize,
) -> [DiscreteVectorMeasure; 3] {
    let class = SliceMasses::random(rng, d, slices);
    std::array::from_fn(|_| {
        let sizes = random_sizes(rng, class.slices(), max_size);
        class.member(rng, &sizes, 10)
    })
}

fn injective(m: &DiscreteVectorMeasure) -> bool {
    m.derivative_law().is_ok_and(|law| law.is_injective())
}

/// Balanced pair with a transport and with distinct profiles at every point
/// on both sides. With `d = 1` all profiles coincide, so `n = m = 1` is needed.
pub fn injective_pair(
    rng: &mut impl Rng,
    d: usize,
    n: usize,
    m: usize,
) -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    assert!(d >= 2 || (n == 1 && m == 1), "one component has a single profile");
    loop {
        let mu = probability_tuple(rng, d, n);
        if !injective(&mu) {
            continue;
        }
        let kernel = random_kernel(rng, n, m, true);
        let nu = DiscreteVectorMeasure::from_weights(kernel.pushforward(&mu))
            .expect("pushforward of a valid measure");
        if injective(&nu) {
            return (mu, nu);
        }
    }
}

/// A target that some map covers: the image of `mu` under a random map,
/// with each target weight scaled down by a factor in `{1/2, 1}`.
pub fn monge_feasible_pair(
    rng: &mut impl Rng,
    d: usize,
    n: usize,
    m: usize,
) -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    let mu = probability_tuple(rng, d, n);
    let map: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
    let mut weights = vec![vec![int(0); m]; d];
    for (i, &k) in map.iter().enumerate() {
        for (j, row) in weights.iter_mut().enumerate() {
            row[k] = &row[k] + mu.weight(j, i);
        }
    }
    for k in 0..m {
        if rng.random_bool(0.5) {
            for row in &mut weights {
                row[k] = &row[k] / int(2);
            }
        }
    }
    let nu = DiscreteVectorMeasure::from_weights(weights)
        .expect("image of a valid measure")
        .trim();
    (mu, nu)
}

pub fn refugee_instance(rng: &mut impl Rng, families: usize, affiliates: usize, kinds: usize) -> RefugeeInstance {
    let q = (0..families)
        .map(|_| (0..kinds).map(|_| int(rng.random_range(0..=3))).collect())
        .collect();
    let floors = (0..affiliates)
        .map(|_| (0..kinds).map(|_| int(rng.random_range(0..=3))).collect())
        .collect();
    let scores = (0..families)
        .map(|_| {
            (0..affiliates)
                .map(|_| Rational::from_integer(rng.random_range(-2i64..=6).into()))
                .collect()
        })
        .collect();
    RefugeeInstance::new(
        (0..families).map(|i| format!("F{i}")).collect(),
        q,
        (0..affiliates).map(|l| format!("L{l}")).collect(),
        floors,
        scores,
    )
    .expect("generated refugee instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twoway::slice_decomposition;

    #[test]
    fn same_seed_same_instance() {
        let a = feasible_pair(&mut seeded(7), 2, 4, 3);
        let b = feasible_pair(&mut seeded(7), 2, 4, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn tuples_are_trimmed_probabilities() {
        let mut rng = seeded(1);
        for _ in 0..50 {
            let mu = probability_tuple(&mut rng, 3, 5);
            assert!(mu.is_trimmed());
            assert!(mu.totals().iter().all(|t| *t == int(1)));
        }
    }

    #[test]
    fn feasible_pairs_are_balanced() {
        let mut rng = seeded(2);
        for _ in 0..20 {
            let (mu, nu) = feasible_pair(&mut rng, 2, 4, 4);
            assert!(mu.is_balanced_with(&nu));
            assert!(nu.is_trimmed());
        }
    }

    #[test]
    fn twoway_pairs_share_slices() {
        let mut rng = seeded(3);
        for _ in 0..20 {
            let (mu, nu) = twoway_pair(&mut rng, 2, 2, 3);
            assert_eq!(slice_decomposition(&mu, &nu).unwrap().slices.len(), 2);
            assert!(mu.scalar_coords().is_ok());
        }
    }

    #[test]
    fn injective_pairs_are_injective() {
        let mut rng = seeded(4);
        let (mu, nu) = injective_pair(&mut rng, 2, 3, 3);
        assert!(injective(&mu) && injective(&nu));
        assert!(mu.is_balanced_with(&nu));
    }

    #[test]
    fn zero_min_rows() {
        let c = zero_min_cost(&mut seeded(5), 4, 3, 5);
        assert!((0..4).all(|i| c.row_min(i) == int(0)));
    }
}

//! Small hand-checked instances shared by tests, the self-test and the docs.

use crate::measures::{DiscreteVectorMeasure, SupportPoint};
use crate::scalar::{int, rat, Rational};
use crate::solver::CostMatrix;

fn measure(labels: &[&str], weights: Vec<Vec<Rational>>) -> DiscreteVectorMeasure {
    let support = labels.iter().map(|l| SupportPoint::new(*l)).collect();
    DiscreteVectorMeasure::new(support, weights).expect("fixture is valid")
}

fn on_line(coords: &[Rational], weights: Vec<Vec<Rational>>) -> DiscreteVectorMeasure {
    let support = coords
        .iter()
        .enumerate()
        .map(|(i, c)| SupportPoint::with_coords(i.to_string(), vec![c.clone()]))
        .collect();
    DiscreteVectorMeasure::new(support, weights).expect("fixture is valid")
}

/// Two points on each side whose only feasible kernel has both rows `(1/3, 2/3)`.
pub fn unique_kernel() -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    let mu = measure(
        &["0", "1"],
        vec![vec![rat(1, 3), rat(2, 3)], vec![rat(2, 3), rat(1, 3)]],
    );
    let nu = measure(
        &["0", "1"],
        vec![vec![rat(1, 3), rat(2, 3)], vec![rat(1, 3), rat(2, 3)]],
    );
    (mu, nu)
}

/// `[[0, 1], [1, 0]]`.
pub fn swap_cost() -> CostMatrix {
    CostMatrix::new(vec![vec![int(0), int(1)], vec![int(1), int(0)]]).expect("valid cost")
}

/// Factories supplying two products in equal amounts; retailers asking for
/// ratios 2:1 and 1:2. No transport exists.
pub fn intro_infeasible() -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    let mu = measure(
        &["f1", "f2"],
        vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]],
    );
    (mu, intro_retailers())
}

/// Same retailers, factories supplying in ratios 3:1 and 1:3.
pub fn intro_feasible() -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    let mu = measure(
        &["f1", "f2"],
        vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]],
    );
    (mu, intro_retailers())
}

fn intro_retailers() -> DiscreteVectorMeasure {
    measure(
        &["r1", "r2"],
        vec![vec![rat(2, 3), rat(1, 3)], vec![rat(1, 3), rat(2, 3)]],
    )
}

/// Components with disjoint supports on both sides, with a cost that mixes
/// them. Both lower bounds are sharp here.
pub fn disjoint_supports() -> (DiscreteVectorMeasure, DiscreteVectorMeasure, CostMatrix) {
    let mu = measure(
        &["a1", "a2", "b1", "b2"],
        vec![
            vec![rat(1, 4), rat(3, 4), int(0), int(0)],
            vec![int(0), int(0), rat(1, 2), rat(1, 2)],
        ],
    );
    let nu = measure(
        &["p1", "p2", "q1", "q2"],
        vec![
            vec![rat(1, 2), rat(1, 2), int(0), int(0)],
            vec![int(0), int(0), rat(1, 3), rat(2, 3)],
        ],
    );
    let cost = CostMatrix::new(vec![
        vec![int(0), int(2), int(3), int(1)],
        vec![int(1), int(0), int(2), int(2)],
        vec![int(2), int(3), int(0), int(1)],
        vec![int(3), int(1), int(2), int(0)],
    ])
    .expect("valid cost");
    (mu, nu, cost)
}

/// Four-point discretization of linear densities `2x` and `2 - 2x` against
/// identical uniform targets, with squared distance plus a penalty for moving
/// inner mass to the outer targets. The scalarized bound is strict here.
pub fn strict_gap() -> (DiscreteVectorMeasure, DiscreteVectorMeasure, CostMatrix) {
    let coords = [rat(1, 8), rat(3, 8), rat(5, 8), rat(7, 8)];
    let mu = on_line(
        &coords,
        vec![
            vec![rat(1, 16), rat(3, 16), rat(5, 16), rat(7, 16)],
            vec![rat(7, 16), rat(5, 16), rat(3, 16), rat(1, 16)],
        ],
    );
    let nu = on_line(&coords, vec![vec![rat(1, 4); 4], vec![rat(1, 4); 4]]);
    let inner = |i: usize| i == 1 || i == 2;
    let cost = CostMatrix::from_fn(4, 4, |i, k| {
        let d = &coords[i] - &coords[k];
        let penalty = if inner(i) && !inner(k) { int(1) } else { int(0) };
        &d * &d + penalty
    })
    .expect("valid cost");
    (mu, nu, cost)
}

/// A two-slice measure on the line and its translate by `shift`.
pub fn translated_pair(shift: &Rational) -> (DiscreteVectorMeasure, DiscreteVectorMeasure) {
    let xs = [int(0), rat(1, 2), int(2), int(3)];
    let weights = vec![
        vec![rat(1, 8), rat(1, 8), rat(1, 2), rat(1, 4)],
        vec![rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)],
    ];
    let ys: Vec<Rational> = xs.iter().map(|x| x + shift).collect();
    (on_line(&xs, weights.clone()), on_line(&ys, weights))
}

/// Three points whose profile law has three atoms.
pub fn three_atoms() -> DiscreteVectorMeasure {
    measure(
        &["0", "1", "2"],
        vec![
            vec![rat(1, 2), rat(1, 4), rat(1, 4)],
            vec![rat(1, 2), rat(1, 8), rat(3, 8)],
        ],
    )
}

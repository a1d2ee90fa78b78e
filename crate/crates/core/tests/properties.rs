use proptest::prelude::*;

use sot_core::feasibility::{cx_order_feasible, kernel_feasible};
use sot_core::io::{instance_from_value, instance_to_json, Instance};
use sot_core::monge::{monge_solve, DEFAULT_NODE_BUDGET};
use sot_core::oracles::vertex_enumerate;
use sot_core::parity::parity_solve;
use sot_core::random::{self, seeded};
use sot_core::ratlp::{self, Feasibility, RowKind};
use sot_core::scalar::int;
use sot_core::solver::{kernel_lp, kernel_lp_from_weights};
use sot_core::{solve_sot, CostMatrix, Error, Extended, ReferenceMeasure, Scalar};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn solver_matches_vertex_enumeration(seed in any::<u64>(), d in 1usize..=2, n in 1usize..=3, m in 1usize..=3) {
        let mut rng = seeded(seed);
        let (mu, nu) = random::independent_pair(&mut rng, d, n, m);
        let cost = random::random_cost(&mut rng, n, m, 7);
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let lp = kernel_lp(&mu, &nu, &eta, &cost).unwrap();
        let oracle = vertex_enumerate(&lp).unwrap();
        prop_assert_eq!(solve_sot(&mu, &nu, &eta, &cost).unwrap().optimal_cost(), oracle.value);
    }

    #[test]
    fn exact_transport_iff_convex_order(seed in any::<u64>(), d in 2usize..=3, n in 1usize..=4, m in 1usize..=4) {
        let mut rng = seeded(seed);
        let (mu, nu) = if seed % 2 == 0 {
            random::feasible_pair(&mut rng, d, n, m)
        } else {
            random::independent_pair(&mut rng, d, n, m)
        };
        let zeros = vec![vec![int(0); nu.len()]; n];
        let lp = kernel_lp_from_weights(mu.weights(), nu.weights(), &mu.mubar().unwrap(), &zeros, RowKind::Eq);
        let exact = matches!(ratlp::feasible(&lp), Feasibility::Feasible(_));
        let order = cx_order_feasible(&mu.derivative_law().unwrap(), &nu.derivative_law().unwrap()).unwrap();
        prop_assert_eq!(exact, order.feasible);
        // Balanced tuples: covering forces exact transport.
        prop_assert_eq!(exact, kernel_feasible(&mu, &nu).unwrap().feasible);
    }

    #[test]
    fn parity_succeeds_iff_convex_order(seed in any::<u64>(), n in 2usize..=4, m in 1usize..=3) {
        let mut rng = seeded(seed);
        let (mu, nu) = random::independent_pair(&mut rng, 2, n, m);
        let (law_mu, law_nu) = (mu.derivative_law().unwrap(), nu.derivative_law().unwrap());
        prop_assume!(law_mu.is_injective() && law_nu.is_injective());
        let cost = random::random_cost(&mut rng, n, m, 7);
        let order = cx_order_feasible(&law_mu, &law_nu).unwrap();
        match parity_solve(&mu, &nu, &cost) {
            Ok(res) => {
                prop_assert!(order.feasible);
                prop_assert!(res.equal);
            }
            Err(Error::Infeasible) => prop_assert!(!order.feasible),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn monge_never_beats_kernels(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=3) {
        let mut rng = seeded(seed);
        let (mu, nu) = random::monge_feasible_pair(&mut rng, 2, n, m);
        let cost = random::random_cost(&mut rng, n, nu.len(), 7);
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let map = monge_solve(&mu, &nu, &eta, &cost, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert!(map.covers(mu.weights(), nu.weights()));
        let kernel = solve_sot(&mu, &nu, &eta, &cost).unwrap().optimal_cost();
        prop_assert!(kernel.le_tol(&Extended::Finite(map.cost_or_value)));
    }

    #[test]
    fn float_mode_tracks_exact_mode(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=4, m in 1usize..=4) {
        let mut rng = seeded(seed);
        let (mu, nu) = random::feasible_pair(&mut rng, d, n, m);
        let cost = random::random_cost(&mut rng, n, nu.len(), 7);
        let exact = solve_sot(&mu, &nu, &ReferenceMeasure::mubar(&mu).unwrap(), &cost)
            .unwrap().into_result().unwrap().optimal_cost;
        let (fmu, fnu) = (mu.convert::<f64>(), nu.convert::<f64>());
        let fcost = CostMatrix::new(
            cost.entries().iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect(),
        ).unwrap();
        let float = solve_sot(&fmu, &fnu, &ReferenceMeasure::mubar(&fmu).unwrap(), &fcost)
            .unwrap().into_result().unwrap().optimal_cost;
        prop_assert!((float - Scalar::to_f64(&exact)).abs() <= 1e-9 * (1.0 + float.abs()));
    }

    #[test]
    fn instances_survive_json(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=4, m in 1usize..=4) {
        let mut rng = seeded(seed);
        let (mu, nu) = random::independent_pair(&mut rng, d, n, m);
        let cost = Some(random::random_cost(&mut rng, n, m, 7));
        let eta = ReferenceMeasure::mubar(&mu).unwrap();
        let inst = Instance { mu, nu, eta, cost };
        let text = instance_to_json(&inst).to_string();
        let back: Instance = instance_from_value(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, inst);
    }
}

//! Acceptance suite: every criterion runs at its stated size and time limit
//! and prints one PASS/FAIL line. Exits nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use sot_core::bounds::{positive_part_bound, simplex_bound};
use sot_core::duality::{dual_certificate, verify_dual_feasibility};
use sot_core::feasibility::{gaussian_markov_check, icx_order_feasible, kernel_feasibility_lp, kernel_feasible, SigmaClass};
use sot_core::fixtures;
use sot_core::monge::{monge_solve, refugee_solve, DEFAULT_NODE_BUDGET};
use sot_core::oracles::{classic_ot, monge_enumerate, refugee_enumerate, vertex_enumerate};
use sot_core::parity::{kernel_from_martingale, parity_solve};
use sot_core::random::{self, seeded};
use sot_core::scalar::{int, pow_usize, rat};
use sot_core::solver::{kernel_lp, solve_sot_monotone_check};
use sot_core::twoway::{comonotone_solve, decompose_solve, max_off_slice_mass, slice_decomposition, wasserstein, wd_lower_bound};
use sot_core::{solve_sot, CostMatrix, DiscreteVectorMeasure, Error, Extended, Rational, ReferenceMeasure};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail(e: Error) -> String {
    e.to_string()
}

fn mubar(mu: &DiscreteVectorMeasure) -> ReferenceMeasure {
    ReferenceMeasure::mubar(mu).expect("generated measures are trimmed")
}

fn optimum(mu: &DiscreteVectorMeasure, nu: &DiscreteVectorMeasure, cost: &CostMatrix) -> Result<Extended<Rational>, String> {
    Ok(solve_sot(mu, nu, &mubar(mu), cost).map_err(fail)?.optimal_cost())
}

fn unique_kernel() -> Outcome {
    let (mu, nu) = fixtures::unique_kernel();
    let eta = mubar(&mu);
    for cost in [fixtures::swap_cost(), CostMatrix::new(vec![vec![int(3), int(1)], vec![int(0), int(5)]]).unwrap()] {
        let res = solve_sot(&mu, &nu, &eta, &cost).map_err(fail)?.into_result().map_err(fail)?;
        let expected = vec![vec![rat(1, 3), rat(2, 3)]; 2];
        ensure(res.kernel.rows == expected, || format!("kernel {:?}", res.kernel.rows))?;
    }
    Ok("rows (1/3, 2/3) and (1/3, 2/3)".into())
}

fn intro_pair() -> Outcome {
    let (mu, nu) = fixtures::intro_infeasible();
    let report = kernel_feasible(&mu, &nu).map_err(fail)?;
    let ray = report.farkas.ok_or("demand instance reported feasible")?;
    let lp = kernel_feasibility_lp(&mu, &nu).map_err(fail)?;
    ensure(ray.certifies(&lp), || "Farkas ray does not certify".into())?;
    let (mu, nu) = fixtures::intro_feasible();
    let report = kernel_feasible(&mu, &nu).map_err(fail)?;
    let kernel = report.witness_kernel.ok_or("supply variant reported infeasible")?;
    ensure(kernel.covers(&mu, &nu), || "witness kernel does not cover".into())?;
    Ok("Farkas ray certified; witness kernel covers".into())
}

fn feasibility_equivalence() -> Outcome {
    let mut rng = seeded(3_000);
    let (mut feasible, mut total) = (0, 0);
    for t in 0..240 {
        let d = 1 + t % 3;
        let n = 1 + (t / 3) % 5;
        let m = 1 + (t / 15) % 5;
        let (mu, nu) = match t % 4 {
            0 => random::feasible_pair(&mut rng, d, n, m),
            1 => {
                let (mu, nu) = random::feasible_pair(&mut rng, d, n, m);
                (mu, nu.scaled(&rat(3, 4)).unwrap())
            }
            _ => random::independent_pair(&mut rng, d, n, m),
        };
        let direct = kernel_feasible(&mu, &nu).map_err(fail)?;
        let order = icx_order_feasible(&mu.derivative_law().map_err(fail)?, &nu.derivative_law().map_err(fail)?)
            .map_err(fail)?;
        ensure(direct.feasible == order.feasible, || format!("instance {t}: kernel {} order {}", direct.feasible, order.feasible))?;
        if direct.feasible {
            let k = direct.witness_kernel.as_ref().unwrap();
            ensure(k.covers(&mu, &nu), || format!("instance {t}: witness does not cover"))?;
            feasible += 1;
        } else {
            let lp = kernel_feasibility_lp(&mu, &nu).map_err(fail)?;
            ensure(direct.farkas.as_ref().unwrap().certifies(&lp), || format!("instance {t}: bad Farkas ray"))?;
        }
        total += 1;
    }
    Ok(format!("{total} instances, {feasible} feasible, 0 disagreements"))
}

fn strong_duality() -> Outcome {
    let mut rng = seeded(4_000);
    for t in 0..200 {
        let d = 1 + t % 3;
        let (n, m) = (1 + (t / 3) % 5, 1 + (t / 15) % 5);
        let (mu, nu) = random::feasible_pair(&mut rng, d, n, m);
        let cost = random::random_cost(&mut rng, n, nu.len(), 9);
        let eta = mubar(&mu);
        let cert = dual_certificate(&mu, &nu, &eta, &cost).map_err(fail)?;
        ensure(cert.gap == int(0), || format!("instance {t}: gap {}", cert.gap))?;
        ensure(cert.dual_value == cert.primal_value, || format!("instance {t}: values differ"))?;
        ensure(verify_dual_feasibility(&cert, &mu, &eta, &cost), || format!("instance {t}: dual infeasible"))?;
    }
    Ok("200 instances, gap 0, every certificate verified".into())
}

fn decomposition() -> Outcome {
    let mut rng = seeded(5_000);
    for t in 0..100 {
        let (d, slices) = (1 + t % 3, 1 + (t / 3) % 3);
        let (mu, nu) = random::twoway_pair(&mut rng, d, slices, 2);
        let cost = random::random_cost(&mut rng, mu.len(), nu.len(), 9);
        let res = decompose_solve(&mu, &nu, &cost).map_err(fail)?;
        let opt = optimum(&mu, &nu, &cost)?;
        ensure(opt == Extended::Finite(res.total.clone()), || format!("instance {t}: {opt:?} vs {}", res.total))?;
        ensure(res.kernel.covers(&mu, &nu), || format!("instance {t}: kernel does not cover"))?;
        let dec = slice_decomposition(&mu, &nu).map_err(fail)?;
        let off = max_off_slice_mass(&mu, &nu, &dec).map_err(fail)?;
        ensure(off == int(0), || format!("instance {t}: off-slice mass {off}"))?;
    }
    Ok("100 instances, totals equal, off-slice mass 0".into())
}

fn comonotone() -> Outcome {
    let mut rng = seeded(6_000);
    for t in 0..100 {
        let (d, slices) = (1 + t % 3, 1 + (t / 3) % 3);
        let (mu, nu) = random::twoway_pair(&mut rng, d, slices, 3);
        let (xs, ys) = (mu.scalar_coords().map_err(fail)?, nu.scalar_coords().map_err(fail)?);
        for cost in [CostMatrix::absolute(&xs, &ys).map_err(fail)?, CostMatrix::squared(&xs, &ys).map_err(fail)?] {
            let closed = comonotone_solve(&mu, &nu, &cost).map_err(fail)?;
            let lp = decompose_solve(&mu, &nu, &cost).map_err(fail)?;
            ensure(closed.total == lp.total, || format!("instance {t}: {} vs {}", closed.total, lp.total))?;
        }
    }
    Ok("100 instances, both costs equal".into())
}

fn parity() -> Outcome {
    let mut rng = seeded(7_000);
    for t in 0..100 {
        let d = 2 + t % 2;
        let (n, m) = (2 + (t / 2) % 3, 1 + (t / 6) % 4);
        let (mu, nu) = random::injective_pair(&mut rng, d, n, m);
        let cost = random::random_cost(&mut rng, n, m, 9);
        let res = parity_solve(&mu, &nu, &cost).map_err(fail)?;
        ensure(res.equal && res.mot_value == res.sot_value, || format!("instance {t}: {} vs {}", res.mot_value, res.sot_value))?;
        let k = kernel_from_martingale(&res.coupling, &mu, &nu).map_err(fail)?;
        ensure(k.transports_exactly(&mu, &nu), || format!("instance {t}: recovered kernel misses the target"))?;
        let bar = mu.mubar().map_err(fail)?;
        ensure(k.cost(&bar, &cost) == res.mot_value, || format!("instance {t}: recovered kernel not optimal"))?;
    }
    Ok("100 instances, values equal, recovered kernels optimal".into())
}

fn bounds() -> Outcome {
    let mut rng = seeded(8_000);
    let mut checked = 0;
    for t in 0..120 {
        let d = 2 + t % 2;
        let (n, m) = (2 + (t / 2) % 3, 2 + (t / 6) % 3);
        let (mu, nu) = if t % 3 == 0 {
            random::independent_pair(&mut rng, d, n, m)
        } else {
            random::feasible_pair(&mut rng, d, n, m)
        };
        let cost = random::zero_min_cost(&mut rng, n, nu.len(), 9);
        let eta = mubar(&mu);
        let opt = optimum(&mu, &nu, &cost)?;
        let sb = simplex_bound(&mu, &nu, &eta, &cost, 8).map_err(fail)?;
        ensure(sb.value.le_tol(&opt), || format!("instance {t}: simplex bound {:?} > {opt:?}", sb.value))?;
        let pp = positive_part_bound(&mu, &nu, &eta, &cost).map_err(fail)?;
        ensure(pp.applicable, || format!("instance {t}: zero-minimum cost not recognized"))?;
        ensure(pp.value.le_tol(&opt), || format!("instance {t}: positive-part bound {:?} > {opt:?}", pp.value))?;
        checked += 1;
    }
    let (mu, nu, cost) = fixtures::disjoint_supports();
    let eta = mubar(&mu);
    let opt = optimum(&mu, &nu, &cost)?;
    ensure(simplex_bound(&mu, &nu, &eta, &cost, 8).map_err(fail)?.value == opt, || "simplex bound not sharp".into())?;
    ensure(positive_part_bound(&mu, &nu, &eta, &cost).map_err(fail)?.value == opt, || "positive-part bound not sharp".into())?;
    Ok(format!("{checked} instances below the optimum; both sharp on disjoint supports"))
}

fn continuity() -> Outcome {
    let mut rng = seeded(9_000);
    let scales = [rat(1, 2), rat(3, 4), rat(7, 8), rat(15, 16), int(1)];
    for t in 0..60 {
        let d = 1 + t % 3;
        let (n, m) = (1 + (t / 3) % 4, 1 + (t / 12) % 4);
        let (mu, nu) = if t % 4 == 3 {
            random::independent_pair(&mut rng, d, n, m)
        } else {
            random::feasible_pair(&mut rng, d, n, m)
        };
        let cost = random::random_cost(&mut rng, n, nu.len(), 9);
        let values = solve_sot_monotone_check(&mu, &nu, &mubar(&mu), &cost, &scales).map_err(fail)?;
        ensure(values.windows(2).all(|w| w[0].le_tol(&w[1])), || format!("instance {t}: not monotone {values:?}"))?;
        if let Extended::Finite(top) = &values[4] {
            let gaps: Vec<Rational> = values.iter().map(|v| top - v.finite().unwrap()).collect();
            ensure(gaps.windows(2).all(|w| w[0] >= w[1]), || format!("instance {t}: gaps {gaps:?}"))?;
        }
    }
    Ok("60 instances, values nondecreasing and gaps nonincreasing".into())
}

fn wasserstein_axioms() -> Outcome {
    let mut rng = seeded(10_000);
    let p_values = [int(1), int(2)];
    for t in 0..50 {
        let (d, slices) = (1 + t % 3, 1 + (t / 3) % 2);
        let [a, b, c] = random::same_class_triple(&mut rng, d, slices, 2);
        for p in &p_values {
            let ab = wasserstein(&a, &b, p).map_err(fail)?;
            let ba = wasserstein(&b, &a, p).map_err(fail)?;
            ensure(ab.power == ba.power, || format!("triple {t}: asymmetric for p = {p}"))?;
            let bc = wasserstein(&b, &c, p).map_err(fail)?;
            let ac = wasserstein(&a, &c, p).map_err(fail)?;
            ensure(ac.distance <= ab.distance + bc.distance + 1e-9, || format!("triple {t}: triangle fails for p = {p}"))?;
            let lower = wd_lower_bound(&a, &b, p).map_err(fail)?;
            ensure(lower <= ab.power, || format!("triple {t}: lower bound {lower} > {}", ab.power))?;
        }
    }
    for shift in [rat(5, 2), rat(-3, 4), int(7)] {
        let (mu, nu) = fixtures::translated_pair(&shift);
        let abs = if shift < int(0) { -shift.clone() } else { shift.clone() };
        for (p, k) in [(int(1), 1), (int(2), 2), (int(3), 3)] {
            let w = wasserstein(&mu, &nu, &p).map_err(fail)?;
            let expected = pow_usize(&abs, k);
            ensure(w.power == expected, || format!("shift {shift}, p = {p}: {} vs {expected}", w.power))?;
            ensure(wd_lower_bound(&mu, &nu, &p).map_err(fail)? == expected, || format!("shift {shift}: lower bound not tight"))?;
        }
    }
    Ok("50 triples symmetric and triangular; translations exact".into())
}

fn oracle_agreement() -> Outcome {
    let mut rng = seeded(11_000);
    let shapes: Vec<(usize, usize, usize)> = (1..=3)
        .flat_map(|d| (1..=4).flat_map(move |n| (1..=4).map(move |m| (d, n, m))))
        .filter(|&(d, n, m)| n * m <= 12 && n + d * m <= 10 && n * m + d * m <= 14)
        .collect();
    let (mut lp_checks, mut ot_checks) = (0, 0);
    for round in 0..4 {
        for &(d, n, m) in &shapes {
            let (mu, nu) = if round % 2 == 0 {
                random::feasible_pair(&mut rng, d, n, m)
            } else {
                random::independent_pair(&mut rng, d, n, m)
            };
            let cost = random::random_cost(&mut rng, n, nu.len(), 9);
            let eta = mubar(&mu);
            let opt = optimum(&mu, &nu, &cost)?;
            let lp = kernel_lp(&mu, &nu, &eta, &cost).map_err(fail)?;
            let oracle = vertex_enumerate(&lp).map_err(fail)?;
            ensure(opt == oracle.value, || format!("shape {:?}: solver {opt:?} vs enumeration {:?}", (d, n, m), oracle.value))?;
            lp_checks += 1;
            if d == 1 && mu.is_balanced_with(&nu) {
                let ot = classic_ot(&mu.weights()[0], &nu.weights()[0], cost.entries()).map_err(fail)?;
                ensure(opt == ot.value, || format!("shape {:?}: solver {opt:?} vs transportation simplex {:?}", (d, n, m), ot.value))?;
                ot_checks += 1;
            }
        }
    }
    Ok(format!("{lp_checks} enumeration and {ot_checks} transportation checks, 0 mismatches"))
}

fn markov() -> Outcome {
    let ints = |v: &[i64]| v.iter().map(|&x| int(x)).collect::<Vec<_>>();
    let long = gaussian_markov_check(&ints(&[64, 16, 4, 2, 1])).map_err(fail)?;
    ensure(long.classification == SigmaClass::DecreasingLogConvex && !long.sufficient, || format!("{long:?}"))?;
    let short = gaussian_markov_check(&ints(&[1, 4, 4])).map_err(fail)?;
    ensure(short.classification == SigmaClass::IncreasingLogConcave && short.sufficient, || format!("{short:?}"))?;
    Ok("(64,16,4,2,1) necessary only; (1,4,4) sufficient".into())
}

fn monge_and_refugee() -> Outcome {
    let mut rng = seeded(13_000);
    let (mut feasible, mut total) = (0, 0);
    for t in 0..60 {
        let (mu, nu) = if t % 2 == 0 {
            random::monge_feasible_pair(&mut rng, 2, 4, 3)
        } else {
            random::independent_pair(&mut rng, 2, 4, 3)
        };
        let cost = random::random_cost(&mut rng, 4, nu.len(), 9);
        let eta = mubar(&mu);
        let oracle = monge_enumerate(&mu, &nu, &eta, &cost).map_err(fail)?;
        match (monge_solve(&mu, &nu, &eta, &cost, DEFAULT_NODE_BUDGET), &oracle.best) {
            (Ok(a), Some((best, _))) => {
                ensure(a.optimal && a.cost_or_value == *best, || format!("instance {t}: {} vs {best}", a.cost_or_value))?;
                let kernel = optimum(&mu, &nu, &cost)?;
                ensure(kernel.le_tol(&Extended::Finite(a.cost_or_value.clone())), || format!("instance {t}: Monge below kernel"))?;
                feasible += 1;
            }
            (Err(Error::Infeasible), None) => {}
            (got, want) => return Err(format!("instance {t}: search {got:?}, enumeration {want:?}")),
        }
        total += 1;
    }
    for t in 0..60 {
        let inst = random::refugee_instance(&mut rng, 4, 2, 2);
        let oracle = refugee_enumerate(&inst).map_err(fail)?;
        match (refugee_solve(&inst, DEFAULT_NODE_BUDGET), &oracle.best) {
            (Ok(a), Some((best, _))) => {
                ensure(a.optimal && a.cost_or_value == *best, || format!("refugee {t}: {} vs {best}", a.cost_or_value))?;
            }
            (Err(Error::Infeasible), None) => {}
            (got, want) => return Err(format!("refugee {t}: search {got:?}, enumeration {want:?}")),
        }
        total += 1;
    }
    Ok(format!("{total} instances match enumeration, {feasible} Monge-feasible above the kernel cost"))
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { name: "unique kernel", limit: secs(1), run: unique_kernel },
        Criterion { name: "intro feasibility pair", limit: secs(1), run: intro_pair },
        Criterion { name: "kernel vs order feasibility", limit: secs(60), run: feasibility_equivalence },
        Criterion { name: "strong duality", limit: secs(60), run: strong_duality },
        Criterion { name: "slice decomposition", limit: secs(60), run: decomposition },
        Criterion { name: "comonotone closed form", limit: secs(60), run: comonotone },
        Criterion { name: "martingale parity", limit: secs(60), run: parity },
        Criterion { name: "bounds dominance", limit: secs(60), run: bounds },
        Criterion { name: "continuity in the target scale", limit: secs(60), run: continuity },
        Criterion { name: "Wasserstein axioms", limit: secs(60), run: wasserstein_axioms },
        Criterion { name: "oracle agreement", limit: secs(120), run: oracle_agreement },
        Criterion { name: "Gaussian Markov checker", limit: secs(1), run: markov },
        Criterion { name: "Monge and refugee search", limit: secs(60), run: monge_and_refugee },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (idx, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Ok(detail) if elapsed <= c.limit => ("PASS", detail),
            Ok(detail) => ("FAIL", format!("{detail}; took longer than {:?}", c.limit)),
            Err(why) => ("FAIL", why),
        };
        if verdict.0 == "FAIL" {
            failures += 1;
        }
        println!("{} {:>2} {} ({:.2?}): {}", verdict.0, idx + 1, c.name, elapsed, verdict.1);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

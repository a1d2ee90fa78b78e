use std::path::Path;

use serde_json::{json, Value};
use sot_core::bounds::{default_grid, positive_part_bound, simplex_bound, BoundDetail, BoundReport};
use sot_core::duality::{dual_certificate, equilibrium, lower_bound_certificate, verify_dual_feasibility, verify_lower_bound};
use sot_core::feasibility::{gaussian_markov_check, icx_order_feasible, kernel_feasible, SigmaClass};
use sot_core::io::{self, matrix_to_json, parse_instance, parse_matrix, parse_refugee, vector_to_json, Instance};
use sot_core::measures::DerivativeLaw;
use sot_core::monge::{monge_gap, refugee_solve, MongeAssignment};
use sot_core::oracles::{classic_ot, monge_enumerate, vertex_enumerate};
use sot_core::parity::{kernel_from_martingale, parity_solve};
use sot_core::random::{self, seeded};
use sot_core::ratlp::FarkasRay;
use sot_core::solver::kernel_lp;
use sot_core::twoway::{decompose_solve, max_off_slice_mass, slice_decomposition, wasserstein, wd_lower_bound};
use sot_core::{
    parse_rational, solve_sot, DiscreteVectorMeasure, Error, Extended, Rational, Scalar, SotOutcome,
};

use crate::{Command, DevCommand, Failure, InstanceKind, Mode, Reply};

type Outcome = Result<Reply, Failure>;

pub(crate) fn execute(cmd: &Command, mode: Mode) -> Outcome {
    match mode {
        Mode::Exact => execute_in::<Rational>(cmd),
        Mode::Float => execute_in::<f64>(cmd),
    }
}

fn execute_in<S: Scalar>(cmd: &Command) -> Outcome {
    match cmd {
        Command::Solve { instance } => solve::<S>(&load(instance)?),
        Command::Feasible { instance } => feasible::<S>(&load(instance)?),
        Command::Dual { instance } => dual::<S>(&load(instance)?),
        Command::Equilibrium { instance, production } => {
            let g = parse_matrix::<S>(&read(production)?, "production")?;
            equilibrium_cmd::<S>(&load(instance)?, &g)
        }
        Command::Decompose { instance } => decompose::<S>(&load(instance)?),
        Command::Wasserstein { instance, p } => wasserstein_cmd::<S>(&load(instance)?, &parse_rational(p)?),
        Command::Parity { instance } => parity::<S>(&load(instance)?),
        Command::Bounds { instance, grid } => bounds::<S>(&load(instance)?, *grid),
        Command::Monge { instance, nodes } => monge::<S>(&load(instance)?, *nodes),
        Command::Refugee { instance, nodes } => refugee::<S>(&read(instance)?, *nodes),
        Command::Markov { variances } => markov(variances),
        Command::Selftest { .. } => unreachable!("self-test runs before dispatch"),
        Command::Dev(dev) => {
            if !S::EXACT {
                return Err(Failure::input("dev commands run in exact mode only"));
            }
            dev_command(dev)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load<S: Scalar>(path: &Path) -> Result<Instance<S>, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn labels(m: &DiscreteVectorMeasure<impl Scalar>, idx: &[usize]) -> Value {
    idx.iter().map(|&i| Value::from(m.support()[i].label.clone())).collect()
}

fn farkas_json<S: Scalar>(ray: &FarkasRay<S>) -> Value {
    json!({ "y": vector_to_json(&ray.y) })
}

fn infeasible_reply<S: Scalar>(ray: &FarkasRay<S>) -> Reply {
    Reply::infeasible(json!({ "status": "infeasible", "farkas": farkas_json(ray) }))
}

/// Solves and turns infeasibility into an exit-2 reply with its certificate.
fn optimum_or_certificate<S: Scalar>(inst: &Instance<S>) -> Result<Result<S, Reply>, Failure> {
    match solve_sot(&inst.mu, &inst.nu, &inst.eta, inst.cost()?)? {
        SotOutcome::Optimal(r) => Ok(Ok(r.optimal_cost)),
        SotOutcome::Infeasible(ray) => Ok(Err(infeasible_reply(&ray))),
    }
}

fn solve<S: Scalar>(inst: &Instance<S>) -> Outcome {
    match solve_sot(&inst.mu, &inst.nu, &inst.eta, inst.cost()?)? {
        SotOutcome::Optimal(r) => Ok(Reply::ok(json!({
            "status": "optimal",
            "optimal_cost": r.optimal_cost.to_json(),
            "kernel": matrix_to_json(&r.kernel.rows),
            "plan": matrix_to_json(&r.plan),
            "is_balanced": r.is_balanced,
            "X": labels(&inst.mu, &(0..inst.mu.len()).collect::<Vec<_>>()),
            "Y": labels(&inst.nu, &(0..inst.nu.len()).collect::<Vec<_>>()),
        }))),
        SotOutcome::Infeasible(ray) => Ok(infeasible_reply(&ray)),
    }
}

fn law_json<S: Scalar>(law: &DerivativeLaw<S>) -> Value {
    json!({ "atoms": matrix_to_json(&law.atoms), "masses": vector_to_json(&law.masses) })
}

fn feasible<S: Scalar>(inst: &Instance<S>) -> Outcome {
    let report = kernel_feasible(&inst.mu, &inst.nu)?;
    let (mu, nu) = (inst.mu.trim(), inst.nu.trim());
    let (law_mu, law_nu) = (mu.derivative_law()?, nu.derivative_law()?);
    let order = icx_order_feasible(&law_mu, &law_nu)?;
    let body = json!({
        "feasible": report.feasible,
        "witness_kernel": report.witness_kernel.map(|k| matrix_to_json(&k.rows)),
        "farkas": report.farkas.as_ref().map(farkas_json),
        "order_feasible": order.feasible,
        "order_witness": order.order_witness.map(|r| matrix_to_json(&r)),
        "law_mu": law_json(&law_mu),
        "law_nu": law_json(&law_nu),
    });
    Ok(if report.feasible { Reply::ok(body) } else { Reply { body, code: crate::EXIT_INFEASIBLE } })
}

fn dual<S: Scalar>(inst: &Instance<S>) -> Outcome {
    let cost = inst.cost()?;
    if let Err(reply) = optimum_or_certificate(inst)? {
        return Ok(reply);
    }
    if inst.eta.equivalent {
        let cert = dual_certificate(&inst.mu, &inst.nu, &inst.eta, cost)?;
        let verified = verify_dual_feasibility(&cert, &inst.mu, &inst.eta, cost);
        Ok(Reply::ok(json!({
            "kind": "dual",
            "phi": vector_to_json(&cert.phi),
            "psi": matrix_to_json(&cert.psi),
            "dual_value": cert.dual_value.to_json(),
            "primal_value": cert.primal_value.to_json(),
            "gap": cert.gap.to_json(),
            "balanced": cert.balanced,
            "verified": verified,
        })))
    } else {
        let cert = lower_bound_certificate(&inst.mu, &inst.nu, &inst.eta, cost)?;
        let verified = verify_lower_bound(&cert, &inst.mu, &inst.eta, cost);
        Ok(Reply::ok(json!({
            "kind": "lower_bound",
            "alpha": vector_to_json(&cert.alpha),
            "psi": matrix_to_json(&cert.psi),
            "value": cert.value.to_json(),
            "verified": verified,
        })))
    }
}

fn equilibrium_cmd<S: Scalar>(inst: &Instance<S>, production: &[Vec<S>]) -> Outcome {
    let eq = equilibrium(&inst.mu, &inst.nu, &inst.eta, production)?;
    Ok(Reply::ok(json!({
        "wage": vector_to_json(&eq.wage),
        "profit_per_skill": matrix_to_json(&eq.profit_per_skill),
        "matching": matrix_to_json(&eq.matching),
        "kernel": matrix_to_json(&eq.kernel.rows),
        "production_value": eq.production_value.to_json(),
        "stable": eq.is_stable(&inst.mu, &inst.eta, production),
    })))
}

fn decompose<S: Scalar>(inst: &Instance<S>) -> Outcome {
    let res = decompose_solve(&inst.mu, &inst.nu, inst.cost()?)?;
    let dec = slice_decomposition(&inst.mu, &inst.nu)?;
    let off = max_off_slice_mass(&inst.mu, &inst.nu, &dec)?;
    let slices: Vec<Value> = dec
        .slices
        .iter()
        .zip(&res.per_slice)
        .map(|(s, value)| {
            json!({
                "z": vector_to_json(&s.z),
                "mass": s.mass.to_json(),
                "X": labels(&inst.mu, &s.x_members),
                "Y": labels(&inst.nu, &s.y_members),
                "value": value.to_json(),
            })
        })
        .collect();
    Ok(Reply::ok(json!({
        "total": res.total.to_json(),
        "slices": slices,
        "kernel": matrix_to_json(&res.kernel.rows),
        "max_off_slice_mass": off.to_json(),
    })))
}

fn wasserstein_cmd<S: Scalar>(inst: &Instance<S>, p: &Rational) -> Outcome {
    let w = wasserstein(&inst.mu, &inst.nu, p)?;
    let lower = wd_lower_bound(&inst.mu, &inst.nu, p)?;
    Ok(Reply::ok(json!({
        "p": p.to_string(),
        "power": w.power.to_json(),
        "distance": w.distance,
        "per_slice": vector_to_json(&w.per_slice),
        "lower_bound": lower.to_json(),
    })))
}

fn parity<S: Scalar>(inst: &Instance<S>) -> Outcome {
    let res = parity_solve(&inst.mu, &inst.nu, inst.cost()?)?;
    let kernel = kernel_from_martingale(&res.coupling, &inst.mu, &inst.nu)?;
    Ok(Reply::ok(json!({
        "mot_value": res.mot_value.to_json(),
        "sot_value": res.sot_value.to_json(),
        "equal": res.equal,
        "coupling": matrix_to_json(&res.coupling.r),
        "reduced_cost": matrix_to_json(&res.reduced_cost.entries),
        "kernel": matrix_to_json(&kernel.rows),
        "law_mu": law_json(&inst.mu.derivative_law()?),
        "law_nu": law_json(&inst.nu.derivative_law()?),
    })))
}

fn bound_json<S: Scalar>(b: &BoundReport<S>) -> Value {
    let detail = match &b.detail {
        BoundDetail::Lambda(l) => json!({ "lambda": vector_to_json(l) }),
        BoundDetail::Pair(i, j) => json!({ "pair": [i, j] }),
        BoundDetail::None => json!({}),
    };
    json!({ "value": b.value.to_json(), "applicable": b.applicable, "detail": detail })
}

fn bounds<S: Scalar>(inst: &Instance<S>, grid: Option<usize>) -> Outcome {
    let cost = inst.cost()?;
    let grid = grid.unwrap_or_else(|| default_grid(inst.mu.dim()));
    let simplex = simplex_bound(&inst.mu, &inst.nu, &inst.eta, cost, grid)?;
    let positive = match positive_part_bound(&inst.mu, &inst.nu, &inst.eta, cost) {
        Ok(b) => bound_json(&b),
        Err(Error::UnbalancedInput(why)) => json!({ "error": format!("unbalanced input: {why}") }),
        Err(e) => return Err(e.into()),
    };
    let optimum = solve_sot(&inst.mu, &inst.nu, &inst.eta, cost)?.optimal_cost();
    Ok(Reply::ok(json!({
        "grid": grid,
        "optimum": optimum.to_json(),
        "simplex": bound_json(&simplex),
        "positive_part": positive,
    })))
}

fn map_json(map: &[Option<usize>], target: impl Fn(usize) -> String) -> Value {
    map.iter().map(|t| t.map_or(Value::Null, |k| Value::from(target(k)))).collect()
}

fn assignment_json<S: Scalar>(a: &MongeAssignment<S>, target: impl Fn(usize) -> String) -> Value {
    json!({
        "map": map_json(&a.map, target),
        "optimal": a.optimal,
        "nodes": a.nodes,
    })
}

fn monge<S: Scalar>(inst: &Instance<S>, nodes: u64) -> Outcome {
    let cost = inst.cost()?;
    if let Err(reply) = optimum_or_certificate(inst)? {
        return Ok(reply);
    }
    let gap = monge_gap(&inst.mu, &inst.nu, &inst.eta, cost, nodes)?;
    let target = |k: usize| inst.nu.support()[k].label.clone();
    let body = json!({
        "status": if gap.monge.is_some() { "optimal" } else { "no_map" },
        "monge_cost": gap.monge_cost.to_json(),
        "kernel_cost": gap.kernel_cost.to_json(),
        "gap": gap.gap.to_json(),
        "assignment": gap.monge.as_ref().map(|a| assignment_json(a, target)),
    });
    Ok(if gap.monge.is_some() { Reply::ok(body) } else { Reply::infeasible(body) })
}

fn refugee<S: Scalar>(text: &str, nodes: u64) -> Outcome {
    let inst = parse_refugee::<S>(text)?;
    match refugee_solve(&inst, nodes) {
        Ok(a) => {
            let placement: serde_json::Map<String, Value> = inst
                .family_ids
                .iter()
                .zip(&a.map)
                .map(|(f, t)| (f.clone(), t.map_or(Value::Null, |l| inst.affiliate_ids[l].clone().into())))
                .collect();
            Ok(Reply::ok(json!({
                "status": "optimal",
                "value": a.cost_or_value.to_json(),
                "placement": placement,
                "optimal": a.optimal,
                "nodes": a.nodes,
            })))
        }
        Err(Error::Infeasible) => Ok(Reply::infeasible(json!({ "status": "infeasible" }))),
        Err(e) => Err(e.into()),
    }
}

fn markov(values: &[String]) -> Outcome {
    let values = values.iter().map(|v| parse_rational(v)).collect::<Result<Vec<_>, _>>()?;
    let report = gaussian_markov_check(&values)?;
    let class = match report.classification {
        SigmaClass::IncreasingLogConcave => "increasing_log_concave",
        SigmaClass::DecreasingLogConvex => "decreasing_log_convex",
        SigmaClass::NeitherInfeasible => "neither_infeasible",
    };
    let body = json!({
        "classification": class,
        "sufficient": report.sufficient,
        "covered": report.covered,
    });
    Ok(if report.classification == SigmaClass::NeitherInfeasible {
        Reply::infeasible(body)
    } else {
        Reply::ok(body)
    })
}

fn dev_command(dev: &DevCommand) -> Outcome {
    match dev {
        DevCommand::VertexEnumerate { instance } => {
            let inst: Instance = load(instance)?;
            let lp = kernel_lp(&inst.mu, &inst.nu, &inst.eta, inst.cost()?)?;
            let res = vertex_enumerate(&lp)?;
            let body = json!({
                "value": res.value.to_json(),
                "witness": vector_to_json(&res.witness),
                "count": res.count,
            });
            Ok(if matches!(res.value, Extended::Infinite) { Reply::infeasible(body) } else { Reply::ok(body) })
        }
        DevCommand::ClassicOt { instance } => {
            let inst: Instance = load(instance)?;
            if inst.mu.dim() != 1 {
                return Err(Failure::input("classic-ot needs a single component"));
            }
            let res = classic_ot(&inst.mu.weights()[0], &inst.nu.weights()[0], inst.cost()?.entries())?;
            Ok(Reply::ok(json!({
                "value": res.value.to_json(),
                "plan": vector_to_json(&res.witness),
                "count": res.count,
            })))
        }
        DevCommand::MongeEnumerate { instance } => {
            let inst: Instance = load(instance)?;
            let res = monge_enumerate(&inst.mu, &inst.nu, &inst.eta, inst.cost()?)?;
            let target = |k: usize| inst.nu.support()[k].label.clone();
            let body = json!({
                "best": res.best.as_ref().map(|(v, map)| json!({ "value": v.to_json(), "map": map_json(map, target) })),
                "count": res.count,
            });
            Ok(if res.best.is_some() { Reply::ok(body) } else { Reply::infeasible(body) })
        }
        DevCommand::RandomInstance { seed, kind, d, n, m } => random_instance(*seed, *kind, *d, *n, *m),
    }
}

fn random_instance(seed: u64, kind: InstanceKind, d: usize, n: usize, m: usize) -> Outcome {
    if d == 0 || n == 0 || m == 0 {
        return Err(Failure::input("d, n and m must be positive"));
    }
    let mut rng = seeded(seed);
    let (mu, nu) = match kind {
        InstanceKind::Refugee => {
            return Ok(Reply::ok(io::refugee_to_json(&random::refugee_instance(&mut rng, n, m, d))));
        }
        InstanceKind::Feasible => random::feasible_pair(&mut rng, d, n, m),
        InstanceKind::Independent => random::independent_pair(&mut rng, d, n, m),
        InstanceKind::Twoway => random::twoway_pair(&mut rng, d, n.min(m), 2),
        InstanceKind::Injective => {
            if d == 1 && (n > 1 || m > 1) {
                return Err(Failure::input("injective profiles need d >= 2 unless n = m = 1"));
            }
            random::injective_pair(&mut rng, d, n, m)
        }
    };
    let cost = random::random_cost(&mut rng, mu.len(), nu.len(), 9);
    let eta = sot_core::ReferenceMeasure::mubar(&mu)?;
    let inst = Instance { mu, nu, eta, cost: Some(cost) };
    Ok(Reply::ok(io::instance_to_json(&inst)))
}

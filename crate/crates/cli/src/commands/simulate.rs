use rayon::prelude::*;
use roadcalc::bounds::{delay_bound, AffineArrival};
use roadcalc::ctm_sim::{
    check_couple, inflate_beta, measure_virtual_delays, random_inflow, seeded_rng, simulate,
    SimConfig, SimError, SimTrace, Violation,
};
use roadcalc::road_model::{
    fundamental_flow, service_couple_density, service_couple_relaxed, Occupancy,
};
use roadcalc::value::{serde_q, serde_value};
use roadcalc::{qi, RingRoad, ServiceCouple, Value, Q};
use serde::Serialize;

use super::Status;
use crate::config::{ScenarioConfig, SimBlock};
use crate::error::CliError;
use crate::output::{slug, warn, OutDir};

#[derive(Serialize)]
struct FirstViolation {
    run: usize,
    #[serde(flatten)]
    at: Violation,
}

#[derive(Serialize)]
struct CaseSummary {
    road: String,
    #[serde(with = "serde_q")]
    rho: Q,
    couple: &'static str,
    #[serde(with = "serde_q")]
    sigma: Q,
    #[serde(with = "serde_q")]
    r: Q,
    #[serde(with = "serde_value")]
    delay_bound: Value,
    runs: usize,
    runs_violating_couple: usize,
    runs_exceeding_delay: usize,
    first_violation: Option<FirstViolation>,
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    negative_control: bool,
    steps: usize,
    violations: bool,
    cases: Vec<CaseSummary>,
}

struct RunResult {
    trace: Option<SimTrace>,
    /// Per couple: first violation and whether the delay bound was exceeded.
    checks: Vec<(Option<Violation>, bool)>,
}

pub fn run(
    cfg: &ScenarioConfig,
    out: &OutDir,
    seed: Option<u64>,
    negative_control: bool,
) -> Result<Status, CliError> {
    let Some(sim) = &cfg.sim else {
        return Err(CliError::Config("simulate needs a sim block".into()));
    };
    let seed = seed.unwrap_or(sim.seed);
    let steps = sim.steps()?;
    if steps == 0 {
        warn("sim.horizon is 0, traces hold only the initial instant and nothing is checked");
    }
    let mut cases = Vec::new();
    let mut case_index = 0u64;
    for road_case in &cfg.roads {
        for rho in &road_case.densities {
            let couples = couples(&road_case.road, rho, sim, negative_control)?;
            let q = fundamental_flow(&road_case.road, rho)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let alpha = AffineArrival::new(sim.sigma.clone(), &q * &sim.rate_fraction);
            let bounds: Vec<Value> = couples
                .iter()
                .map(|(_, c)| delay_bound(&alpha.curve(), c))
                .collect();
            let counts = Occupancy::Density(rho.clone()).counts(&road_case.road);
            let base = seed.wrapping_add(case_index.wrapping_mul(1_000_003));
            case_index += 1;
            let results: Vec<RunResult> = (0..sim.runs)
                .into_par_iter()
                .map(|i| {
                    let mut rng = seeded_rng(base.wrapping_add(i as u64));
                    let u = random_inflow(&mut rng, &sim.dt, steps, &alpha.r, &alpha.sigma);
                    let cfg = SimConfig::new(sim.dt.clone(), steps, u.clone());
                    let trace = simulate(&road_case.road, &counts, &cfg)?;
                    let checks = if steps == 0 {
                        vec![(None, false); couples.len()]
                    } else {
                        couples
                            .iter()
                            .zip(&bounds)
                            .map(|((_, c), b)| {
                                (
                                    check_couple(&trace, &u, c).into_iter().next(),
                                    delay_exceeded(&trace, &u, b),
                                )
                            })
                            .collect()
                    };
                    Ok(RunResult {
                        trace: (i < sim.export_traces).then_some(trace),
                        checks,
                    })
                })
                .collect::<Result<_, SimError>>()
                .map_err(|e| CliError::Config(format!("road {}: {e}", road_case.name)))?;
            let stem = format!(
                "trace_{}_rho_{}",
                slug(&road_case.name),
                slug(&rho.to_string())
            );
            for (i, r) in results.iter().enumerate() {
                if let Some(trace) = &r.trace {
                    out.write(&format!("{stem}_run_{i}.csv"), &trace.to_csv())?;
                }
            }
            for (j, (name, _)) in couples.iter().enumerate() {
                let first_violation = results.iter().enumerate().find_map(|(run, r)| {
                    r.checks[j].0.clone().map(|at| FirstViolation { run, at })
                });
                cases.push(CaseSummary {
                    road: road_case.name.clone(),
                    rho: rho.clone(),
                    couple: name,
                    sigma: alpha.sigma.clone(),
                    r: alpha.r.clone(),
                    delay_bound: bounds[j].clone(),
                    runs: sim.runs,
                    runs_violating_couple: results
                        .iter()
                        .filter(|r| r.checks[j].0.is_some())
                        .count(),
                    runs_exceeding_delay: results.iter().filter(|r| r.checks[j].1).count(),
                    first_violation,
                });
            }
        }
    }
    if cases.is_empty() {
        warn("no densities configured, nothing to simulate");
    }
    let violations = cases
        .iter()
        .any(|c| c.runs_violating_couple > 0 || c.runs_exceeding_delay > 0);
    for c in &cases {
        println!(
            "{} rho {} {}: couple violated in {}/{} runs, delay bound {} exceeded in {}/{} runs",
            c.road,
            c.rho,
            c.couple,
            c.runs_violating_couple,
            c.runs,
            c.delay_bound,
            c.runs_exceeding_delay,
            c.runs
        );
    }
    out.write_json(
        "simulate_summary.json",
        &Summary {
            seed,
            negative_control,
            steps,
            violations,
            cases,
        },
    )?;
    Ok(if violations {
        Status::Violations
    } else {
        Status::Clean
    })
}

fn couples(
    road: &RingRoad,
    rho: &Q,
    sim: &SimBlock,
    negative_control: bool,
) -> Result<Vec<(&'static str, ServiceCouple)>, CliError> {
    sim.couple
        .names()
        .iter()
        .map(|&name| {
            let couple = match name {
                "density" => service_couple_density(road, rho),
                _ => service_couple_relaxed(road, rho),
            }
            .map_err(|e| CliError::Config(e.to_string()))?;
            // the control lifts β by one vehicle, which a sound detector must flag
            let couple = if negative_control {
                inflate_beta(&couple, &qi(1))
            } else {
                couple
            };
            Ok((name, couple))
        })
        .collect()
}

/// Some vehicle took longer than `bound + dt`, or is still inside although
/// that much time has passed since it entered.
fn delay_exceeded(trace: &SimTrace, u: &[Value], bound: &Value) -> bool {
    let Value::Finite(bound) = bound else {
        return false;
    };
    let limit = bound + &trace.dt;
    let Some(horizon) = trace.times.last() else {
        return false;
    };
    measure_virtual_delays(trace, u)
        .into_iter()
        .any(|(t, d)| match d {
            Some(d) => d > limit,
            None => &(&t + &limit) < horizon,
        })
}

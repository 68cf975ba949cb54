use rayon::prelude::*;
use roadcalc::plot::{Chart, Series};
use roadcalc::road_model::service_couple_density;
use roadcalc::value::serde_q;
use roadcalc::{ServiceCouple, Q};
use serde::Serialize;

use super::Status;
use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{cell, cell_q, slug, warn, OutDir};

#[derive(Serialize)]
struct CoupleDump<'a> {
    #[serde(with = "serde_q")]
    rho: Q,
    couple: &'a ServiceCouple,
}

pub fn run(cfg: &ScenarioConfig, out: &OutDir) -> Result<Status, CliError> {
    let cases: Vec<(usize, Q)> = cfg
        .roads
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.densities.iter().map(move |rho| (i, rho.clone())))
        .collect();
    if cases.is_empty() {
        warn("no densities configured, nothing to plot");
        return Ok(Status::Clean);
    }
    let couples: Vec<ServiceCouple> = cases
        .par_iter()
        .map(|(i, rho)| service_couple_density(&cfg.roads[*i].road, rho))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let grid = grid(&cfg.curves.horizon, &cfg.curves.step);
    for ((i, rho), couple) in cases.iter().zip(&couples) {
        let stem = format!(
            "curves_{}_rho_{}",
            slug(&cfg.roads[*i].name),
            slug(&rho.to_string())
        );
        let mut csv = String::from("t,beta,lambda,min\n");
        let combined = couple.combined();
        for t in &grid {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                cell_q(t),
                cell(&couple.beta.eval(t)),
                cell(&couple.lambda.eval(t)),
                cell(&combined.eval(t))
            ));
        }
        out.write(&format!("{stem}.csv"), &csv)?;
        let h = &cfg.curves.horizon;
        let chart = Chart::new(format!("Service couple, density {rho}"), "t", "vehicles")
            .with(Series::of_curve("beta", &couple.beta, h))
            .with(Series::of_curve("lambda", &couple.lambda, h).dashed());
        out.write(&format!("{stem}.svg"), &chart.to_svg())?;
    }
    for (i, case) in cfg.roads.iter().enumerate() {
        let dump: Vec<CoupleDump> = cases
            .iter()
            .zip(&couples)
            .filter(|((j, _), _)| *j == i)
            .map(|((_, rho), couple)| CoupleDump {
                rho: rho.clone(),
                couple,
            })
            .collect();
        if !dump.is_empty() {
            out.write_json(&format!("curves_{}.json", slug(&case.name)), &dump)?;
        }
    }
    Ok(Status::Clean)
}

fn grid(h: &Q, step: &Q) -> Vec<Q> {
    let mut out = Vec::new();
    let mut t = Q::default();
    while &t <= h {
        out.push(t.clone());
        t += step;
    }
    out
}

use rayon::prelude::*;
use roadcalc::bounds::{bound_report, BoundReport};
use roadcalc::composition::{path_service, path_travel_time_bound};
use roadcalc::value::serde_value;
use roadcalc::{ServiceCouple, Value};
use serde::Serialize;

use super::Status;
use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{cell, warn, OutDir};

#[derive(Serialize)]
struct PathResult {
    path: String,
    edges: Vec<String>,
    /// Cross traffic can take the whole service somewhere on the path.
    degenerate: bool,
    couple: ServiceCouple,
    #[serde(with = "serde_value")]
    travel_time_bound: Value,
    report: BoundReport,
}

pub fn run(cfg: &ScenarioConfig, out: &OutDir) -> Result<Status, CliError> {
    let Some(net) = &cfg.network else {
        return Err(CliError::Config("compose needs a network block".into()));
    };
    if net.paths.is_empty() {
        warn("no paths declared, nothing to compose");
        return Ok(Status::Clean);
    }
    let alpha = net.arrival.curve();
    let results: Vec<PathResult> = net
        .paths
        .par_iter()
        .map(|p| {
            let edges: Vec<&str> = p.edges.iter().map(String::as_str).collect();
            let config = |e: roadcalc::composition::NetworkError| {
                CliError::Config(format!("path {}: {e}", p.label()))
            };
            let residual = path_service(&net.graph, &edges).map_err(config)?;
            let travel_time_bound =
                path_travel_time_bound(&net.graph, &edges, &net.arrival).map_err(config)?;
            let mut report = bound_report(&alpha, &residual.couple);
            if residual.degenerate {
                report.tau_max = Value::Infinite;
                report.b_max = Value::Infinite;
                report
                    .diagnostic
                    .get_or_insert_with(|| "cross traffic saturates a merge on this path".into());
            }
            Ok(PathResult {
                path: p.label(),
                edges: p.edges.clone(),
                degenerate: residual.degenerate,
                couple: residual.couple,
                travel_time_bound,
                report,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mut csv = String::from("path,tau_max,b_max\n");
    for r in &results {
        csv.push_str(&format!(
            "{},{},{}\n",
            r.path,
            cell(&r.travel_time_bound),
            cell(&r.report.b_max)
        ));
        println!("{}: travel time bound {}", r.path, r.travel_time_bound);
    }
    out.write("compose.csv", &csv)?;
    out.write_json("compose.json", &results)?;
    Ok(Status::Clean)
}

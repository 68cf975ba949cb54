use rayon::prelude::*;
use roadcalc::bounds::{road_bounds, AffineArrival, BoundReport};
use roadcalc::plot::{Chart, Series};
use roadcalc::road_model::avg_travel_time;
use roadcalc::value::{serde_q, to_f64};
use roadcalc::{Value, Q};
use serde::Serialize;

use super::Status;
use crate::config::{NamedArrival, ScenarioConfig};
use crate::error::CliError;
use crate::output::{cell, cell_q, slug, warn, OutDir};

#[derive(Serialize)]
struct Row {
    #[serde(with = "serde_q")]
    rho: Q,
    #[serde(with = "serde_q")]
    tau: Q,
    report: BoundReport,
}

pub fn run(cfg: &ScenarioConfig, out: &OutDir) -> Result<Status, CliError> {
    let points = cfg.sweep.as_ref().map(|s| s.points()).unwrap_or_default();
    if points.is_empty() || cfg.roads.is_empty() {
        warn("empty density sweep, nothing to compute");
        return Ok(Status::Clean);
    }
    let zero = [NamedArrival {
        name: "zero_burst".into(),
        sigma: Q::default(),
        r: Q::default(),
    }];
    let arrivals: &[NamedArrival] = if cfg.arrivals.is_empty() {
        &zero
    } else {
        &cfg.arrivals
    };
    for case in &cfg.roads {
        // densities at or beyond jam, or at zero, have no travel time
        let valid: Vec<Q> = points
            .iter()
            .filter(|rho| avg_travel_time(&case.road, rho).is_ok())
            .cloned()
            .collect();
        if valid.len() < points.len() {
            warn(format!(
                "road {}: {} sweep points outside (0, rho_j) skipped",
                case.name,
                points.len() - valid.len()
            ));
        }
        for named in arrivals {
            let alpha: AffineArrival = named.arrival();
            let rows: Vec<Row> = valid
                .par_iter()
                .map(|rho| Row {
                    rho: rho.clone(),
                    tau: avg_travel_time(&case.road, rho).expect("filtered above"),
                    report: road_bounds(&case.road, rho, &alpha).expect("filtered above"),
                })
                .collect();
            let stem = format!("bounds_{}_{}", slug(&case.name), slug(&named.name));
            let mut csv = String::from("rho,tau,tau_max,b_max\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    cell_q(&r.rho),
                    cell_q(&r.tau),
                    cell(&r.report.tau_max),
                    cell(&r.report.b_max)
                ));
            }
            out.write(&format!("{stem}.csv"), &csv)?;
            out.write_json(&format!("{stem}.json"), &rows)?;
            let finite = |v: &Value| match v {
                Value::Finite(x) => Some(to_f64(x)),
                Value::Infinite => None,
            };
            let avg = rows
                .iter()
                .map(|r| (to_f64(&r.rho), to_f64(&r.tau)))
                .collect();
            let worst = rows
                .iter()
                .filter_map(|r| finite(&r.report.tau_max).map(|y| (to_f64(&r.rho), y)))
                .collect();
            let chart = Chart::new(
                format!("Travel time on {}, inflow {}", case.name, named.name),
                "density",
                "travel time",
            )
            .with(Series::new("average", avg))
            .with(Series::new("worst case", worst).dashed());
            out.write(&format!("{stem}.svg"), &chart.to_svg())?;
        }
    }
    Ok(Status::Clean)
}

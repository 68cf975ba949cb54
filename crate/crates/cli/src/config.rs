//! Scenario configuration: one JSON document, rationals as `"num/den"` or
//! decimal strings (plain JSON numbers are accepted too).

use std::path::Path;

use num::Signed;
use roadcalc::bounds::AffineArrival;
use roadcalc::composition::RoadNetwork;
use roadcalc::road_model::fundamental_flow;
use roadcalc::value::serde_q;
use roadcalc::{q, qi, RingRoad, Q};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub roads: Vec<RoadCase>,
    #[serde(default)]
    pub arrivals: Vec<NamedArrival>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub curves: CurveSampling,
    #[serde(default)]
    pub sim: Option<SimBlock>,
    #[serde(default)]
    pub network: Option<NetworkBlock>,
}

/// A ring road and the densities it is studied at.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadCase {
    pub name: String,
    pub road: RingRoad,
    #[serde(default, with = "serde_q::vec")]
    pub densities: Vec<Q>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedArrival {
    pub name: String,
    #[serde(with = "serde_q")]
    pub sigma: Q,
    #[serde(with = "serde_q")]
    pub r: Q,
}

impl NamedArrival {
    pub fn arrival(&self) -> AffineArrival {
        AffineArrival::new(self.sigma.clone(), self.r.clone())
    }
}

/// Evenly spaced densities `start, start + step, …` up to `stop`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(with = "serde_q")]
    pub start: Q,
    #[serde(with = "serde_q")]
    pub stop: Q,
    #[serde(with = "serde_q")]
    pub step: Q,
}

impl Sweep {
    pub fn points(&self) -> Vec<Q> {
        let mut out = Vec::new();
        let mut x = self.start.clone();
        while x <= self.stop {
            out.push(x.clone());
            x += &self.step;
        }
        out
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSampling {
    #[serde(with = "serde_q")]
    pub horizon: Q,
    #[serde(with = "serde_q")]
    pub step: Q,
}

impl Default for CurveSampling {
    fn default() -> Self {
        CurveSampling {
            horizon: qi(40),
            step: q(1, 4),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoupleKind {
    /// `([h − N]^+, e ⊕ CA*E)` from the uniform-density analysis.
    Density,
    /// The rate-latency relaxation of the former.
    Relaxed,
    #[default]
    Both,
}

impl CoupleKind {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            CoupleKind::Density => &["density"],
            CoupleKind::Relaxed => &["relaxed"],
            CoupleKind::Both => &["density", "relaxed"],
        }
    }
}

/// Randomized soundness suite.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    #[serde(default = "one", with = "serde_q")]
    pub dt: Q,
    #[serde(with = "serde_q")]
    pub horizon: Q,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one", with = "serde_q")]
    pub sigma: Q,
    /// Inflow rate as a fraction of `q(ρ)`.
    #[serde(default = "three_quarters", with = "serde_q")]
    pub rate_fraction: Q,
    #[serde(default)]
    pub couple: CoupleKind,
    /// Traces written per (road, density); the rest are only checked.
    #[serde(default = "one_usize")]
    pub export_traces: usize,
}

impl SimBlock {
    pub fn steps(&self) -> Result<usize, CliError> {
        let n = &self.horizon / &self.dt;
        if !n.is_integer() {
            return Err(CliError::Config(format!(
                "sim.horizon {} is not a multiple of sim.dt {}",
                self.horizon, self.dt
            )));
        }
        n.to_integer()
            .try_into()
            .map_err(|_| CliError::Config("sim.horizon is too large".into()))
    }
}

fn one() -> Q {
    qi(1)
}

fn three_quarters() -> Q {
    q(3, 4)
}

fn one_usize() -> usize {
    1
}

fn default_runs() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub edges: Vec<String>,
}

impl PathSpec {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.edges.join("-"))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBlock {
    pub graph: RoadNetwork,
    pub paths: Vec<PathSpec>,
    /// Inflow of the tagged flow at each path origin.
    pub arrival: AffineArrival,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        for case in &self.roads {
            case.road
                .validate()
                .map_err(|e| CliError::Config(format!("road {}: {e}", case.name)))?;
            for rho in &case.densities {
                fundamental_flow(&case.road, rho)
                    .map_err(|e| CliError::Config(format!("road {}: {e}", case.name)))?;
            }
        }
        for a in &self.arrivals {
            if a.sigma.is_negative() || a.r.is_negative() {
                return bad(format!(
                    "arrival {}: sigma and r must be nonnegative",
                    a.name
                ));
            }
        }
        if let Some(s) = &self.sweep {
            if !s.step.is_positive() {
                return bad("sweep.step must be positive".into());
            }
        }
        if !self.curves.step.is_positive() || self.curves.horizon.is_negative() {
            return bad("curves.step must be positive and curves.horizon nonnegative".into());
        }
        if let Some(sim) = &self.sim {
            if !sim.dt.is_positive() || sim.horizon.is_negative() || sim.sigma.is_negative() {
                return bad(
                    "sim.dt must be positive, sim.horizon and sim.sigma nonnegative".into(),
                );
            }
            if !sim.rate_fraction.is_positive() {
                return bad("sim.rate_fraction must be positive".into());
            }
            sim.steps()?;
        }
        if let Some(net) = &self.network {
            net.graph
                .validate()
                .map_err(|e| CliError::Config(format!("network: {e}")))?;
            if net.arrival.sigma.is_negative() || net.arrival.r.is_negative() {
                return bad("network.arrival: sigma and r must be nonnegative".into());
            }
            if net.paths.iter().any(|p| p.edges.is_empty()) {
                return bad("network.paths: a path needs at least one edge".into());
            }
        }
        Ok(())
    }
}

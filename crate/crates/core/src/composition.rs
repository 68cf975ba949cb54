//! Service couples along paths of a tree-shaped road network.
//!
//! Argument order for [`series`] follows the output-side convention:
//! the first couple is the downstream server.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{delay_bound, AffineArrival};
use crate::minplus::Curve;
use crate::road_model::{
    service_couple_density, service_couple_exact, Occupancy, RingRoad, RoadError, ServiceCouple,
};
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate id `{0}`")]
    Duplicate(String),
    #[error("edges `{0}` and `{1}` are not consecutive")]
    Disconnected(String, String),
    #[error("node `{0}` joins several roads but declares no merge")]
    MissingMerge(String),
    #[error("cycle through node `{0}`: cyclic dependencies of inflows are not supported")]
    Cyclic(String),
    #[error("empty path")]
    EmptyPath,
    #[error("edge `{edge}`: {source}")]
    Road { edge: String, source: RoadError },
}

/// `(β₁ * β₂, β₁ * λ₂ ⊕ λ₁)`: `downstream` serves the output of `upstream`.
pub fn series(downstream: &ServiceCouple, upstream: &ServiceCouple) -> ServiceCouple {
    ServiceCouple {
        beta: downstream.beta.conv(&upstream.beta),
        lambda: downstream
            .beta
            .conv(&upstream.lambda)
            .min(&downstream.lambda),
    }
}

/// Couple left to a tagged flow, plus whether it has stopped growing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub couple: ServiceCouple,
    pub degenerate: bool,
}

/// Strategy for sharing a road between the tagged flow and cross traffic.
pub trait ResidualPolicy {
    fn residual(&self, total: &ServiceCouple, cross: &Curve) -> Residual;
}

/// Declared merge policies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergePolicy {
    /// Cross traffic may take any share: `sup_{s ≤ t} [β(s) − α_cross(s)]^+`.
    #[default]
    BlindMultiplexing,
}

impl ResidualPolicy for MergePolicy {
    fn residual(&self, total: &ServiceCouple, cross: &Curve) -> Residual {
        match self {
            MergePolicy::BlindMultiplexing => {
                let couple = ServiceCouple {
                    beta: total.beta.residual(cross),
                    lambda: total.lambda.residual(cross),
                };
                let degenerate = match (total.beta.long_run_rate(), cross.long_run_rate()) {
                    (Some(service), Some(load)) => service <= load,
                    (Some(_), None) => true,
                    (None, _) => false,
                };
                Residual { couple, degenerate }
            }
        }
    }
}

pub fn residual_merge(
    total: &ServiceCouple,
    cross: &Curve,
    policy: &impl ResidualPolicy,
) -> Residual {
    policy.residual(total, cross)
}

/// A ring-road segment between two intersections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub road: RingRoad,
    pub occupancy: Occupancy,
}

impl Edge {
    /// Density couple for a uniform occupancy, count-based couple otherwise.
    pub fn couple(&self) -> Result<ServiceCouple, NetworkError> {
        let couple = match &self.occupancy {
            Occupancy::Density(rho) => service_couple_density(&self.road, rho),
            Occupancy::Counts(n) => service_couple_exact(&self.road, n),
        };
        couple.map_err(|source| NetworkError::Road {
            edge: self.id.clone(),
            source,
        })
    }
}

/// Cross traffic joining the tagged flow at `node`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub node: String,
    pub cross: AffineArrival,
    #[serde(default)]
    pub policy: MergePolicy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub merges: Vec<Merge>,
}

impl RoadNetwork {
    /// Checks ids, endpoints, road parameters and acyclicity.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let mut nodes = BTreeSet::new();
        for n in &self.nodes {
            if !nodes.insert(n.as_str()) {
                return Err(NetworkError::Duplicate(n.clone()));
            }
        }
        let mut edges = BTreeSet::new();
        for e in &self.edges {
            if !edges.insert(e.id.as_str()) {
                return Err(NetworkError::Duplicate(e.id.clone()));
            }
            for end in [&e.from, &e.to] {
                if !nodes.contains(end.as_str()) {
                    return Err(NetworkError::UnknownNode(end.clone()));
                }
            }
            let checked = e
                .road
                .validate()
                .and_then(|_| e.occupancy.validate(&e.road));
            checked.map_err(|source| NetworkError::Road {
                edge: e.id.clone(),
                source,
            })?;
        }
        for m in &self.merges {
            if !nodes.contains(m.node.as_str()) {
                return Err(NetworkError::UnknownNode(m.node.clone()));
            }
        }
        self.check_acyclic()
    }

    fn check_acyclic(&self) -> Result<(), NetworkError> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            out.entry(e.from.as_str()).or_default().push(e.to.as_str());
        }
        // 0 = unseen, 1 = on the stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        for start in &self.nodes {
            if state.get(start.as_str()).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut stack = vec![(start.as_str(), 0usize)];
            state.insert(start, 1);
            while let Some((node, next)) = stack.pop() {
                let succ = out.get(node).map(Vec::as_slice).unwrap_or(&[]);
                if let Some(&to) = succ.get(next) {
                    stack.push((node, next + 1));
                    match state.get(to).copied().unwrap_or(0) {
                        0 => {
                            state.insert(to, 1);
                            stack.push((to, 0));
                        }
                        1 => return Err(NetworkError::Cyclic(to.to_string())),
                        _ => {}
                    }
                } else {
                    state.insert(node, 2);
                }
            }
        }
        Ok(())
    }

    pub fn edge(&self, id: &str) -> Result<&Edge, NetworkError> {
        self.edges
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| NetworkError::UnknownEdge(id.to_string()))
    }

    fn merge_at(&self, node: &str) -> Option<&Merge> {
        self.merges.iter().find(|m| m.node == node)
    }

    fn in_degree(&self, node: &str) -> usize {
        self.edges.iter().filter(|e| e.to == node).count()
    }

    fn resolve<'a>(&'a self, path: &[&str]) -> Result<Vec<&'a Edge>, NetworkError> {
        let edges = path
            .iter()
            .map(|id| self.edge(id))
            .collect::<Result<Vec<_>, _>>()?;
        if edges.is_empty() {
            return Err(NetworkError::EmptyPath);
        }
        for w in edges.windows(2) {
            if w[0].to != w[1].from {
                return Err(NetworkError::Disconnected(w[0].id.clone(), w[1].id.clone()));
            }
        }
        Ok(edges)
    }
}

/// End-to-end couple of a path (edge ids, upstream first), with each edge
/// leaving a merge replaced by its residual under the merge's policy.
pub fn path_service(net: &RoadNetwork, path: &[&str]) -> Result<Residual, NetworkError> {
    path_service_with(net, path, None)
}

/// Like [`path_service`], with one policy overriding every declared one.
pub fn path_service_with(
    net: &RoadNetwork,
    path: &[&str],
    policy: Option<&dyn ResidualPolicy>,
) -> Result<Residual, NetworkError> {
    let edges = net.resolve(path)?;
    let mut acc: Option<ServiceCouple> = None;
    let mut degenerate = false;
    for (i, edge) in edges.iter().enumerate() {
        let mut couple = edge.couple()?;
        if i > 0 {
            match net.merge_at(&edge.from) {
                Some(merge) => {
                    let cross = merge.cross.curve();
                    let r = match policy {
                        Some(p) => p.residual(&couple, &cross),
                        None => merge.policy.residual(&couple, &cross),
                    };
                    degenerate |= r.degenerate;
                    couple = r.couple;
                }
                None if net.in_degree(&edge.from) > 1 => {
                    return Err(NetworkError::MissingMerge(edge.from.clone()));
                }
                None => {}
            }
        }
        acc = Some(match acc {
            None => couple,
            Some(up) => series(&couple, &up),
        });
    }
    Ok(Residual {
        couple: acc.expect("non-empty path"),
        degenerate,
    })
}

/// Worst-case travel time along `path` for an inflow bounded by `alpha`;
/// `+∞` when a merge starves the tagged flow.
pub fn path_travel_time_bound(
    net: &RoadNetwork,
    path: &[&str],
    alpha: &AffineArrival,
) -> Result<Value, NetworkError> {
    let r = path_service(net, path)?;
    if r.degenerate {
        return Ok(Value::Infinite);
    }
    Ok(delay_bound(&alpha.curve(), &r.couple))
}

//! Delay, backlog and output-burstiness bounds under a service couple.

use serde::{Deserialize, Serialize};

use crate::minplus::{Curve, CurveError};
use crate::road_model::{avg_travel_time, fundamental_flow, RingRoad, RoadError, ServiceCouple};
use crate::value::{fmt_q, qi, serde_q, serde_value, Value, Q};

/// Token-bucket arrival curve `σ + r t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineArrival {
    #[serde(with = "serde_q")]
    pub sigma: Q,
    #[serde(with = "serde_q")]
    pub r: Q,
}

impl AffineArrival {
    pub fn new(sigma: Q, r: Q) -> Self {
        AffineArrival { sigma, r }
    }

    pub fn curve(&self) -> Curve {
        Curve::token_bucket(Value::Finite(self.sigma.clone()), self.r.clone())
    }
}

/// Worst-case travel time, entry backlog and an arrival curve for the output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(with = "serde_value")]
    pub tau_max: Value,
    #[serde(with = "serde_value")]
    pub b_max: Value,
    /// `ε` when the bounds diverge.
    pub output_arrival: Curve,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl BoundReport {
    fn unbounded(diagnostic: String) -> Self {
        BoundReport {
            tau_max: Value::Infinite,
            b_max: Value::Infinite,
            output_arrival: Curve::epsilon(),
            diagnostic: Some(diagnostic),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tau_max.is_finite() && self.b_max.is_finite()
    }
}

/// Largest horizontal distance from `α` to `β ⊕ λ`.
pub fn delay_bound(alpha: &Curve, couple: &ServiceCouple) -> Value {
    alpha.hdev(&couple.combined())
}

/// Largest vertical distance from `α` to `β ⊕ λ` (never below 0).
pub fn backlog_bound(alpha: &Curve, couple: &ServiceCouple) -> Value {
    alpha.vdev(&couple.combined()).positive_part()
}

/// `α ⊘ (β ⊕ λ)`.
pub fn output_arrival(alpha: &Curve, couple: &ServiceCouple) -> Result<Curve, CurveError> {
    alpha.deconv(&couple.combined())
}

/// All three bounds for an arbitrary arrival curve and couple.
pub fn bound_report(alpha: &Curve, couple: &ServiceCouple) -> BoundReport {
    let tau_max = delay_bound(alpha, couple);
    let b_max = backlog_bound(alpha, couple);
    match output_arrival(alpha, couple) {
        Ok(out) if tau_max.is_finite() && b_max.is_finite() => BoundReport {
            tau_max,
            b_max,
            output_arrival: out,
            diagnostic: None,
        },
        Ok(_) => BoundReport::unbounded("delay or backlog diverges".to_string()),
        Err(e) => {
            let rates = match (alpha.long_run_rate(), couple.combined().long_run_rate()) {
                (Some(a), Some(s)) => {
                    format!(" (arrival rate {}, service rate {})", fmt_q(&a), fmt_q(&s))
                }
                _ => String::new(),
            };
            BoundReport::unbounded(format!("{e}{rates}"))
        }
    }
}

/// Closed-form bounds for a token-bucket inflow into a ring road at density
/// `ρ`, read against the rate-latency couple.
pub fn road_bounds(
    road: &RingRoad,
    rho: &Q,
    alpha: &AffineArrival,
) -> Result<BoundReport, RoadError> {
    let tau = avg_travel_time(road, rho)?;
    let q = fundamental_flow(road, rho)?;
    if alpha.r > q {
        return Ok(BoundReport::unbounded(format!(
            "arrival rate {} exceeds the road flow q(rho) = {}",
            fmt_q(&alpha.r),
            fmt_q(&q)
        )));
    }
    let jam_rate = &road.w * &road.rho_j;
    let jam_latency = jam_latency(road, rho);
    let delay = (&tau + &alpha.sigma / &q).max(&jam_latency + &alpha.sigma / &jam_rate);
    let backlog = (&alpha.sigma + &alpha.r * &tau).max(&alpha.sigma + &alpha.r * &jam_latency);
    let output_arrival = Curve::token_bucket(Value::Finite(backlog.clone()), alpha.r.clone());
    Ok(BoundReport {
        tau_max: Value::Finite(delay),
        b_max: Value::Finite(backlog),
        output_arrival,
        diagnostic: None,
    })
}

/// `2 m ρ Δx / (ρ_j w)`: latency of the jam branch of the relaxed couple.
fn jam_latency(road: &RingRoad, rho: &Q) -> Q {
    qi(2) * road.vehicles(rho) / (&road.rho_j * &road.w)
}

/// Worst-case travel time for a zero-burst inflow:
/// `max{τ(ρ), 2 m ρ Δx / (ρ_j w)}`.
pub fn tau_max_density(road: &RingRoad, rho: &Q) -> Result<Q, RoadError> {
    let tau = avg_travel_time(road, rho)?;
    Ok(tau.max(jam_latency(road, rho)))
}

/// Densities where the worst case strictly exceeds the average:
/// the open interval `(ρ_j w / (2v), ρ_j / 2)` (empty unless `w < v`).
pub fn excess_interval(road: &RingRoad) -> (Q, Q) {
    (
        &road.rho_j * &road.w / (qi(2) * &road.v),
        &road.rho_j / qi(2),
    )
}

/// `b_max = r τ_max` for zero burst.
pub fn zero_burst_backlog(road: &RingRoad, rho: &Q, r: &Q) -> Result<Q, RoadError> {
    Ok(r * tau_max_density(road, rho)?)
}

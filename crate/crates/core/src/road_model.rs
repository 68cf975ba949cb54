//! Single-lane ring road seen as a server: triangular fundamental diagram and
//! minimum service couples.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minplus::{Curve, CurveError};
use crate::value::{fmt_q, qi, serde_q, Value, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RoadError {
    #[error("invalid road: {0}")]
    InvalidRoad(String),
    #[error("density {rho} outside [0, {rho_j}]")]
    DensityOutOfRange { rho: String, rho_j: String },
    #[error("density {} gives zero flow; travel time is undefined", fmt_q(.0))]
    Degenerate(Q),
    #[error("invalid occupancy: {0}")]
    InvalidCounts(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Physical parameters of a ring road cut into `m` equal sections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingRoad {
    pub m: usize,
    #[serde(with = "serde_q")]
    pub dx: Q,
    #[serde(with = "serde_q")]
    pub v: Q,
    #[serde(with = "serde_q")]
    pub w: Q,
    #[serde(with = "serde_q")]
    pub rho_j: Q,
}

impl RingRoad {
    pub fn new(m: usize, dx: Q, v: Q, w: Q, rho_j: Q) -> Result<Self, RoadError> {
        let road = RingRoad { m, dx, v, w, rho_j };
        road.validate()?;
        Ok(road)
    }

    pub fn validate(&self) -> Result<(), RoadError> {
        if self.m < 3 {
            return Err(RoadError::InvalidRoad(format!(
                "need at least 3 sections, got {}",
                self.m
            )));
        }
        for (name, x) in [
            ("dx", &self.dx),
            ("v", &self.v),
            ("w", &self.w),
            ("rho_j", &self.rho_j),
        ] {
            if !x.is_positive() {
                return Err(RoadError::InvalidRoad(format!(
                    "{name} must be > 0, got {}",
                    fmt_q(x)
                )));
            }
        }
        Ok(())
    }

    /// Section capacity `ρ_j Δx`.
    pub fn n_max(&self) -> Q {
        &self.rho_j * &self.dx
    }

    /// Critical density `ρ_j w / (v + w)`.
    pub fn rho_c(&self) -> Q {
        &self.rho_j * &self.w / (&self.v + &self.w)
    }

    /// Free-flow crossing time of one section.
    pub fn tv(&self) -> Q {
        &self.dx / &self.v
    }

    /// Backward-wave crossing time of one section.
    pub fn tw(&self) -> Q {
        &self.dx / &self.w
    }

    fn mq(&self) -> Q {
        qi(self.m as i64)
    }

    /// Vehicles on the road at density `ρ`: `m ρ Δx`.
    pub fn vehicles(&self, rho: &Q) -> Q {
        self.mq() * rho * &self.dx
    }

    fn check_density(&self, rho: &Q) -> Result<(), RoadError> {
        if rho.is_negative() || rho > &self.rho_j {
            return Err(RoadError::DensityOutOfRange {
                rho: fmt_q(rho),
                rho_j: fmt_q(&self.rho_j),
            });
        }
        Ok(())
    }

    fn check_open_density(&self, rho: &Q) -> Result<(), RoadError> {
        self.check_density(rho)?;
        if rho.is_zero() || rho == &self.rho_j {
            return Err(RoadError::Degenerate(rho.clone()));
        }
        Ok(())
    }
}

/// Initial content of the road.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupancy {
    Density(#[serde(with = "serde_q")] Q),
    Counts(#[serde(with = "serde_q::vec")] Vec<Q>),
}

impl Occupancy {
    /// Average density `Σ n_i / (m Δx)`.
    pub fn density(&self, road: &RingRoad) -> Q {
        match self {
            Occupancy::Density(rho) => rho.clone(),
            Occupancy::Counts(n) => n.iter().sum::<Q>() / (road.mq() * &road.dx),
        }
    }

    /// Per-section counts (uniform `ρ Δx` for a density).
    pub fn counts(&self, road: &RingRoad) -> Vec<Q> {
        match self {
            Occupancy::Density(rho) => vec![rho * &road.dx; road.m],
            Occupancy::Counts(n) => n.clone(),
        }
    }

    pub fn validate(&self, road: &RingRoad) -> Result<(), RoadError> {
        match self {
            Occupancy::Density(rho) => road.check_density(rho),
            Occupancy::Counts(n) => {
                if n.len() != road.m {
                    return Err(RoadError::InvalidCounts(format!(
                        "expected {} counts, got {}",
                        road.m,
                        n.len()
                    )));
                }
                let cap = road.n_max();
                match n.iter().position(|x| x.is_negative() || x > &cap) {
                    Some(i) => Err(RoadError::InvalidCounts(format!(
                        "section {} holds {} (capacity {})",
                        i + 1,
                        fmt_q(&n[i]),
                        fmt_q(&cap)
                    ))),
                    None => Ok(()),
                }
            }
        }
    }
}

/// `Y ≥ β * U ⊕ λ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceCouple {
    pub beta: Curve,
    pub lambda: Curve,
}

impl ServiceCouple {
    pub fn new(beta: Curve, lambda: Curve) -> Self {
        ServiceCouple { beta, lambda }
    }

    /// A plain service curve (`λ = ε`).
    pub fn from_service(beta: Curve) -> Self {
        ServiceCouple {
            beta,
            lambda: Curve::epsilon(),
        }
    }

    /// `β ⊕ λ`, the curve the classic bounds are read against.
    pub fn combined(&self) -> Curve {
        self.beta.min(&self.lambda)
    }
}

/// `q(ρ) = min(vρ, w(ρ_j − ρ))`.
pub fn fundamental_flow(road: &RingRoad, rho: &Q) -> Result<Q, RoadError> {
    road.check_density(rho)?;
    Ok((&road.v * rho).min(&road.w * (&road.rho_j - rho)))
}

/// `ρ_j / (1/v + 1/w)`.
pub fn q_max(road: &RingRoad) -> Q {
    &road.rho_j / (road.v.recip() + road.w.recip())
}

/// `τ(ρ) = m Δx ρ / q(ρ)`.
pub fn avg_travel_time(road: &RingRoad, rho: &Q) -> Result<Q, RoadError> {
    road.check_open_density(rho)?;
    let free = road.mq() * road.tv();
    let jam = road.mq() * road.tw() * rho / (&road.rho_j - rho);
    Ok(free.max(jam))
}

/// Asymptotic flow of the closed ring: the smallest circuit mean weight.
pub fn autonomous_flow(road: &RingRoad, occ: &Occupancy) -> Result<Q, RoadError> {
    occ.validate(road)?;
    let rho = occ.density(road);
    let interior = &road.v * &rho;
    let exterior = &road.w * (&road.rho_j - &rho);
    Ok(interior.min(exterior).min(q_max(road)))
}

fn atom(p: Q, t: Q) -> Curve {
    Curve::atom(Value::Finite(p), t)
}

/// Circuit atoms with the interior/exterior gains given explicitly.
fn circuits(road: &RingRoad, inside: Q, outside: Q) -> Curve {
    let m = road.mq();
    atom(inside, &m * road.tv())
        .min(&atom(road.n_max(), road.tv() + road.tw()))
        .min(&atom(outside, &m * road.tw()))
}

/// `a = γ^{mρΔx} δ^{mΔx/v} ⊕ γ^{ρ_jΔx} δ^{Δx/v + Δx/w} ⊕ γ^{m(ρ_j−ρ)Δx} δ^{mΔx/w}`.
pub fn atom_a(road: &RingRoad, rho: &Q) -> Result<Curve, RoadError> {
    road.check_density(rho)?;
    let m = road.mq();
    Ok(circuits(
        road,
        road.vehicles(rho),
        &m * (&road.rho_j - rho) * &road.dx,
    ))
}

/// `β = [γ^{-N} a*]^+` and `λ = β ⊕ [γ^{-N}(terms ⊕ e)]^+` for given gains.
fn couple_from(a: &Curve, n_total: &Q, terms: Curve) -> Result<ServiceCouple, RoadError> {
    let beta = a.closure()?.positive_shift(n_total);
    let lambda = beta.min(&terms.min(&Curve::unit()).positive_shift(n_total));
    Ok(ServiceCouple { beta, lambda })
}

/// Minimum service couple of the ring at uniform density `ρ`.
pub fn service_couple_density(road: &RingRoad, rho: &Q) -> Result<ServiceCouple, RoadError> {
    let a = atom_a(road, rho)?;
    let m = road.mq();
    let mut terms = Curve::epsilon();
    for k in 1..road.m {
        let kq = qi(k as i64);
        let ahead = (&m * rho - &kq * &road.rho_j).max(Q::zero()) * &road.dx;
        let behind = (&kq * &road.rho_j - &m * rho).max(Q::zero()) * &road.dx;
        terms = terms
            .min(&atom(ahead, (&m - &kq) * road.tv()))
            .min(&atom(behind, &kq * road.tw()));
    }
    couple_from(&a, &road.vehicles(rho), terms)
}

/// Couple built from the actual per-section counts instead of their density
/// lower bounds.
pub fn service_couple_exact(road: &RingRoad, counts: &[Q]) -> Result<ServiceCouple, RoadError> {
    let occ = Occupancy::Counts(counts.to_vec());
    occ.validate(road)?;
    let n_total: Q = counts.iter().sum();
    let free: Vec<Q> = counts.iter().map(|n| road.n_max() - n).collect();
    let a = circuits(road, n_total.clone(), free.iter().sum());
    let m = road.mq();
    let mut terms = Curve::epsilon();
    for k in 1..road.m {
        let kq = qi(k as i64);
        let ahead: Q = counts[k..].iter().sum();
        let behind: Q = free[..k].iter().sum();
        terms = terms
            .min(&atom(ahead, (&m - &kq) * road.tv()))
            .min(&atom(behind, &kq * road.tw()));
    }
    couple_from(&a, &n_total, terms)
}

/// Rate-latency relaxation: `β = q(ρ)[t − τ(ρ)]^+`,
/// `λ = β ⊕ wρ_j[t − 2mρΔx/(ρ_j w)]^+`.
pub fn service_couple_relaxed(road: &RingRoad, rho: &Q) -> Result<ServiceCouple, RoadError> {
    let tau = avg_travel_time(road, rho)?;
    let beta = Curve::rate_latency(fundamental_flow(road, rho)?, tau);
    let jam_rate = &road.w * &road.rho_j;
    let jam_latency = qi(2) * road.vehicles(rho) / (&road.rho_j * &road.w);
    let lambda = beta.min(&Curve::rate_latency(jam_rate, jam_latency));
    Ok(ServiceCouple { beta, lambda })
}

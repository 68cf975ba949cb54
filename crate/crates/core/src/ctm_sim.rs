//! Brute-force evaluation of the ring-road recursion on a time grid.
//!
//! Sections are indexed from 0; section 0 is the entry (and exit) section.
//! Inflows are step functions: `U` equals its sample `U[k]` on
//! `(t_{k-1}, t_k]`, so every signal is piecewise constant with jumps on the
//! grid and the recursion is exact there.

use num::{Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minplus::Curve;
use crate::road_model::{Occupancy, RingRoad, RoadError, ServiceCouple};
use crate::value::{fmt_q, qi, Value, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("time step {dt} does not divide the section delay {delay}")]
    Misaligned { dt: String, delay: String },
    #[error("time step must be > 0")]
    BadStep,
    #[error("inflow decreases at step {0}")]
    NonMonotone(usize),
    #[error("inflow has {got} samples, expected {want}")]
    InputLength { got: usize, want: usize },
    #[error(transparent)]
    Road(#[from] RoadError),
}

/// Time grid plus sampled cumulative inflow `U(k dt)`, `k = 0..=steps`.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub dt: Q,
    pub steps: usize,
    pub input: Vec<Value>,
}

impl SimConfig {
    pub fn new(dt: Q, steps: usize, input: Vec<Value>) -> Self {
        SimConfig { dt, steps, input }
    }

    /// Samples `u` on the grid.
    pub fn sampled(dt: Q, steps: usize, u: impl Fn(&Q) -> Value) -> Self {
        let input = (0..=steps).map(|k| u(&(&dt * qi(k as i64)))).collect();
        SimConfig { dt, steps, input }
    }

    /// Unlimited inflow: the ring runs on its own.
    pub fn autonomous(dt: Q, steps: usize) -> Self {
        SimConfig {
            dt,
            steps,
            input: vec![Value::Infinite; steps + 1],
        }
    }

    pub fn horizon(&self) -> Q {
        &self.dt * qi(self.steps as i64)
    }
}

/// Cumulative counts on the grid `t_k = k dt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimTrace {
    pub dt: Q,
    pub times: Vec<Q>,
    /// `sections[i][k]`: cumulative outflow of section `i` at `t_k`.
    pub sections: Vec<Vec<Q>>,
    pub y: Vec<Q>,
    /// `max(Y − Σ n_i, 0)`: output that came from the inflow.
    pub z: Vec<Q>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with columns `t, Q_1..Q_m, Y, Z` (decimal).
    pub fn to_csv(&self) -> String {
        let m = self.sections.len();
        let mut out = String::from("t");
        for i in 1..=m {
            out.push_str(&format!(",Q_{i}"));
        }
        out.push_str(",Y,Z\n");
        for k in 0..self.len() {
            out.push_str(&decimal(&self.times[k]));
            for s in &self.sections {
                out.push(',');
                out.push_str(&decimal(&s[k]));
            }
            out.push_str(&format!(
                ",{},{}\n",
                decimal(&self.y[k]),
                decimal(&self.z[k])
            ));
        }
        out
    }
}

/// Shortest decimal that round-trips through `f64`; integers stay exact.
pub fn decimal(x: &Q) -> String {
    if x.is_integer() {
        return x.to_integer().to_string();
    }
    crate::value::to_f64(x).to_string()
}

fn lag(delay: &Q, dt: &Q) -> Result<usize, SimError> {
    let ratio = delay / dt;
    if !ratio.is_integer() || !ratio.is_positive() {
        return Err(SimError::Misaligned {
            dt: fmt_q(dt),
            delay: fmt_q(delay),
        });
    }
    Ok(ratio.to_integer().try_into().expect("lag fits in usize"))
}

/// Runs the recursion
/// `Q_0[k] = min(U[k], Q_{m-1}[k - lv] + n_{m-1}, Q_1[k - lw] + n̄_0)`,
/// `Q_i[k] = min(Q_{i-1}[k - lv] + n_{i-1}, Q_{i+1}[k - lw] + n̄_i)`,
/// `Y[k] = min(Q_{m-1}[k - lv] + n_{m-1}, Q_1[k - lw] + n̄_0)`,
/// with all signals 0 at and before `t = 0`.
///
/// Both lags are at least one step, so every right-hand side refers to
/// earlier samples (plus `U[k]`) and one pass per step reaches the fixpoint.
pub fn simulate(road: &RingRoad, counts: &[Q], cfg: &SimConfig) -> Result<SimTrace, SimError> {
    Occupancy::Counts(counts.to_vec()).validate(road)?;
    if !cfg.dt.is_positive() {
        return Err(SimError::BadStep);
    }
    if cfg.input.len() != cfg.steps + 1 {
        return Err(SimError::InputLength {
            got: cfg.input.len(),
            want: cfg.steps + 1,
        });
    }
    if let Some(k) = (1..cfg.input.len()).find(|&k| cfg.input[k] < cfg.input[k - 1]) {
        return Err(SimError::NonMonotone(k));
    }
    let lv = lag(&road.tv(), &cfg.dt)?;
    let lw = lag(&road.tw(), &cfg.dt)?;
    let m = road.m;
    let free: Vec<Q> = counts.iter().map(|n| road.n_max() - n).collect();
    let n_total: Q = counts.iter().sum();

    let len = cfg.steps + 1;
    let mut sections = vec![vec![Q::zero(); len]; m];
    let mut y = vec![Q::zero(); len];
    let at = |series: &Vec<Q>, k: usize, l: usize| -> Q {
        if k >= l {
            series[k - l].clone()
        } else {
            Q::zero()
        }
    };
    for k in 1..len {
        for i in 0..m {
            let prev = (i + m - 1) % m;
            let next = (i + 1) % m;
            let from_behind = at(&sections[prev], k, lv) + &counts[prev];
            let from_ahead = at(&sections[next], k, lw) + &free[i];
            let mut v = from_behind.clone().min(from_ahead.clone());
            if i == 0 {
                y[k] = v.clone();
                if let Value::Finite(u) = &cfg.input[k] {
                    v = v.min(u.clone());
                }
            }
            sections[i][k] = v;
        }
    }
    let z = y.iter().map(|v| (v - &n_total).max(Q::zero())).collect();
    let times = (0..len).map(|k| &cfg.dt * qi(k as i64)).collect();
    Ok(SimTrace {
        dt: cfg.dt.clone(),
        times,
        sections,
        y,
        z,
    })
}

/// Rings in tandem, upstream first: each ring's `Z` is the next ring's inflow.
pub fn simulate_tandem(
    stages: &[(RingRoad, Vec<Q>)],
    cfg: &SimConfig,
) -> Result<Vec<SimTrace>, SimError> {
    let mut input = cfg.input.clone();
    let mut out = Vec::with_capacity(stages.len());
    for (road, counts) in stages {
        let trace = simulate(
            road,
            counts,
            &SimConfig::new(cfg.dt.clone(), cfg.steps, input),
        )?;
        input = trace.z.iter().cloned().map(Value::Finite).collect();
        out.push(trace);
    }
    Ok(out)
}

/// `(t_k, d(t_k))` where `d` is the smallest grid delay with
/// `Z(t_k + d) ≥ U(t_k)`; `None` when not reached within the horizon.
pub fn measure_virtual_delays(trace: &SimTrace, u: &[Value]) -> Vec<(Q, Option<Q>)> {
    let len = trace.len();
    let mut out = Vec::with_capacity(len);
    let mut h = 0usize;
    for (k, target) in u.iter().enumerate().take(len) {
        // Z is non-decreasing and U too, so the served index only moves forward
        h = h.max(k);
        while h < len && Value::Finite(trace.z[h].clone()) < *target {
            h += 1;
        }
        let d = (h < len).then(|| &trace.dt * qi((h - k) as i64));
        out.push((trace.times[k].clone(), d));
    }
    out
}

/// A grid instant where `Z < β * U ⊕ λ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(with = "crate::value::serde_q")]
    pub t: Q,
    #[serde(with = "crate::value::serde_q")]
    pub z: Q,
    #[serde(with = "crate::value::serde_value")]
    pub bound: Value,
}

/// Compares the simulated output against the couple at every grid point.
pub fn check_couple(trace: &SimTrace, u: &[Value], couple: &ServiceCouple) -> Vec<Violation> {
    let len = trace.len();
    let beta: Vec<Value> = trace.times.iter().map(|t| couple.beta.eval(t)).collect();
    let mut out = Vec::new();
    for k in 0..len {
        // U is a left-continuous step: the convolution is attained at grid points
        let mut bound = couple.lambda.eval(&trace.times[k]);
        for j in 0..=k {
            let cand = match (&u[j], &beta[k - j]) {
                (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + b),
                _ => continue,
            };
            if cand < bound {
                bound = cand;
            }
        }
        let z = Value::Finite(trace.z[k].clone());
        if z < bound {
            out.push(Violation {
                t: trace.times[k].clone(),
                z: trace.z[k].clone(),
                bound,
            });
        }
    }
    out
}

/// `β` lifted by `lift` everywhere: a deliberately unsound couple for
/// checking that violations are detected.
pub fn inflate_beta(couple: &ServiceCouple, lift: &Q) -> ServiceCouple {
    ServiceCouple {
        beta: Curve::gamma(Value::Finite(lift.clone())).conv(&couple.beta),
        lambda: couple.lambda.clone(),
    }
}

/// Random cumulative inflow obeying the token bucket `σ + r t`:
/// piecewise-constant rates from `{0, r/4, r/2, 3r/4, r}` plus bursts whose
/// total stays within `σ`. `U(0) = 0`.
pub fn random_inflow(rng: &mut impl Rng, dt: &Q, steps: usize, r: &Q, sigma: &Q) -> Vec<Value> {
    let mut u = Vec::with_capacity(steps + 1);
    let mut level = Q::zero();
    let mut budget = sigma.clone();
    u.push(Value::Finite(level.clone()));
    let mut rate = Q::zero();
    let mut left = 0usize;
    for _ in 0..steps {
        if left == 0 {
            rate = r * qi(rng.gen_range(0..=4)) / qi(4);
            left = rng.gen_range(1..=20);
        }
        left -= 1;
        level += &rate * dt;
        if budget.is_positive() && rng.gen_ratio(1, 8) {
            let burst = &budget * qi(rng.gen_range(1..=4)) / qi(4);
            budget -= &burst;
            level += burst;
        }
        u.push(Value::Finite(level.clone()));
    }
    u
}

/// Seeded generator shared by the CLI and the tests.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Long-run output rate between two grid indices.
pub fn flow_between(trace: &SimTrace, from: usize, to: usize) -> Q {
    (&trace.y[to] - &trace.y[from]) / (&trace.times[to] - &trace.times[from])
}

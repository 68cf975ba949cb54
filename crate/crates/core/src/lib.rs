//! Exact network-calculus bounds for ring roads and road trees.

pub mod bounds;
pub mod composition;
pub mod ctm_sim;
pub mod minplus;
pub mod plot;
pub mod road_model;
pub mod value;

pub use minplus::{Curve, CurveError, Segment, Tail};
pub use road_model::{Occupancy, RingRoad, RoadError, ServiceCouple};
pub use value::{parse_q, q, qi, Value, Q};

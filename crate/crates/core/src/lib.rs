//! Windowed empirical measures along orbits of transitive dynamical systems,
//! weak-star distances to reference ergodic measures, and diagnostics for how
//! the statistics of an orbit oscillate.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix `f64`, the
//! working precision, and [`Exact`] rationals.

pub mod asymptotics;
pub mod error;
pub mod measures;
pub mod scalar;
pub mod systems;
pub mod weakstar;

pub use error::{Error, Result};
pub use scalar::{Exact, Scalar};

pub type Distance = weakstar::DistanceValue<f64>;
pub type ExactDistance = weakstar::DistanceValue<Exact>;
pub type Record = asymptotics::ScanRecord<f64>;
pub type Table = asymptotics::ScanTable<f64>;
pub type Hits = asymptotics::HitSet<f64>;
pub type Hull = asymptotics::Hull<f64>;
pub type Classification = asymptotics::Classification<f64>;

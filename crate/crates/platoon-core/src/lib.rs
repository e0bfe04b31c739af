//! Simulation and analysis of vehicle platoons under leader disturbances.
//!
//! The crate bundles four car-following laws (intelligent-driver in full and
//! spacing-only form, optimal-velocity, a speed-coupling follower law, and a
//! cooperative adaptive cruise controller with V2V feedforward), a
//! deterministic fixed-step integrator with information delays, closed-form
//! string-stability analytics with parameter-space maps, and trajectory
//! post-processing into spacing-error, time-gap, and amplification metrics.
//!
//! Everything numeric is generic over the scalar type through [`real::Real`]
//! (implemented for `f32` and `f64`); the `*64`/`*32` aliases at the crate
//! root pin the common entry points to a concrete precision.

// Validation deliberately writes `!(x > 0)` instead of `x <= 0`: the negated
// form also rejects NaN, which is the point of those guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod io;
pub mod metrics;
pub mod models;
pub mod perturb;
pub mod real;
pub mod scenario;
pub mod sim;
pub mod stability;

pub use real::{fp, Real};

/// Double-precision run configuration.
pub type PlatoonConfig64 = sim::PlatoonConfig<f64>;
/// Double-precision recorded run.
pub type Trajectory64 = sim::Trajectory<f64>;
/// Double-precision parameter-space map.
pub type StabilityMap64 = stability::StabilityMap<f64>;

/// Single-precision run configuration.
pub type PlatoonConfig32 = sim::PlatoonConfig<f32>;
/// Single-precision recorded run.
pub type Trajectory32 = sim::Trajectory<f32>;
/// Single-precision parameter-space map.
pub type StabilityMap32 = stability::StabilityMap<f32>;

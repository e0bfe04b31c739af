//! Pure, stateless acceleration laws for the four car-following models.
//!
//! Every function here maps instantaneous observations to a commanded
//! acceleration; integration, delays, and event handling live in `sim`.

mod cacc;
mod gmm;
mod idm;
mod ovm;

pub use cacc::{
    cacc_accel, cacc_desired_spacing, cacc_spacing_error, CaccParams, NeighborObservation,
};
pub use gmm::{gmm_accel, gmm_config1_accel, GmmParams};
pub use idm::{idm_accel, idm_desired_gap, idm_spacing_only_accel, IdmParams};
pub use ovm::{ovm_accel, ovm_optimal_velocity, OvmParams};

use std::fmt;

/// Domain failures of the model laws themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelError<F> {
    /// Gap closed to zero or below where the law divides by the gap;
    /// physically a crash. The caller records the event.
    NonPositiveGap { gap: F },
    /// Negative speed raised to a fractional exponent has no real value.
    NegativeSpeedFractionalPower { v: F },
}

impl<F: fmt::Display> fmt::Display for ModelError<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonPositiveGap { gap } => {
                write!(f, "gap {gap} m is non-positive (collision domain)")
            }
            ModelError::NegativeSpeedFractionalPower { v } => {
                write!(f, "speed {v} m/s is negative under a fractional exponent")
            }
        }
    }
}

impl<F: fmt::Debug + fmt::Display> std::error::Error for ModelError<F> {}

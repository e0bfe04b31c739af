//! Closed-form linearized-stability analytics: damped-oscillator reduction,
//! per-model string-stability conditions, transfer-function magnitudes, and
//! parameter-space stability maps.

mod conditions;
mod empirical;
mod map;
mod oscillator;

pub use conditions::{
    cacc_critical_delay, cacc_no_delay_conditions, cacc_transfer_magnitude,
    gmm_stability_condition, gmm_transfer_magnitude, idm_damping_term, ovm_lambda,
    ovm_stability_metric, ovm_transfer_magnitude, scan_supremum,
};
pub use empirical::empirical_amplification;
pub use map::{
    build_stability_map, CellState, MapAxis, MapCondition, MapFixedParams, MapRequest,
    StabilityMap,
};
pub use oscillator::{
    classify_damping, eigenvalues, forced_response, oscillator_from_linearization, DampingClass,
    ForcedResponse, LinearizedModel, OscillatorParams,
};

use std::fmt;

/// Domain failures of the stability analytics.
#[derive(Debug, Clone, PartialEq)]
pub enum StabilityError<F> {
    /// Gap-restoring coefficient is not positive; the second-order reduction
    /// has no oscillator form. Raw coefficients are reported instead.
    NoOscillatorForm { f_s: F },
    /// Forced response diverges for an undamped oscillator driven at its
    /// natural frequency.
    UndampedResonance,
    /// Equilibrium spacing must be positive.
    NonPositiveSpacing { s_star: F },
    /// Transfer-function denominator vanished at this frequency.
    SingularTransfer { omega: F },
    /// The critical-delay arccos argument left [-1, 1].
    DelayArgumentOutOfRange { arg: F },
    /// Crossover frequency must be positive.
    NonPositiveCrossover { omega_c: F },
    /// Reference natural frequency must be nonzero.
    ZeroReferenceFrequency,
    /// Amplification ratio undefined: the upstream vehicle barely oscillates.
    UndefinedRatio { pair: usize, upstream_p2p: F },
    /// Anything else, described in place.
    Domain { detail: String },
}

impl<F: fmt::Display> fmt::Display for StabilityError<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityError::NoOscillatorForm { f_s } => {
                write!(f, "no oscillator form: gap coefficient f_s = {f_s} is not positive")
            }
            StabilityError::UndampedResonance => {
                write!(f, "undamped resonance: forced response unbounded")
            }
            StabilityError::NonPositiveSpacing { s_star } => {
                write!(f, "equilibrium spacing must be positive, got {s_star}")
            }
            StabilityError::SingularTransfer { omega } => {
                write!(f, "transfer denominator vanished at omega = {omega}")
            }
            StabilityError::DelayArgumentOutOfRange { arg } => {
                write!(f, "critical-delay argument {arg} outside [-1, 1]")
            }
            StabilityError::NonPositiveCrossover { omega_c } => {
                write!(f, "crossover frequency must be positive, got {omega_c}")
            }
            StabilityError::ZeroReferenceFrequency => {
                write!(f, "reference natural frequency must be nonzero")
            }
            StabilityError::UndefinedRatio { pair, upstream_p2p } => {
                write!(
                    f,
                    "amplification undefined for pair {pair}: upstream peak-to-peak {upstream_p2p} below threshold"
                )
            }
            StabilityError::Domain { detail } => write!(f, "{detail}"),
        }
    }
}

impl<F: fmt::Debug + fmt::Display> std::error::Error for StabilityError<F> {}

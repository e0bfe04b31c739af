//! Generalized follow-the-leader law: acceleration proportional to the speed
//! difference, scaled by own speed and inverse gap raised to configurable
//! exponents.

use super::ModelError;
use crate::real::Real;

/// Generalized-model parameters.
///
/// The sensitivity's physical unit depends on the exponents (m^l / s /
/// (m/s)^m); it is treated as a raw coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmParams<F> {
    /// Sensitivity alpha.
    pub sensitivity: F,
    /// Exponent m on the follower's own speed.
    pub speed_exponent: F,
    /// Exponent l on the gap.
    pub spacing_exponent: F,
}

impl<F: Real> GmmParams<F> {
    /// Collects invariant violations; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.sensitivity >= F::zero()) {
            errs.push(format!("sensitivity must be >= 0, got {}", self.sensitivity));
        }
        if !self.speed_exponent.is_finite() {
            errs.push(format!("speed_exponent must be finite, got {}", self.speed_exponent));
        }
        if !self.spacing_exponent.is_finite() {
            errs.push(format!("spacing_exponent must be finite, got {}", self.spacing_exponent));
        }
        errs
    }
}

/// Commanded acceleration: alpha * v^m / gap^l * dv_lead (m/s^2).
///
/// `dv_lead` is v_lead - v (opposite orientation to the intelligent-driver
/// closing speed; encoded in the name, never mixed).
pub fn gmm_accel<F: Real>(
    v: F,
    gap: F,
    dv_lead: F,
    p: &GmmParams<F>,
) -> Result<F, ModelError<F>> {
    if gap <= F::zero() && p.spacing_exponent > F::zero() {
        return Err(ModelError::NonPositiveGap { gap });
    }
    if v < F::zero() && p.speed_exponent.fract() != F::zero() {
        return Err(ModelError::NegativeSpeedFractionalPower { v });
    }
    Ok(p.sensitivity * v.powf(p.speed_exponent) / gap.powf(p.spacing_exponent) * dv_lead)
}

/// Reduction with m = 0, l = 1: alpha * dv_lead / gap.
pub fn gmm_config1_accel<F: Real>(gap: F, dv_lead: F, sensitivity: F) -> Result<F, ModelError<F>> {
    if gap <= F::zero() {
        return Err(ModelError::NonPositiveGap { gap });
    }
    // Same association order as gmm_accel at (m=0, l=1) so the two agree bitwise.
    Ok(sensitivity / gap * dv_lead)
}

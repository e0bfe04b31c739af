//! Intelligent-driver law: free-road relaxation toward a desired speed plus
//! a braking interaction scaled by the ratio of desired to actual gap.

use super::ModelError;
use crate::real::{fp, Real};

/// Intelligent-driver parameters.
///
/// The closing-speed convention throughout is dv = v - v_lead (positive when
/// approaching the leader).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmParams<F> {
    /// Maximum acceleration a (m/s^2).
    pub max_accel: F,
    /// Free-road desired speed (m/s).
    pub desired_speed: F,
    /// Acceleration exponent delta (dimensionless).
    pub accel_exponent: F,
    /// Comfortable braking deceleration b (m/s^2, positive).
    pub comfort_decel: F,
    /// Standstill minimum gap s0 (m).
    pub min_gap: F,
    /// Speed-scaled jam gap s1 (m); 0 in the homogeneous reduction used by default.
    pub jam_gap: F,
    /// Time headway T (s).
    pub time_headway: F,
}

impl<F: Real> IdmParams<F> {
    /// Collects invariant violations; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.max_accel > F::zero()) {
            errs.push(format!("max_accel must be > 0, got {}", self.max_accel));
        }
        if !(self.comfort_decel > F::zero()) {
            errs.push(format!("comfort_decel must be > 0, got {}", self.comfort_decel));
        }
        if !(self.desired_speed > F::zero()) {
            errs.push(format!("desired_speed must be > 0, got {}", self.desired_speed));
        }
        if !(self.accel_exponent > F::zero()) {
            errs.push(format!("accel_exponent must be > 0, got {}", self.accel_exponent));
        }
        if !(self.min_gap >= F::zero()) {
            errs.push(format!("min_gap must be >= 0, got {}", self.min_gap));
        }
        if !(self.jam_gap >= F::zero()) {
            errs.push(format!("jam_gap must be >= 0, got {}", self.jam_gap));
        }
        if !(self.time_headway >= F::zero()) {
            errs.push(format!("time_headway must be >= 0, got {}", self.time_headway));
        }
        errs
    }
}

/// Desired gap s* at speed `v` and closing speed `dv` (m).
///
/// Clamped at 0: a strongly opening gap can drive the raw expression
/// negative, which would flip the sign of the braking term.
pub fn idm_desired_gap<F: Real>(v: F, dv: F, p: &IdmParams<F>) -> F {
    let dynamic = v * dv / (fp::<F>(2.0) * (p.max_accel * p.comfort_decel).sqrt());
    let raw = p.min_gap + p.jam_gap * (v / p.desired_speed).sqrt() + p.time_headway * v + dynamic;
    raw.max(F::zero())
}

/// Commanded acceleration at speed `v`, closing speed `dv`, gap `s` (m/s^2).
pub fn idm_accel<F: Real>(v: F, dv: F, s: F, p: &IdmParams<F>) -> Result<F, ModelError<F>> {
    if s <= F::zero() {
        return Err(ModelError::NonPositiveGap { gap: s });
    }
    let free = (v / p.desired_speed).powf(p.accel_exponent);
    let interaction = (idm_desired_gap(v, dv, p) / s).powi(2);
    Ok(p.max_accel * (F::one() - free - interaction))
}

/// Spacing-only reduction: drops the free-road term, keeping only the
/// gap interaction. s* still includes the closing-speed term.
pub fn idm_spacing_only_accel<F: Real>(
    v: F,
    dv: F,
    s: F,
    p: &IdmParams<F>,
) -> Result<F, ModelError<F>> {
    if s <= F::zero() {
        return Err(ModelError::NonPositiveGap { gap: s });
    }
    let interaction = (idm_desired_gap(v, dv, p) / s).powi(2);
    Ok(p.max_accel * (F::one() - interaction))
}

//! Optimal-velocity law: relaxation toward a gap-dependent target speed.

use crate::real::Real;

/// Optimal-velocity parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvmParams<F> {
    /// Driver sensitivity alpha (1/s): relaxation rate toward the target speed.
    pub sensitivity: F,
    /// Speed scale v0 (m/s) of the target-speed curve.
    pub desired_speed: F,
    /// Gap offset h (m) at which the target-speed curve inflects.
    pub form_offset: F,
}

impl<F: Real> OvmParams<F> {
    /// Collects invariant violations; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.sensitivity >= F::zero()) {
            errs.push(format!("sensitivity must be >= 0, got {}", self.sensitivity));
        }
        if !(self.desired_speed > F::zero()) {
            errs.push(format!("desired_speed must be > 0, got {}", self.desired_speed));
        }
        errs
    }
}

/// Target speed for gap `dx`: v0 * (tanh(dx - h) + tanh h) (m/s).
///
/// Monotone nondecreasing in the gap; 0 at dx = 0; saturates at
/// v0 * (1 + tanh h) for large gaps. Total over all finite inputs.
pub fn ovm_optimal_velocity<F: Real>(dx: F, p: &OvmParams<F>) -> F {
    p.desired_speed * ((dx - p.form_offset).tanh() + p.form_offset.tanh())
}

/// Commanded acceleration: alpha * (V_opt(dx) - v) (m/s^2).
pub fn ovm_accel<F: Real>(v: F, dx: F, p: &OvmParams<F>) -> F {
    p.sensitivity * (ovm_optimal_velocity(dx, p) - v)
}

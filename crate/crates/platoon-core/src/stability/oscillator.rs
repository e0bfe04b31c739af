//! Damped-oscillator reduction of a linearized car-following pair.
//!
//! Linearizing any of the model laws around equilibrium gives
//! y'' + (f_dv - f_v) y' + f_s y = forcing, a damped harmonic oscillator in
//! the gap deviation y.

use num_complex::Complex;

use super::StabilityError;
use crate::real::{fp, Real};

/// First-order Taylor coefficients of an acceleration law around equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedModel<F> {
    /// Partial w.r.t. own velocity (1/s).
    pub f_v: F,
    /// Partial w.r.t. relative velocity (1/s).
    pub f_dv: F,
    /// Partial w.r.t. gap (1/s^2).
    pub f_s: F,
}

/// Damping ratio and natural frequency of the oscillator form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams<F> {
    /// Damping ratio xi (dimensionless).
    pub damping_ratio: F,
    /// Natural frequency omega_0 (rad/s).
    pub natural_frequency: F,
}

/// Steady-state response coefficients under unit cosine forcing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcedResponse<F> {
    /// Coefficient A of cos(omega t).
    pub in_phase: F,
    /// Coefficient B of sin(omega t).
    pub out_of_phase: F,
}

impl<F: Real> ForcedResponse<F> {
    /// Steady oscillation amplitude sqrt(A^2 + B^2).
    pub fn amplitude(&self) -> F {
        self.in_phase.hypot(self.out_of_phase)
    }
}

/// Qualitative damping regime of the free oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingClass {
    /// xi <= 0: oscillations sustain or grow.
    Unstable,
    /// 0 < xi < 1: decaying oscillation with overshoot.
    Underdamped,
    /// xi = 1 (within tolerance): fastest non-overshooting return.
    Critical,
    /// xi > 1: monotone decay, no oscillation.
    Overdamped,
}

/// Oscillator parameters from linearization coefficients:
/// omega_0 = sqrt(f_s), xi = (f_dv - f_v) / (2 sqrt(f_s)).
///
/// Fails when f_s <= 0 (no restoring term; the quadratic does not reduce to
/// an oscillator and the raw coefficients should be inspected instead).
pub fn oscillator_from_linearization<F: Real>(
    lin: &LinearizedModel<F>,
) -> Result<OscillatorParams<F>, StabilityError<F>> {
    if !(lin.f_s > F::zero()) {
        return Err(StabilityError::NoOscillatorForm { f_s: lin.f_s });
    }
    let w0 = lin.f_s.sqrt();
    Ok(OscillatorParams {
        damping_ratio: (lin.f_dv - lin.f_v) / (fp::<F>(2.0) * w0),
        natural_frequency: w0,
    })
}

/// Characteristic roots omega_0 * (-xi +- sqrt(xi^2 - 1)), complex when
/// xi < 1. Returned as (plus branch, minus branch).
pub fn eigenvalues<F: Real>(p: &OscillatorParams<F>) -> (Complex<F>, Complex<F>) {
    let xi = p.damping_ratio;
    let w0 = p.natural_frequency;
    let disc = xi * xi - F::one();
    if disc >= F::zero() {
        let root = disc.sqrt();
        (
            Complex::new(w0 * (-xi + root), F::zero()),
            Complex::new(w0 * (-xi - root), F::zero()),
        )
    } else {
        let root = (-disc).sqrt();
        (
            Complex::new(-w0 * xi, w0 * root),
            Complex::new(-w0 * xi, -w0 * root),
        )
    }
}

/// Damping regime of `xi`; `tol` is the half-width of the critical band.
pub fn classify_damping<F: Real>(xi: F, tol: F) -> DampingClass {
    if xi <= F::zero() {
        DampingClass::Unstable
    } else if (xi - F::one()).abs() <= tol {
        DampingClass::Critical
    } else if xi < F::one() {
        DampingClass::Underdamped
    } else {
        DampingClass::Overdamped
    }
}

/// Steady-state coefficients for y'' + 2 xi w0 y' + w0^2 y = cos(omega t):
/// A = (w0^2 - w^2)/D, B = 2 xi w0 w / D with
/// D = (w0^2 - w^2)^2 + (2 xi w0 w)^2.
///
/// Fails at undamped resonance (D = 0), where no bounded steady state exists.
pub fn forced_response<F: Real>(
    p: &OscillatorParams<F>,
    omega: F,
) -> Result<ForcedResponse<F>, StabilityError<F>> {
    let w0 = p.natural_frequency;
    let xi = p.damping_ratio;
    let stiffness = w0 * w0 - omega * omega;
    let damping = fp::<F>(2.0) * xi * w0 * omega;
    let d = stiffness * stiffness + damping * damping;
    if d == F::zero() {
        return Err(StabilityError::UndampedResonance);
    }
    Ok(ForcedResponse { in_phase: stiffness / d, out_of_phase: damping / d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn critical_identity() {
        let p = oscillator_from_linearization(&LinearizedModel { f_v: -1.0, f_dv: 1.0, f_s: 1.0 })
            .unwrap();
        assert_eq!(p.natural_frequency, 1.0);
        assert_eq!(p.damping_ratio, 1.0);
    }

    #[test]
    fn oscillator_arithmetic() {
        let p = oscillator_from_linearization(&LinearizedModel { f_v: -2.0, f_dv: 0.0, f_s: 4.0 })
            .unwrap();
        assert_eq!(p.natural_frequency, 2.0);
        assert_eq!(p.damping_ratio, 0.5);
    }

    #[test]
    fn no_restoring_term_is_domain_error() {
        let r = oscillator_from_linearization(&LinearizedModel { f_v: -1.0, f_dv: 1.0, f_s: 0.0 });
        assert!(matches!(r, Err(StabilityError::NoOscillatorForm { .. })));
    }

    #[test]
    fn repeated_root_at_critical_damping() {
        let p = OscillatorParams { damping_ratio: 1.0, natural_frequency: 3.0 };
        let (l1, l2) = eigenvalues(&p);
        assert_eq!(l1, l2);
        assert_relative_eq!(l1.re, -3.0);
        assert_eq!(l1.im, 0.0);
    }

    #[test]
    fn undamped_roots_are_pure_imaginary() {
        let p = OscillatorParams { damping_ratio: 0.0, natural_frequency: 2.0 };
        let (l1, l2) = eigenvalues(&p);
        assert_eq!((l1.re, l1.im), (0.0, 2.0));
        assert_eq!((l2.re, l2.im), (0.0, -2.0));
    }

    #[test]
    fn overdamped_roots() {
        let p = OscillatorParams { damping_ratio: 2.0, natural_frequency: 1.0 };
        let (l1, l2) = eigenvalues(&p);
        assert_relative_eq!(l1.re, -2.0 + 3.0f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(l2.re, -2.0 - 3.0f64.sqrt(), max_relative = 1e-12);
        assert_eq!(l1.im, 0.0);
    }

    #[test]
    fn classification_bands() {
        assert_eq!(classify_damping(0.5, 1e-9), DampingClass::Underdamped);
        assert_eq!(classify_damping(1.0, 1e-9), DampingClass::Critical);
        assert_eq!(classify_damping(1.5, 1e-9), DampingClass::Overdamped);
        assert_eq!(classify_damping(0.0, 1e-9), DampingClass::Unstable);
        assert_eq!(classify_damping(-0.3, 1e-9), DampingClass::Unstable);
        assert_eq!(classify_damping(1.005, 1e-2), DampingClass::Critical);
    }

    #[test]
    fn resonance_in_phase_term_vanishes() {
        let p = OscillatorParams { damping_ratio: 0.7, natural_frequency: 1.3 };
        let r = forced_response(&p, 1.3).unwrap();
        assert_eq!(r.in_phase, 0.0);
        assert_relative_eq!(r.out_of_phase, 1.0 / (2.0 * 0.7 * 1.3 * 1.3), max_relative = 1e-12);
    }

    #[test]
    fn undamped_off_resonance() {
        let p = OscillatorParams { damping_ratio: 0.0, natural_frequency: 1.0 };
        let r = forced_response(&p, 2.0).unwrap();
        assert_eq!(r.out_of_phase, 0.0);
        assert_relative_eq!(r.in_phase, 1.0 / (1.0 - 4.0), max_relative = 1e-12);
    }

    #[test]
    fn forced_response_example() {
        let p = OscillatorParams { damping_ratio: 0.5, natural_frequency: 1.0 };
        let r = forced_response(&p, 2.0).unwrap();
        // D = (1-4)^2 + (2*0.5*1*2)^2 = 9 + 4 = 13
        assert_relative_eq!(r.in_phase, -3.0 / 13.0, max_relative = 1e-12);
        assert_relative_eq!(r.out_of_phase, 2.0 / 13.0, max_relative = 1e-12);
    }

    #[test]
    fn undamped_resonance_is_singular() {
        let p = OscillatorParams { damping_ratio: 0.0, natural_frequency: 1.0 };
        assert!(matches!(forced_response(&p, 1.0), Err(StabilityError::UndampedResonance)));
    }

    #[test]
    fn substituting_back_satisfies_coefficient_equations() {
        // The coefficient-matching system for y = A cos + B sin is
        //   (w0^2 - w^2) A + 2 xi w0 w B = 1
        //  -2 xi w0 w A + (w0^2 - w^2) B = 0
        let cases = [(0.5, 1.0, 2.0), (1.3, 0.7, 0.7), (0.2, 2.0, 1.9), (2.0, 1.5, 0.1)];
        for (xi, w0, w) in cases {
            let p = OscillatorParams { damping_ratio: xi, natural_frequency: w0 };
            let r = forced_response(&p, w).unwrap();
            let stiff = w0 * w0 - w * w;
            let damp = 2.0 * xi * w0 * w;
            assert_relative_eq!(stiff * r.in_phase + damp * r.out_of_phase, 1.0, epsilon = 1e-12);
            assert_relative_eq!(-damp * r.in_phase + stiff * r.out_of_phase, 0.0, epsilon = 1e-12);
        }
    }
}

//! Leader-velocity perturbation signals.
//!
//! The platoon leader is not governed by a car-following law; its velocity is
//! overridden directly with v_e plus one of these waveforms, floored at zero.

use serde::{Deserialize, Serialize};

use crate::real::{fp, Real};

/// Waveform family of a leader perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    None,
    Sinusoid,
    WindowedSinusoid,
    Step,
    Square,
    Sawtooth,
}

/// A time-parameterized velocity offset applied to the leader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec<F> {
    pub waveform: Waveform,
    /// Amplitude A (m/s) for the periodic waveforms.
    pub amplitude: F,
    /// Angular frequency omega (rad/s) for the periodic waveforms.
    pub angular_frequency: F,
    /// Window start (s): start of the active window (windowed sinusoid) or
    /// the switch time (step).
    pub window_start: F,
    /// Window duration (s); only the windowed sinusoid uses it.
    pub window_duration: F,
    /// Velocity jump (m/s) applied from window_start onward (step only).
    pub step_delta: F,
}

impl<F: Real> PerturbationSpec<F> {
    pub fn none() -> Self {
        PerturbationSpec {
            waveform: Waveform::None,
            amplitude: F::zero(),
            angular_frequency: F::one(),
            window_start: F::zero(),
            window_duration: F::zero(),
            step_delta: F::zero(),
        }
    }

    pub fn sinusoid(amplitude: F, angular_frequency: F) -> Self {
        PerturbationSpec {
            waveform: Waveform::Sinusoid,
            amplitude,
            angular_frequency,
            ..Self::none()
        }
    }

    pub fn windowed_sinusoid(amplitude: F, angular_frequency: F, start: F, duration: F) -> Self {
        PerturbationSpec {
            waveform: Waveform::WindowedSinusoid,
            amplitude,
            angular_frequency,
            window_start: start,
            window_duration: duration,
            ..Self::none()
        }
    }

    pub fn step(step_delta: F, at: F) -> Self {
        PerturbationSpec {
            waveform: Waveform::Step,
            step_delta,
            window_start: at,
            ..Self::none()
        }
    }

    pub fn square(amplitude: F, angular_frequency: F) -> Self {
        PerturbationSpec {
            waveform: Waveform::Square,
            amplitude,
            angular_frequency,
            ..Self::none()
        }
    }

    pub fn sawtooth(amplitude: F, angular_frequency: F) -> Self {
        PerturbationSpec {
            waveform: Waveform::Sawtooth,
            amplitude,
            angular_frequency,
            ..Self::none()
        }
    }

    /// Collects invariant violations; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.amplitude >= F::zero()) {
            errs.push(format!("perturbation amplitude must be >= 0, got {}", self.amplitude));
        }
        let periodic = matches!(
            self.waveform,
            Waveform::Sinusoid | Waveform::WindowedSinusoid | Waveform::Square | Waveform::Sawtooth
        );
        if periodic && !(self.angular_frequency > F::zero()) {
            errs.push(format!(
                "angular_frequency must be > 0 for periodic waveforms, got {}",
                self.angular_frequency
            ));
        }
        if self.waveform == Waveform::WindowedSinusoid && !(self.window_duration > F::zero()) {
            errs.push(format!(
                "window_duration must be > 0 for windowed waveforms, got {}",
                self.window_duration
            ));
        }
        errs
    }

    /// Period 2*pi/omega of the periodic waveforms (s).
    pub fn period(&self) -> F {
        fp::<F>(2.0 * std::f64::consts::PI) / self.angular_frequency
    }
}

/// Velocity offset at time `t` (m/s).
///
/// sign(0) is taken as +1 (square wave starts on its positive half-cycle)
/// and the sawtooth ramps from -A to +A over each period.
pub fn evaluate<F: Real>(spec: &PerturbationSpec<F>, t: F) -> F {
    let w = spec.angular_frequency;
    match spec.waveform {
        Waveform::None => F::zero(),
        Waveform::Sinusoid => spec.amplitude * (w * t).sin(),
        Waveform::WindowedSinusoid => {
            let local = t - spec.window_start;
            if local >= F::zero() && local < spec.window_duration {
                spec.amplitude * (w * local).sin()
            } else {
                F::zero()
            }
        }
        Waveform::Step => {
            if t >= spec.window_start {
                spec.step_delta
            } else {
                F::zero()
            }
        }
        Waveform::Square => {
            let s = (w * t).sin();
            if s >= F::zero() {
                spec.amplitude
            } else {
                -spec.amplitude
            }
        }
        Waveform::Sawtooth => {
            let phase = w * t / fp::<F>(2.0 * std::f64::consts::PI);
            let frac = phase - phase.floor();
            spec.amplitude * (fp::<F>(2.0) * frac - F::one())
        }
    }
}

/// Time derivative of the offset at `t` (m/s^2); 0 at jump discontinuities.
pub fn evaluate_rate<F: Real>(spec: &PerturbationSpec<F>, t: F) -> F {
    let w = spec.angular_frequency;
    match spec.waveform {
        Waveform::None | Waveform::Step | Waveform::Square => F::zero(),
        Waveform::Sinusoid => spec.amplitude * w * (w * t).cos(),
        Waveform::WindowedSinusoid => {
            let local = t - spec.window_start;
            if local >= F::zero() && local < spec.window_duration {
                spec.amplitude * w * (w * local).cos()
            } else {
                F::zero()
            }
        }
        Waveform::Sawtooth => spec.amplitude * w / fp::<F>(std::f64::consts::PI),
    }
}

/// Leader velocity max(0, v_e + offset) at time `t` (m/s).
pub fn leader_velocity<F: Real>(v_e: F, spec: &PerturbationSpec<F>, t: F) -> F {
    (v_e + evaluate(spec, t)).max(F::zero())
}

/// Leader acceleration consistent with [`leader_velocity`] (m/s^2): the
/// offset rate, or 0 while the zero-floor clamp is active.
pub fn leader_accel<F: Real>(v_e: F, spec: &PerturbationSpec<F>, t: F) -> F {
    if v_e + evaluate(spec, t) < F::zero() {
        F::zero()
    } else {
        evaluate_rate(spec, t)
    }
}

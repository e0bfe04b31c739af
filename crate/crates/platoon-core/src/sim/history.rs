//! Time-stamped per-vehicle state history backing delayed-information
//! lookups.

use crate::real::Real;

/// Kinematic sample of one vehicle at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState<F> {
    /// Position (m); the simulator stores leader-relative positions here.
    pub position: F,
    /// Velocity (m/s).
    pub velocity: F,
    /// Last commanded acceleration (m/s^2).
    pub acceleration: F,
}

impl<F: Real> VehicleState<F> {
    fn lerp(a: &Self, b: &Self, theta: F) -> Self {
        let l = |x: F, y: F| x + (y - x) * theta;
        VehicleState {
            position: l(a.position, b.position),
            velocity: l(a.velocity, b.velocity),
            acceleration: l(a.acceleration, b.acceleration),
        }
    }
}

/// Recorded state history of one vehicle with interpolating lookups.
///
/// * Queries between samples interpolate linearly, so lags need not be
///   multiples of the integration step.
/// * Queries before the first sample return the equilibrium pre-fill:
///   cruising at the initial velocity with zero acceleration, position
///   extrapolated backward from the initial position. A platoon that starts
///   in equilibrium therefore sees the same equilibrium through any warm-up
///   lookback.
/// * Queries past the newest sample clamp to it.
#[derive(Debug, Clone)]
pub struct HistoryBuffer<F> {
    times: Vec<F>,
    states: Vec<VehicleState<F>>,
    initial: VehicleState<F>,
    span: F,
}

impl<F: Real> HistoryBuffer<F> {
    /// `initial` is the vehicle's state at t = 0 (pre-fill anchor); `span` is
    /// the guaranteed lookback behind the newest sample.
    pub fn new(initial: VehicleState<F>, span: F) -> Self {
        HistoryBuffer { times: Vec::new(), states: Vec::new(), initial, span }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Appends a sample; timestamps must be strictly increasing.
    pub fn push(&mut self, t: F, state: VehicleState<F>) {
        if let Some(&last) = self.times.last() {
            assert!(t > last, "history timestamps must strictly increase");
        }
        self.times.push(t);
        self.states.push(state);
        self.prune();
    }

    /// State at `t_query`, interpolated between the bracketing samples.
    pub fn delayed_lookup(&self, t_query: F) -> VehicleState<F> {
        let first = self.times.first().copied();
        if first.is_none() || t_query < first.unwrap() {
            // equilibrium pre-fill: back-extrapolate from the t = 0 anchor
            return VehicleState {
                position: self.initial.position + self.initial.velocity * t_query,
                velocity: self.initial.velocity,
                acceleration: F::zero(),
            };
        }
        let idx = self.times.partition_point(|&s| s <= t_query);
        if idx == self.times.len() {
            return self.states[idx - 1];
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let theta = (t_query - t0) / (t1 - t0);
        VehicleState::lerp(&self.states[idx - 1], &self.states[idx], theta)
    }

    /// Drops samples no lookup within `span` of the newest sample can reach,
    /// keeping one sample at or before the cutoff so interpolation still
    /// brackets.
    fn prune(&mut self) {
        let Some(&latest) = self.times.last() else { return };
        let cutoff = latest - self.span;
        let first_inside = self.times.partition_point(|&t| t < cutoff);
        let keep_from = first_inside.saturating_sub(1);
        if keep_from > 0 {
            self.times.drain(..keep_from);
            self.states.drain(..keep_from);
        }
    }
}

//! Cooperative adaptive cruise control: constant-time-headway spacing policy
//! with feedback on the spacing error and feedforward on communicated leader
//! velocity and acceleration, optionally delayed by the communication link.

use crate::real::{fp, Real};

/// Controller gains and policy parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaccParams<F> {
    /// Proportional gain on the spacing error (1/s^2).
    pub k_p: F,
    /// Derivative gain on the spacing-error rate (1/s).
    pub k_d: F,
    /// Gain on the communicated leader-velocity difference (1/s).
    pub k_v: F,
    /// Gain on the communicated leader acceleration (dimensionless).
    pub k_a: F,
    /// Communication latency tau (s) on the k_v and k_a terms.
    pub comm_delay: F,
    /// Standstill distance r (m): desired gap at zero speed.
    pub standstill: F,
    /// Time headway h (s) of the spacing policy.
    pub time_headway: F,
    /// When off, the k_v and k_a communicated terms are dropped entirely.
    pub use_v2v: bool,
    /// When off, communicated terms use instantaneous values (tau treated as 0).
    pub use_delay: bool,
}

impl<F: Real> Default for CaccParams<F> {
    fn default() -> Self {
        // Gains chosen to satisfy the no-delay sufficient conditions
        // k_a <= k_v/2 and k_d > sqrt(k_p).
        CaccParams {
            k_p: fp(0.25),
            k_d: fp(0.7),
            k_v: fp(1.0),
            k_a: fp(0.4),
            comm_delay: F::zero(),
            standstill: fp(2.0),
            time_headway: fp(1.5),
            use_v2v: true,
            use_delay: false,
        }
    }
}

impl<F: Real> CaccParams<F> {
    /// Collects invariant violations; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (name, g) in [
            ("k_p", self.k_p),
            ("k_d", self.k_d),
            ("k_v", self.k_v),
            ("k_a", self.k_a),
        ] {
            if !(g >= F::zero()) {
                errs.push(format!("{name} must be >= 0, got {g}"));
            }
        }
        if !(self.comm_delay >= F::zero()) {
            errs.push(format!("comm_delay must be >= 0, got {}", self.comm_delay));
        }
        if !(self.standstill >= F::zero()) {
            errs.push(format!("standstill must be >= 0, got {}", self.standstill));
        }
        if !(self.time_headway > F::zero()) {
            errs.push(format!("time_headway must be > 0, got {}", self.time_headway));
        }
        if self.use_delay && !self.use_v2v {
            errs.push("use_delay requires use_v2v".to_string());
        }
        errs
    }
}

/// What a follower observes about its immediate leader at one instant.
///
/// Delayed fields must equal the instantaneous ones when the communication
/// latency is zero; the history buffer guarantees this in simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborObservation<F> {
    /// Leader position minus follower position (m).
    pub gap: F,
    /// Leader velocity now (m/s).
    pub lead_velocity: F,
    /// Leader acceleration now (m/s^2).
    pub lead_acceleration: F,
    /// Leader velocity as last received over the link (m/s).
    pub delayed_lead_velocity: F,
    /// Leader acceleration as last received over the link (m/s^2).
    pub delayed_lead_acceleration: F,
}

/// Desired gap r + h*v for the constant-time-headway policy (m).
pub fn cacc_desired_spacing<F: Real>(v: F, p: &CaccParams<F>) -> F {
    p.standstill + p.time_headway * v
}

/// Spacing error in the desired-minus-actual orientation, with its
/// analytic rate.
///
/// e = (r + h*v) - gap; e_dot = h*a_self - (v_lead - v). The rate comes from
/// state rather than numerical differencing so integrator noise never feeds
/// back through the derivative gain. Note the metrics layer reports errors in
/// the opposite (actual-minus-desired) orientation.
pub fn cacc_spacing_error<F: Real>(
    gap: F,
    v: F,
    v_lead: F,
    a_self: F,
    p: &CaccParams<F>,
) -> (F, F) {
    let e = cacc_desired_spacing(v, p) - gap;
    let e_dot = p.time_headway * a_self - (v_lead - v);
    (e, e_dot)
}

/// Commanded acceleration: k_p*e + k_d*e_dot plus, with v2v on, the
/// communicated terms k_v*(v_lead - v) + k_a*a_lead taken from the delayed
/// or instantaneous observation per `use_delay` (m/s^2).
pub fn cacc_accel<F: Real>(
    e: F,
    e_dot: F,
    v: F,
    obs: &NeighborObservation<F>,
    p: &CaccParams<F>,
) -> F {
    let mut a = p.k_p * e + p.k_d * e_dot;
    if p.use_v2v {
        let (v_lead, a_lead) = if p.use_delay {
            (obs.delayed_lead_velocity, obs.delayed_lead_acceleration)
        } else {
            (obs.lead_velocity, obs.lead_acceleration)
        };
        a = a + p.k_v * (v_lead - v) + p.k_a * a_lead;
    }
    a
}

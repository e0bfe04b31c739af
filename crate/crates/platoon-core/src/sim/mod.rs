//! Fixed-step platoon simulation: an analytic leader velocity profile, one
//! car-following law driving every follower, optional information delays,
//! and full trajectory recording on the uniform grid t_k = k dt.
//!
//! Integration is classical four-stage Runge-Kutta. Delayed quantities are
//! frozen per macro step at their start-of-step interpolated values (method
//! of steps): lags in the bundled scenarios dwarf the step size, so the
//! intra-step variation they ignore is negligible, and freezing keeps every
//! run strictly deterministic. With no delay active, all laws read live
//! stage states and the full fourth-order accuracy applies.
//!
//! Positions are integrated leader-relative and only shifted by the
//! configured base when recorded, so translating the start position cannot
//! perturb gaps or velocities even in the last bit.

pub mod history;

pub use history::{HistoryBuffer, VehicleState};

use crate::models::{
    cacc_accel, cacc_desired_spacing, gmm_accel, idm_accel, idm_desired_gap,
    idm_spacing_only_accel, ovm_accel, CaccParams, GmmParams, IdmParams, ModelError,
    NeighborObservation, OvmParams,
};
use crate::perturb::{leader_accel, leader_velocity, PerturbationSpec};
use crate::real::{fp, Real};

/// Which car-following law drives the followers.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec<F> {
    Idm(IdmParams<F>),
    IdmSpacingOnly(IdmParams<F>),
    Ovm(OvmParams<F>),
    Gmm(GmmParams<F>),
    Cacc(CaccParams<F>),
}

impl<F: Real> ModelSpec<F> {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Idm(_) => "idm",
            ModelSpec::IdmSpacingOnly(_) => "idm_spacing_only",
            ModelSpec::Ovm(_) => "ovm",
            ModelSpec::Gmm(_) => "gmm",
            ModelSpec::Cacc(_) => "cacc",
        }
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            ModelSpec::Idm(p) | ModelSpec::IdmSpacingOnly(p) => p.validate(),
            ModelSpec::Ovm(p) => p.validate(),
            ModelSpec::Gmm(p) => p.validate(),
            ModelSpec::Cacc(p) => p.validate(),
        }
    }
}

/// How initial spacing is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpacingInit<F> {
    /// Consecutive vehicles start exactly this far apart (m).
    Fixed(F),
    /// Solve the model's own equilibrium gap at the equilibrium speed.
    Auto,
}

/// What to do when a gap closes to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionPolicy {
    /// Log the contact and stop, keeping the partial trajectory.
    Abort,
    /// Log the contact once per pair and keep integrating. Only laws that
    /// stay defined at nonpositive gaps can actually continue; the others
    /// abort at the first out-of-domain evaluation regardless.
    Record,
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatoonConfig<F> {
    /// Vehicle count, leader included. 1 simulates the leader profile alone.
    pub n_vehicles: usize,
    pub model: ModelSpec<F>,
    /// Cruise speed v_e every vehicle starts at (m/s).
    pub equilibrium_speed: F,
    pub spacing: SpacingInit<F>,
    /// Used by time-gap metrics only, never for collision detection (gaps
    /// are front-to-front).
    pub vehicle_length: F,
    /// Reaction lag applied to every input of the reactive laws (s). Must be
    /// 0 for the cooperative controller, whose communication lag lives in
    /// its own parameters.
    pub response_delay: F,
    pub perturbation: PerturbationSpec<F>,
    pub dt: F,
    /// Snapped to the nearest whole number of steps.
    pub t_end: F,
    /// Recorded position of the leader at t = 0 (m).
    pub position_base: F,
    pub collision_policy: CollisionPolicy,
}

impl<F: Real> PlatoonConfig<F> {
    /// A config with library defaults: auto equilibrium spacing, no
    /// perturbation, dt = 0.01 s, t_end = 50 s, L = 5 m, abort on contact.
    pub fn new(model: ModelSpec<F>, n_vehicles: usize, equilibrium_speed: F) -> Self {
        PlatoonConfig {
            n_vehicles,
            model,
            equilibrium_speed,
            spacing: SpacingInit::Auto,
            vehicle_length: fp(5.0),
            response_delay: F::zero(),
            perturbation: PerturbationSpec::none(),
            dt: fp(0.01),
            t_end: fp(50.0),
            position_base: F::zero(),
            collision_policy: CollisionPolicy::Abort,
        }
    }

    /// Number of integration steps after snapping t_end to the grid.
    pub fn steps(&self) -> usize {
        let n = (self.t_end / self.dt).to_f64().unwrap_or(0.0).round();
        if n < 1.0 {
            1
        } else {
            n as usize
        }
    }

    /// Initial inter-vehicle gap, solving the model equilibrium when set to
    /// auto.
    pub fn resolved_gap(&self) -> Result<F, String> {
        match self.spacing {
            SpacingInit::Fixed(s) => Ok(s),
            SpacingInit::Auto => auto_equilibrium_gap(&self.model, self.equilibrium_speed),
        }
    }

    /// Collects invariant violations; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.n_vehicles == 0 {
            errs.push("n_vehicles must be at least 1".to_string());
        }
        if !(self.dt > F::zero()) {
            errs.push(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end > self.dt) {
            errs.push(format!("t_end must exceed dt, got t_end {} at dt {}", self.t_end, self.dt));
        }
        if !(self.vehicle_length >= F::zero()) {
            errs.push(format!("vehicle_length must be >= 0, got {}", self.vehicle_length));
        }
        if !(self.equilibrium_speed >= F::zero()) {
            errs.push(format!("equilibrium_speed must be >= 0, got {}", self.equilibrium_speed));
        }
        if !(self.response_delay >= F::zero()) {
            errs.push(format!("response_delay must be >= 0, got {}", self.response_delay));
        } else if self.response_delay > F::zero() && matches!(self.model, ModelSpec::Cacc(_)) {
            errs.push(
                "response_delay drives the reactive laws; the cooperative controller \
                 models its lag with comm_delay"
                    .to_string(),
            );
        }
        if let SpacingInit::Fixed(s) = self.spacing {
            if !(s > F::zero()) {
                errs.push(format!("fixed spacing must be > 0, got {s}"));
            }
        } else if let Err(e) = self.resolved_gap() {
            errs.push(e);
        }
        for e in self.model.validate() {
            errs.push(format!("model: {e}"));
        }
        for e in self.perturbation.validate() {
            errs.push(format!("perturbation: {e}"));
        }
        errs
    }
}

/// Gap at which the given law holds `v_e` steady, from each model's closed
/// form.
pub fn auto_equilibrium_gap<F: Real>(model: &ModelSpec<F>, v_e: F) -> Result<F, String> {
    match model {
        ModelSpec::Idm(p) => {
            if v_e >= p.desired_speed {
                return Err(format!(
                    "no equilibrium gap at {} m/s: the free-road term needs v_e < desired_speed {}",
                    v_e, p.desired_speed
                ));
            }
            let free = (v_e / p.desired_speed).powf(p.accel_exponent);
            Ok(idm_desired_gap(v_e, F::zero(), p) / (F::one() - free).sqrt())
        }
        ModelSpec::IdmSpacingOnly(p) => Ok(idm_desired_gap(v_e, F::zero(), p)),
        ModelSpec::Ovm(p) => {
            // invert v0 (tanh(s - h) + tanh h) = v_e
            let arg = v_e / p.desired_speed - p.form_offset.tanh();
            if !(arg > -F::one() && arg < F::one()) {
                return Err(format!(
                    "no equilibrium gap at {v_e} m/s: outside the optimal-velocity range"
                ));
            }
            let s = p.form_offset + arg.atanh();
            if s > F::zero() {
                Ok(s)
            } else {
                Err(format!("equilibrium gap {s} m is nonpositive at {v_e} m/s"))
            }
        }
        ModelSpec::Gmm(_) => Err(
            "the speed-coupling law holds any spacing at matched speeds; set an explicit gap"
                .to_string(),
        ),
        ModelSpec::Cacc(p) => Ok(cacc_desired_spacing(v_e, p)),
    }
}

/// Notable occurrences during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimEvent<F> {
    /// Initial follower accelerations are not all ~0: the configured spacing
    /// and speed are not an equilibrium of this model.
    NonEquilibriumStart { max_accel: F },
    /// A gap reached zero, front-to-front.
    Collision { time: F, pair: usize, gap: F },
    /// A follower hit standstill and was held at v = 0 (logged once per
    /// vehicle).
    VelocityClamped { time: F, vehicle: usize },
    /// The state left the laws' domain or turned non-finite; the run
    /// stopped.
    NonFinite { time: F },
}

impl<F: Real> SimEvent<F> {
    pub fn kind(&self) -> &'static str {
        match self {
            SimEvent::NonEquilibriumStart { .. } => "nonequilibrium_start",
            SimEvent::Collision { .. } => "collision",
            SimEvent::VelocityClamped { .. } => "velocity_clamped",
            SimEvent::NonFinite { .. } => "non_finite",
        }
    }

    pub fn time(&self) -> Option<F> {
        match self {
            SimEvent::NonEquilibriumStart { .. } => None,
            SimEvent::Collision { time, .. }
            | SimEvent::VelocityClamped { time, .. }
            | SimEvent::NonFinite { time } => Some(*time),
        }
    }
}

/// Complete recorded run on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    pub times: Vec<F>,
    /// positions[vehicle][sample] (m), leader first.
    pub positions: Vec<Vec<F>>,
    pub velocities: Vec<Vec<F>>,
    /// Commanded accelerations; the leader's entry is its analytic profile
    /// rate.
    pub accelerations: Vec<Vec<F>>,
    /// gaps[pair][sample] = x_lead - x_follow for consecutive pairs,
    /// computed base-free.
    pub gaps: Vec<Vec<F>>,
    pub events: Vec<SimEvent<F>>,
    /// True when the run stopped before t_end.
    pub aborted: bool,
}

impl<F: Real> Trajectory<F> {
    pub fn n_vehicles(&self) -> usize {
        self.positions.len()
    }

    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    pub fn gap_series(&self, pair: usize) -> Vec<F> {
        self.gaps[pair].clone()
    }

    /// Assembles a trajectory from raw series, deriving gaps from positions.
    pub fn from_series(
        times: Vec<F>,
        positions: Vec<Vec<F>>,
        velocities: Vec<Vec<F>>,
        accelerations: Vec<Vec<F>>,
        events: Vec<SimEvent<F>>,
    ) -> Self {
        let gaps = positions
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(&a, &b)| a - b).collect())
            .collect();
        Trajectory { times, positions, velocities, accelerations, gaps, events, aborted: false }
    }
}

/// Initial states: vehicles at the resolved gap, all at the equilibrium
/// speed, each follower's acceleration evaluated in place. With auto
/// spacing the accelerations vanish up to roundoff; with a fixed
/// off-equilibrium gap they measure how far from steady state the run
/// begins.
pub fn equilibrium_init<F: Real>(cfg: &PlatoonConfig<F>) -> Result<Vec<VehicleState<F>>, String> {
    let gap = cfg.resolved_gap()?;
    let v_e = cfg.equilibrium_speed;
    let mut states = Vec::with_capacity(cfg.n_vehicles);
    let mut rel = F::zero();
    for i in 0..cfg.n_vehicles {
        let acceleration = if i == 0 {
            F::zero()
        } else {
            law_accel(&cfg.model, gap, v_e, v_e, F::zero(), gap)
                .map_err(|e| format!("initial state is outside the model domain: {e}"))?
        };
        states.push(VehicleState { position: cfg.position_base + rel, velocity: v_e, acceleration });
        rel = rel - gap;
    }
    Ok(states)
}

// One follower's commanded acceleration from instantaneous inputs.
fn law_accel<F: Real>(
    model: &ModelSpec<F>,
    gap: F,
    v: F,
    v_lead: F,
    a_lead: F,
    gap_ref: F,
) -> Result<F, ModelError<F>> {
    match model {
        ModelSpec::Idm(p) => idm_accel(v, v - v_lead, gap, p),
        ModelSpec::IdmSpacingOnly(p) => idm_spacing_only_accel(v, v - v_lead, gap, p),
        ModelSpec::Ovm(p) => Ok(ovm_accel(v, gap, p)),
        ModelSpec::Gmm(p) => gmm_accel(v, gap, v_lead - v, p),
        ModelSpec::Cacc(p) => {
            let obs = NeighborObservation {
                gap,
                lead_velocity: v_lead,
                lead_acceleration: a_lead,
                delayed_lead_velocity: v_lead,
                delayed_lead_acceleration: a_lead,
            };
            Ok(cacc_control(gap, v, v_lead, &obs, gap_ref, p))
        }
    }
}

/// Cooperative control as integrated: the proportional branch acts on the
/// gap's departure from its initial reference and the derivative branch on
/// the measured gap rate, while the communicated speed and acceleration
/// terms go through `cacc_accel`'s delayed-or-live selection.
///
/// Driving the gains with the spacing-policy error of
/// [`crate::models::cacc_spacing_error`] would close an algebraic loop
/// through the commanded acceleration (its rate carries an h*a term) whose
/// loop gain k_d*h exceeds 1 at the default tuning, so that form has no
/// usable explicit update; the gap-referenced form keeps the published gain
/// set meaningful and reproduces the same no-delay transfer function.
fn cacc_control<F: Real>(
    gap: F,
    v: F,
    v_lead: F,
    obs: &NeighborObservation<F>,
    gap_ref: F,
    p: &CaccParams<F>,
) -> F {
    let e = gap - gap_ref;
    let e_dot = v_lead - v;
    cacc_accel(e, e_dot, v, obs, p)
}

// Per-step frozen information for one follower.
#[derive(Clone, Copy)]
enum StepObs<F> {
    // no delay active: read live stage state
    Live,
    // reactive-law inputs all read at t - tau_r
    FrozenReactive { gap: F, v_self: F, v_lead: F },
    // communicated leader terms read at t - tau; local terms stay live
    FrozenV2v { v_lead: F, a_lead: F },
}

// A stage evaluation that left the laws' domain.
struct Fault<F> {
    time: F,
    pair: usize,
    error: ModelError<F>,
}

/// Integrates the configured run and records every sample.
///
/// Returns Err only for invalid configs. Mid-run trouble (contact under the
/// abort policy, out-of-domain or non-finite states) ends the run early
/// with the partial trajectory retained, the cause in `events`, and
/// `aborted` set.
///
/// Determinism: the whole run is sequential fixed-order arithmetic, so
/// identical configs produce bit-identical trajectories.
pub fn run_simulation<F: Real>(cfg: &PlatoonConfig<F>) -> Result<Trajectory<F>, String> {
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(problems.join("; "));
    }
    let n = cfg.n_vehicles;
    let dt = cfg.dt;
    let half_dt = dt / fp::<F>(2.0);
    let steps = cfg.steps();
    let v_e = cfg.equilibrium_speed;
    let spec = &cfg.perturbation;
    let base = cfg.position_base;
    let gap0 = cfg.resolved_gap()?;
    let init = equilibrium_init(cfg)?;

    // at most one information delay is active per run
    let (reactive_delay, v2v_delay) = match &cfg.model {
        ModelSpec::Cacc(p) if p.use_delay && p.comm_delay > F::zero() => (None, Some(p.comm_delay)),
        ModelSpec::Cacc(_) => (None, None),
        _ if cfg.response_delay > F::zero() => (Some(cfg.response_delay), None),
        _ => (None, None),
    };
    let max_delay = reactive_delay.or(v2v_delay).unwrap_or(F::zero());
    let span = max_delay + dt + dt;

    // leader-relative positions; the base enters only at recording time
    let mut r: Vec<F> = Vec::with_capacity(n);
    let mut rel = F::zero();
    for _ in 0..n {
        r.push(rel);
        rel = rel - gap0;
    }
    let mut v: Vec<F> = vec![v_e; n];
    // the leader's velocity is analytic from the very first sample
    v[0] = leader_velocity(v_e, spec, F::zero());
    let mut a: Vec<F> = vec![F::zero(); n];

    let mut histories: Vec<HistoryBuffer<F>> = r
        .iter()
        .map(|&ri| {
            HistoryBuffer::new(
                VehicleState { position: ri, velocity: v_e, acceleration: F::zero() },
                span,
            )
        })
        .collect();

    let cap = steps + 1;
    let mut times: Vec<F> = Vec::with_capacity(cap);
    let mut positions: Vec<Vec<F>> = vec![Vec::with_capacity(cap); n];
    let mut velocities: Vec<Vec<F>> = vec![Vec::with_capacity(cap); n];
    let mut accelerations: Vec<Vec<F>> = vec![Vec::with_capacity(cap); n];
    let mut gaps: Vec<Vec<F>> = vec![Vec::with_capacity(cap); n.saturating_sub(1)];
    let mut events: Vec<SimEvent<F>> = Vec::new();
    let mut aborted = false;

    let max_init_accel =
        init.iter().skip(1).map(|s| s.acceleration.abs()).fold(F::zero(), F::max);
    if n > 1 && max_init_accel > fp(1e-9) {
        events.push(SimEvent::NonEquilibriumStart { max_accel: max_init_accel });
    }

    let frozen_obs = |histories: &[HistoryBuffer<F>], t: F, i: usize| -> StepObs<F> {
        if let Some(tau) = reactive_delay {
            let lead = histories[i - 1].delayed_lookup(t - tau);
            let own = histories[i].delayed_lookup(t - tau);
            StepObs::FrozenReactive {
                gap: lead.position - own.position,
                v_self: own.velocity,
                v_lead: lead.velocity,
            }
        } else if let Some(tau) = v2v_delay {
            let lead = histories[i - 1].delayed_lookup(t - tau);
            StepObs::FrozenV2v { v_lead: lead.velocity, a_lead: lead.acceleration }
        } else {
            StepObs::Live
        }
    };

    // commanded acceleration of follower i from stage state plus its frozen
    // observations; laws never see a negative speed (standstill floor)
    let follower_accel = |rs: &[F],
                          vs: &[F],
                          v_lead_stage: F,
                          a_lead_stage: F,
                          i: usize,
                          obs: &StepObs<F>|
     -> Result<F, ModelError<F>> {
        let gap_live = rs[i - 1] - rs[i];
        let v_self = vs[i].max(F::zero());
        let v_lead_stage = v_lead_stage.max(F::zero());
        match obs {
            StepObs::Live => law_accel(&cfg.model, gap_live, v_self, v_lead_stage, a_lead_stage, gap0),
            StepObs::FrozenReactive { gap, v_self, v_lead } => match &cfg.model {
                ModelSpec::Idm(p) => idm_accel(*v_self, *v_self - *v_lead, *gap, p),
                ModelSpec::IdmSpacingOnly(p) => {
                    idm_spacing_only_accel(*v_self, *v_self - *v_lead, *gap, p)
                }
                ModelSpec::Ovm(p) => Ok(ovm_accel(*v_self, *gap, p)),
                ModelSpec::Gmm(p) => gmm_accel(*v_self, *gap, *v_lead - *v_self, p),
                ModelSpec::Cacc(_) => {
                    unreachable!("reactive delay is rejected for the cooperative controller")
                }
            },
            StepObs::FrozenV2v { v_lead, a_lead } => {
                let ModelSpec::Cacc(p) = &cfg.model else {
                    unreachable!("v2v delay only arises for the cooperative controller")
                };
                let nb = NeighborObservation {
                    gap: gap_live,
                    lead_velocity: v_lead_stage,
                    lead_acceleration: a_lead_stage,
                    delayed_lead_velocity: *v_lead,
                    delayed_lead_acceleration: *a_lead,
                };
                Ok(cacc_control(gap_live, v_self, v_lead_stage, &nb, gap0, p))
            }
        }
    };

    // one derivative evaluation at stage time ts; dv[0] mirrors the analytic
    // leader rate and is never integrated (the leader velocity is assigned)
    let eval = |ts: F,
                rs: &[F],
                vs: &[F],
                obs: &[StepObs<F>],
                dr: &mut [F],
                dv: &mut [F]|
     -> Result<(), Fault<F>> {
        let v0 = leader_velocity(v_e, spec, ts);
        let a0 = leader_accel(v_e, spec, ts);
        dr[0] = v0;
        dv[0] = a0;
        let mut v_lead = v0;
        let mut a_lead = a0;
        for i in 1..n {
            let acc = follower_accel(rs, vs, v_lead, a_lead, i, &obs[i - 1])
                .map_err(|error| Fault { time: ts, pair: i - 1, error })?;
            dr[i] = vs[i];
            dv[i] = acc;
            v_lead = vs[i];
            a_lead = acc;
        }
        Ok(())
    };

    let fault_event = |f: &Fault<F>| -> SimEvent<F> {
        match f.error {
            ModelError::NonPositiveGap { gap } => {
                SimEvent::Collision { time: f.time, pair: f.pair, gap }
            }
            ModelError::NegativeSpeedFractionalPower { .. } => SimEvent::NonFinite { time: f.time },
        }
    };

    let mut collided = vec![false; n.saturating_sub(1)];
    let mut clamped = vec![false; n];
    let mut obs: Vec<StepObs<F>> = Vec::new();
    let mut rs = vec![F::zero(); n];
    let mut vs = vec![F::zero(); n];
    let mut kr = vec![vec![F::zero(); n]; 4];
    let mut kv = vec![vec![F::zero(); n]; 4];

    'run: for k in 0..=steps {
        let t = F::from_usize(k).unwrap() * dt;

        // health checks on the freshly advanced state
        if r.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            events.push(SimEvent::NonFinite { time: t });
            aborted = true;
            break 'run;
        }
        let gaps_now: Vec<F> = (0..n.saturating_sub(1)).map(|i| r[i] - r[i + 1]).collect();
        for (pair, &g) in gaps_now.iter().enumerate() {
            if g <= F::zero() && !collided[pair] {
                collided[pair] = true;
                events.push(SimEvent::Collision { time: t, pair, gap: g });
                if cfg.collision_policy == CollisionPolicy::Abort {
                    aborted = true;
                    break 'run;
                }
            }
        }

        // observations, accelerations, and history for this instant; the
        // leader's sample goes in first so a short communication lag can
        // interpolate up to the current time
        obs.clear();
        a[0] = leader_accel(v_e, spec, t);
        histories[0].push(t, VehicleState { position: r[0], velocity: v[0], acceleration: a[0] });
        for i in 1..n {
            let o = frozen_obs(&histories, t, i);
            match follower_accel(&r, &v, v[i - 1], a[i - 1], i, &o) {
                Ok(acc) => a[i] = acc,
                Err(error) => {
                    events.push(fault_event(&Fault { time: t, pair: i - 1, error }));
                    aborted = true;
                    break 'run;
                }
            }
            histories[i].push(t, VehicleState { position: r[i], velocity: v[i], acceleration: a[i] });
            obs.push(o);
        }

        times.push(t);
        for i in 0..n {
            positions[i].push(base + r[i]);
            velocities[i].push(v[i]);
            accelerations[i].push(a[i]);
        }
        for (pair, &g) in gaps_now.iter().enumerate() {
            gaps[pair].push(g);
        }

        if k == steps {
            break;
        }

        // four-stage advance with the observations frozen
        let stage = |which: usize,
                     ts: F,
                     rs: &mut [F],
                     vs: &mut [F],
                     kr: &mut [Vec<F>],
                     kv: &mut [Vec<F>]|
         -> Result<(), Fault<F>> {
            eval(ts, rs, vs, &obs, &mut kr[which], &mut kv[which])
        };
        rs.copy_from_slice(&r);
        vs.copy_from_slice(&v);
        let advance = (|| -> Result<(), Fault<F>> {
            stage(0, t, &mut rs, &mut vs, &mut kr, &mut kv)?;
            for i in 0..n {
                rs[i] = r[i] + half_dt * kr[0][i];
                vs[i] = v[i] + half_dt * kv[0][i];
            }
            stage(1, t + half_dt, &mut rs, &mut vs, &mut kr, &mut kv)?;
            for i in 0..n {
                rs[i] = r[i] + half_dt * kr[1][i];
                vs[i] = v[i] + half_dt * kv[1][i];
            }
            stage(2, t + half_dt, &mut rs, &mut vs, &mut kr, &mut kv)?;
            for i in 0..n {
                rs[i] = r[i] + dt * kr[2][i];
                vs[i] = v[i] + dt * kv[2][i];
            }
            stage(3, t + dt, &mut rs, &mut vs, &mut kr, &mut kv)
        })();
        if let Err(fault) = advance {
            events.push(fault_event(&fault));
            aborted = true;
            break 'run;
        }

        let two = fp::<F>(2.0);
        let sixth = dt / fp::<F>(6.0);
        for i in 0..n {
            r[i] = r[i] + sixth * (kr[0][i] + two * kr[1][i] + two * kr[2][i] + kr[3][i]);
            if i > 0 {
                v[i] = v[i] + sixth * (kv[0][i] + two * kv[1][i] + two * kv[2][i] + kv[3][i]);
            }
        }
        let t1 = F::from_usize(k + 1).unwrap() * dt;
        v[0] = leader_velocity(v_e, spec, t1);
        for i in 1..n {
            if v[i] < F::zero() {
                v[i] = F::zero();
                if !clamped[i] {
                    clamped[i] = true;
                    events.push(SimEvent::VelocityClamped { time: t1, vehicle: i });
                }
            }
        }
    }

    Ok(Trajectory { times, positions, velocities, accelerations, gaps, events, aborted })
}

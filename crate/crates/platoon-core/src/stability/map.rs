//! Parameter-space stability maps: a named condition evaluated over a 2-D or
//! 3-D grid, normalized so that value >= 0 means stable.

use std::thread;

use super::conditions::{
    cacc_critical_delay, gmm_stability_condition, idm_damping_term, ovm_stability_metric,
};
use super::StabilityError;
use crate::models::{CaccParams, IdmParams, OvmParams};
use crate::real::{fp, Real};

/// One grid axis: `resolution` evenly spaced samples on [min, max],
/// inclusive of both ends (a single-sample axis sits at min).
#[derive(Debug, Clone, PartialEq)]
pub struct MapAxis<F> {
    pub name: String,
    pub min: F,
    pub max: F,
    pub resolution: usize,
}

impl<F: Real> MapAxis<F> {
    pub fn new(name: &str, min: F, max: F, resolution: usize) -> Self {
        MapAxis { name: name.to_string(), min, max, resolution }
    }

    /// Coordinate of sample `i`.
    pub fn value(&self, i: usize) -> F {
        if self.resolution <= 1 {
            return self.min;
        }
        let t = F::from_usize(i).unwrap() / F::from_usize(self.resolution - 1).unwrap();
        self.min + (self.max - self.min) * t
    }
}

/// Per-cell classification; `Undefined` marks cells where the condition
/// itself raised a domain error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Stable,
    Unstable,
    Undefined,
}

/// A named stability condition with a normalized margin: >= 0 stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapCondition {
    /// Damping coefficient over (closing speed, time headway).
    IdmDamping,
    /// Metric S over (equilibrium gap, sensitivity).
    OvmMetric,
    /// Critical-sensitivity margin l/s* - alpha over (spacing exponent, sensitivity).
    GmmSensitivity,
    /// No-delay margin min(k_v/2 - k_a, k_v - 2 k_d + k_p/omega0_ref^2)
    /// over (k_v, k_a).
    CaccNoDelay,
    /// Critical-delay margin tau_max - tau_ref over (k_v, k_a, omega_c).
    CaccDelayMargin,
}

impl MapCondition {
    pub fn name(&self) -> &'static str {
        match self {
            MapCondition::IdmDamping => "idm",
            MapCondition::OvmMetric => "ovm",
            MapCondition::GmmSensitivity => "gmm",
            MapCondition::CaccNoDelay => "cacc",
            MapCondition::CaccDelayMargin => "cacc3d",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "idm" => Some(MapCondition::IdmDamping),
            "ovm" => Some(MapCondition::OvmMetric),
            "gmm" => Some(MapCondition::GmmSensitivity),
            "cacc" => Some(MapCondition::CaccNoDelay),
            "cacc3d" => Some(MapCondition::CaccDelayMargin),
            _ => None,
        }
    }

    /// Axis names in grid order.
    pub fn axis_names(&self) -> &'static [&'static str] {
        match self {
            MapCondition::IdmDamping => &["closing_speed", "time_headway"],
            MapCondition::OvmMetric => &["gap", "sensitivity"],
            MapCondition::GmmSensitivity => &["spacing_exponent", "sensitivity"],
            MapCondition::CaccNoDelay => &["k_v", "k_a"],
            MapCondition::CaccDelayMargin => &["k_v", "k_a", "omega_c"],
        }
    }

    /// Default axis ranges matching the bundled analysis figures.
    pub fn default_axes<F: Real>(&self, resolution: usize) -> Vec<MapAxis<F>> {
        let names = self.axis_names();
        let ranges: &[(f64, f64)] = match self {
            MapCondition::IdmDamping => &[(-5.0, 5.0), (0.2, 3.0)],
            MapCondition::OvmMetric => &[(0.0, 50.0), (0.0, 3.0)],
            MapCondition::GmmSensitivity => &[(0.0, 4.0), (0.0, 1.0)],
            MapCondition::CaccNoDelay => &[(0.0, 2.0), (0.0, 1.0)],
            MapCondition::CaccDelayMargin => &[(0.2, 2.0), (0.0, 1.0), (0.2, 3.0)],
        };
        names
            .iter()
            .zip(ranges)
            .map(|(n, &(lo, hi))| MapAxis::new(n, fp(lo), fp(hi), resolution))
            .collect()
    }
}

/// Parameters held fixed while the axes sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFixedParams<F> {
    /// Intelligent-driver parameters for the damping condition (time headway
    /// comes from the axis).
    pub idm: IdmParams<F>,
    /// Speed at which the damping condition is evaluated (m/s).
    pub idm_speed: F,
    /// Optimal-velocity curve for the metric condition (sensitivity comes
    /// from the axis).
    pub ovm: OvmParams<F>,
    /// Equilibrium spacing s* for the critical-sensitivity condition (m).
    pub gmm_s_star: F,
    /// Controller gains for the cooperative conditions (k_v, k_a come from
    /// the axes).
    pub cacc: CaccParams<F>,
    /// Reference natural frequency for the second no-delay condition (rad/s).
    pub omega0_ref: F,
    /// Delay budget the critical delay is compared against (s).
    pub tau_ref: F,
}

impl<F: Real> Default for MapFixedParams<F> {
    fn default() -> Self {
        MapFixedParams {
            idm: IdmParams {
                max_accel: fp(1.0),
                desired_speed: fp(30.0),
                accel_exponent: fp(4.0),
                comfort_decel: fp(1.5),
                min_gap: fp(2.0),
                jam_gap: F::zero(),
                time_headway: fp(1.5),
            },
            idm_speed: fp(27.8),
            ovm: OvmParams { sensitivity: F::zero(), desired_speed: fp(22.0), form_offset: fp(4.0) },
            gmm_s_star: fp(6.0),
            cacc: CaccParams::default(),
            omega0_ref: F::one(),
            tau_ref: fp(0.15),
        }
    }
}

/// A full map request: condition, axes, and fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MapRequest<F> {
    pub condition: MapCondition,
    pub axes: Vec<MapAxis<F>>,
    pub fixed: MapFixedParams<F>,
}

impl<F: Real> MapRequest<F> {
    /// Request with default axes at `resolution` samples per axis.
    pub fn with_defaults(condition: MapCondition, resolution: usize) -> Self {
        MapRequest {
            condition,
            axes: condition.default_axes(resolution),
            fixed: MapFixedParams::default(),
        }
    }
}

/// Evaluated stability map. `values` is row-major over the axes (last axis
/// fastest); undefined cells hold NaN and are masked `Undefined`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap<F> {
    pub condition: String,
    pub axes: Vec<MapAxis<F>>,
    pub values: Vec<F>,
    pub mask: Vec<CellState>,
}

impl<F: Real> StabilityMap<F> {
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.resolution).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of a multi-axis cell (row-major, last axis fastest).
    pub fn index(&self, coords: &[usize]) -> usize {
        assert_eq!(coords.len(), self.axes.len());
        let mut idx = 0;
        for (i, &c) in coords.iter().enumerate() {
            debug_assert!(c < self.axes[i].resolution);
            idx = idx * self.axes[i].resolution + c;
        }
        idx
    }

    pub fn cell(&self, coords: &[usize]) -> (F, CellState) {
        let i = self.index(coords);
        (self.values[i], self.mask[i])
    }
}

fn margin<F: Real>(
    condition: MapCondition,
    fixed: &MapFixedParams<F>,
    coords: &[F],
) -> Result<F, StabilityError<F>> {
    match condition {
        MapCondition::IdmDamping => {
            let p = IdmParams { time_headway: coords[1], ..fixed.idm };
            idm_damping_term(fixed.idm_speed, coords[0], &p)
        }
        MapCondition::OvmMetric => Ok(ovm_stability_metric(coords[0], coords[1], &fixed.ovm)),
        MapCondition::GmmSensitivity => {
            let (critical, _) = gmm_stability_condition(coords[1], coords[0], fixed.gmm_s_star)?;
            Ok(critical - coords[1])
        }
        MapCondition::CaccNoDelay => {
            let p = &fixed.cacc;
            let w0 = fixed.omega0_ref;
            if w0 == F::zero() {
                return Err(StabilityError::ZeroReferenceFrequency);
            }
            let first = coords[0] / fp::<F>(2.0) - coords[1];
            let second = coords[0] - (fp::<F>(2.0) * p.k_d - p.k_p / (w0 * w0));
            Ok(first.min(second))
        }
        MapCondition::CaccDelayMargin => {
            let p = CaccParams { k_v: coords[0], k_a: coords[1], ..fixed.cacc };
            Ok(cacc_critical_delay(&p, coords[2])? - fixed.tau_ref)
        }
    }
}

/// Evaluates `req` over its grid. Cells are independent; evaluation is
/// parallelized over contiguous chunks with each cell written to its own
/// slot, so the result is deterministic regardless of thread count.
pub fn build_stability_map<F: Real>(req: &MapRequest<F>) -> Result<StabilityMap<F>, String> {
    let arity = req.condition.axis_names().len();
    if req.axes.len() != arity {
        return Err(format!(
            "condition {} takes {} axes, got {}",
            req.condition.name(),
            arity,
            req.axes.len()
        ));
    }
    for axis in &req.axes {
        if axis.resolution == 0 {
            return Err(format!("axis {} has zero resolution", axis.name));
        }
        if !(axis.min <= axis.max) {
            return Err(format!("axis {} has min > max", axis.name));
        }
    }
    let total: usize = req.axes.iter().map(|a| a.resolution).product();
    let mut values = vec![F::nan(); total];
    let mut mask = vec![CellState::Undefined; total];

    let decode = |mut flat: usize| -> Vec<F> {
        let mut coords = vec![F::zero(); req.axes.len()];
        for ax in (0..req.axes.len()).rev() {
            let res = req.axes[ax].resolution;
            coords[ax] = req.axes[ax].value(flat % res);
            flat /= res;
        }
        coords
    };

    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let chunk = total.div_ceil(workers).max(1);
    thread::scope(|scope| {
        for (ci, (vals, msk)) in
            values.chunks_mut(chunk).zip(mask.chunks_mut(chunk)).enumerate()
        {
            let decode = &decode;
            let fixed = &req.fixed;
            let condition = req.condition;
            scope.spawn(move || {
                let base = ci * chunk;
                for (off, (v, m)) in vals.iter_mut().zip(msk.iter_mut()).enumerate() {
                    let coords = decode(base + off);
                    match margin(condition, fixed, &coords) {
                        Ok(x) if x.is_finite() => {
                            *v = x;
                            *m = if x >= F::zero() { CellState::Stable } else { CellState::Unstable };
                        }
                        _ => {
                            *v = F::nan();
                            *m = CellState::Undefined;
                        }
                    }
                }
            });
        }
    });

    Ok(StabilityMap {
        condition: req.condition.name().to_string(),
        axes: req.axes.clone(),
        values,
        mask,
    })
}

//! Trajectory post-processing: spacing-error and time-gap series, peak
//! statistics, and per-pair string-stability verdicts.

use std::error::Error;
use std::fmt;
use std::ops::Range;

use crate::models::{cacc_desired_spacing, idm_desired_gap, CaccParams, IdmParams};
use crate::real::{fp, Real};
use crate::sim::Trajectory;

/// Default steady-state window: the last half of the run.
pub const DEFAULT_STEADY_FRACTION: f64 = 0.5;
/// Default tolerance on per-pair amplification ratios.
pub const DEFAULT_VERDICT_TOLERANCE: f64 = 5e-2;
/// Oscillations below this peak-to-peak level cannot anchor a ratio.
pub const RATIO_FLOOR: f64 = 1e-9;
/// Speeds at or below this are treated as standstill for time-gap purposes.
pub const STANDSTILL_SPEED: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError<F> {
    /// peak_to_peak was asked for a window with no samples in range.
    EmptyWindow { window: Range<usize>, len: usize },
    /// The upstream series oscillates too little to define an amplification
    /// ratio for this pair.
    UndefinedVerdict { pair: usize, upstream_peak_to_peak: F },
}

impl<F: fmt::Display> fmt::Display for MetricsError<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::EmptyWindow { window, len } => write!(
                f,
                "window {}..{} selects no samples from a series of length {}",
                window.start, window.end, len
            ),
            MetricsError::UndefinedVerdict { pair, upstream_peak_to_peak } => write!(
                f,
                "pair {pair}: upstream peak-to-peak {upstream_peak_to_peak} is below {RATIO_FLOOR}, \
                 amplification ratio undefined"
            ),
        }
    }
}

impl<F: fmt::Display + fmt::Debug> Error for MetricsError<F> {}

/// Per-pair spacing-error series e(t) = gap(t) - reference gap.
///
/// The reference is each pair's initial gap, which for equilibrium-started
/// runs equals the model's desired gap, so an unperturbed equilibrium run
/// reads identically zero for every model. A constant reference also keeps
/// the series directly comparable across models; for error against a
/// speed-dependent spacing policy see [`idm_policy_spacing_error`] and
/// [`cacc_policy_spacing_error`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingErrorSeries<F> {
    /// Always `actual_minus_desired`: positive means the follower is hanging
    /// back beyond the reference gap.
    pub convention: &'static str,
    pub times: Vec<F>,
    /// Reference gap per pair (the pair's gap at the first sample).
    pub references: Vec<F>,
    /// values[pair][k]
    pub values: Vec<Vec<F>>,
}

/// Per-pair time-gap series T_H(t) = (gap - L)/v of the follower.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGapSeries<F> {
    pub vehicle_length: F,
    pub times: Vec<F>,
    /// values[pair][k]; None where the follower is at standstill.
    pub values: Vec<Vec<Option<F>>>,
}

/// Which series the verdict ratios are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictBasis {
    /// Ratio of consecutive vehicles' velocity oscillations (default).
    Velocity,
    /// Ratio of consecutive pairs' spacing-error oscillations.
    SpacingError,
}

/// Outcome of a string-stability check over a steady window.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict<F> {
    pub basis: VerdictBasis,
    /// Downstream-over-upstream peak-to-peak ratios, front to back.
    pub ratios: Vec<F>,
    pub tolerance: F,
    /// True iff every ratio <= 1 + tolerance.
    pub stable: bool,
}

/// Index range covering the trailing `fraction` of `n` samples (at least one
/// sample when n > 0).
pub fn steady_window(n: usize, fraction: f64) -> Range<usize> {
    if n == 0 {
        return 0..0;
    }
    let take = ((n as f64) * fraction).round() as usize;
    let take = take.clamp(1, n);
    (n - take)..n
}

/// Max minus min of `series` over `window`.
pub fn peak_to_peak<F: Real>(series: &[F], window: Range<usize>) -> Result<F, MetricsError<F>> {
    let end = window.end.min(series.len());
    if window.start >= end {
        return Err(MetricsError::EmptyWindow { window, len: series.len() });
    }
    let slice = &series[window.start..end];
    let mut lo = slice[0];
    let mut hi = slice[0];
    for &x in &slice[1..] {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    Ok(hi - lo)
}

/// Spacing-error series for every consecutive pair, referenced to each
/// pair's initial gap.
pub fn spacing_error_series<F: Real>(traj: &Trajectory<F>) -> SpacingErrorSeries<F> {
    let pairs = traj.n_vehicles().saturating_sub(1);
    let mut references = Vec::with_capacity(pairs);
    let mut values = Vec::with_capacity(pairs);
    for pair in 0..pairs {
        let gaps = traj.gap_series(pair);
        let reference = gaps[0];
        references.push(reference);
        values.push(gaps.into_iter().map(|g| g - reference).collect());
    }
    SpacingErrorSeries {
        convention: "actual_minus_desired",
        times: traj.times.clone(),
        references,
        values,
    }
}

/// Time-gap series for every consecutive pair; samples at standstill are
/// masked rather than divided through.
pub fn time_gap_series<F: Real>(traj: &Trajectory<F>, vehicle_length: F) -> TimeGapSeries<F> {
    let pairs = traj.n_vehicles().saturating_sub(1);
    let standstill = fp::<F>(STANDSTILL_SPEED);
    let mut values = Vec::with_capacity(pairs);
    for pair in 0..pairs {
        let follower = &traj.velocities[pair + 1];
        let series = traj
            .gap_series(pair)
            .into_iter()
            .zip(follower)
            .map(|(gap, &v)| if v <= standstill { None } else { Some((gap - vehicle_length) / v) })
            .collect();
        values.push(series);
    }
    TimeGapSeries { vehicle_length, times: traj.times.clone(), values }
}

/// Pointwise error of the actual gap against the intelligent-driver desired
/// gap s*(v, dv).
pub fn idm_policy_spacing_error<F: Real>(gap: F, v: F, dv: F, p: &IdmParams<F>) -> F {
    gap - idm_desired_gap(v, dv, p)
}

/// Pointwise error of the actual gap against the constant-time-headway
/// desired spacing r + h v.
pub fn cacc_policy_spacing_error<F: Real>(gap: F, v: F, p: &CaccParams<F>) -> F {
    gap - cacc_desired_spacing(v, p)
}

/// Checks whether oscillations grow from each vehicle (or pair) to the next
/// over `window`. Stable iff every downstream/upstream peak-to-peak ratio
/// stays within 1 + tolerance.
pub fn string_stability_verdict<F: Real>(
    traj: &Trajectory<F>,
    window: Range<usize>,
    tolerance: F,
    basis: VerdictBasis,
) -> Result<StabilityVerdict<F>, MetricsError<F>> {
    let floor = fp::<F>(RATIO_FLOOR);
    let series: Vec<Vec<F>> = match basis {
        VerdictBasis::Velocity => traj.velocities.clone(),
        VerdictBasis::SpacingError => spacing_error_series(traj).values,
    };
    let mut ratios = Vec::new();
    for (pair, pairwise) in series.windows(2).enumerate() {
        let up = peak_to_peak(&pairwise[0], window.clone())?;
        let down = peak_to_peak(&pairwise[1], window.clone())?;
        if up < floor {
            return Err(MetricsError::UndefinedVerdict { pair, upstream_peak_to_peak: up });
        }
        ratios.push(down / up);
    }
    let bound = F::one() + tolerance;
    let stable = ratios.iter().all(|&r| r <= bound);
    Ok(StabilityVerdict { basis, ratios, tolerance, stable })
}

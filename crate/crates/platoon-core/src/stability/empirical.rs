//! Measured amplification ratios from simulated trajectories, the empirical
//! counterpart to the analytic transfer magnitudes.

use std::ops::Range;

use super::StabilityError;
use crate::metrics::{peak_to_peak, RATIO_FLOOR};
use crate::real::{fp, Real};
use crate::sim::Trajectory;

/// Peak-to-peak velocity oscillation of pair `pair`'s follower divided by
/// its leader's, over `window`. A ratio <= 1 means the pair does not amplify
/// the disturbance.
///
/// Pair `i` is the consecutive couple (vehicle i, vehicle i+1); the ratio is
/// follower over leader. Errors when the leader barely oscillates, since the
/// ratio would be noise.
pub fn empirical_amplification<F: Real>(
    traj: &Trajectory<F>,
    pair: usize,
    window: Range<usize>,
) -> Result<F, StabilityError<F>> {
    assert!(pair + 1 < traj.n_vehicles(), "pair {pair} out of range");
    let p2p = |vehicle: usize| -> Result<F, StabilityError<F>> {
        peak_to_peak(&traj.velocities[vehicle], window.clone())
            .map_err(|e| StabilityError::Domain { detail: e.to_string() })
    };
    let upstream = p2p(pair)?;
    let downstream = p2p(pair + 1)?;
    if upstream < fp(RATIO_FLOOR) {
        return Err(StabilityError::UndefinedRatio { pair, upstream_p2p: upstream });
    }
    Ok(downstream / upstream)
}

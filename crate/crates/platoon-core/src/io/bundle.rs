//! Run bundles: the on-disk artifact set for one simulation.
//!
//! A bundle directory holds `trajectory.csv`, `metrics.csv`, `events.csv`,
//! `verdict.toml`, `plots/*.svg`, and `provenance.toml`. Every file
//! cross-references the scenario hash; wall-clock time appears only in
//! `provenance.toml`, so the other files are byte-identical across repeat
//! runs of the same scenario.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::metrics::{
    peak_to_peak, spacing_error_series, steady_window, string_stability_verdict, StabilityVerdict,
    VerdictBasis,
};
use crate::scenario::ScenarioFile;
use crate::sim::{SimEvent, Trajectory};
use crate::stability::StabilityMap;

use super::csv::{map_csv_string, trajectory_csv_string, write_trajectory_csv};
use super::svg::{line_chart_svg, map_svg, LineChart, Series};

/// Failure while writing a bundle.
#[derive(Debug)]
pub enum BundleError {
    Io(std::io::Error),
}

impl std::fmt::Display for BundleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BundleError::Io(e) => write!(f, "cannot write bundle: {e}"),
        }
    }
}

impl std::error::Error for BundleError {}

impl From<std::io::Error> for BundleError {
    fn from(e: std::io::Error) -> Self {
        BundleError::Io(e)
    }
}

/// What a finished bundle contains and concluded.
#[derive(Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    /// Verdict when it could be computed; `None` leaves status "undefined".
    pub verdict: Option<StabilityVerdict<f64>>,
    /// Events carried over from the run, for caller-side reporting.
    pub n_events: usize,
    pub aborted: bool,
}

fn basis_name(b: VerdictBasis) -> &'static str {
    match b {
        VerdictBasis::Velocity => "velocity",
        VerdictBasis::SpacingError => "spacing_error",
    }
}

/// Writes the full artifact set for one simulated scenario under `dir`
/// (created if needed) and returns the computed summary.
pub fn write_run_bundle(
    dir: &Path,
    scenario: &ScenarioFile,
    traj: &Trajectory<f64>,
    toolkit_version: &str,
) -> Result<RunSummary, BundleError> {
    std::fs::create_dir_all(dir.join("plots"))?;
    let hash = scenario.source_hash;

    write_trajectory_csv(traj, Some(hash), &dir.join("trajectory.csv"))?;
    std::fs::write(dir.join("metrics.csv"), metrics_csv_string(scenario, traj))?;
    std::fs::write(dir.join("events.csv"), events_csv_string(traj, hash))?;

    let n = traj.n_samples();
    let window = steady_window(n, scenario.metrics.steady_fraction);
    let verdict = string_stability_verdict(
        traj,
        window,
        scenario.metrics.verdict_tolerance,
        scenario.metrics.basis,
    );
    let (verdict, reason) = match verdict {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    std::fs::write(
        dir.join("verdict.toml"),
        verdict_toml_string(scenario, verdict.as_ref(), reason.as_deref()),
    )?;

    if n > 0 {
        let velocity = LineChart {
            title: format!("{}: vehicle speeds", scenario.name),
            x_label: "time (s)".into(),
            y_label: "speed (m/s)".into(),
            series: (0..traj.n_vehicles())
                .map(|i| Series {
                    label: format!("Vehicle {i}"),
                    points: traj.times.iter().copied().zip(traj.velocities[i].iter().copied()).collect(),
                })
                .collect(),
        };
        if let Ok(svg) = line_chart_svg(&velocity) {
            std::fs::write(dir.join("plots").join("velocity.svg"), svg)?;
        }
        if traj.n_vehicles() > 1 {
            let errors = spacing_error_series(traj);
            let chart = LineChart {
                title: format!("{}: spacing error", scenario.name),
                x_label: "time (s)".into(),
                y_label: "spacing error (m)".into(),
                series: errors
                    .values
                    .iter()
                    .enumerate()
                    .map(|(p, vals)| Series {
                        label: format!("Cars {}-{}", p, p + 1),
                        points: errors.times.iter().copied().zip(vals.iter().copied()).collect(),
                    })
                    .collect(),
            };
            if let Ok(svg) = line_chart_svg(&chart) {
                std::fs::write(dir.join("plots").join("spacing_error.svg"), svg)?;
            }
        }
    }

    std::fs::write(dir.join("provenance.toml"), provenance_toml_string(scenario, toolkit_version))?;

    Ok(RunSummary {
        dir: dir.to_path_buf(),
        verdict,
        n_events: traj.events.len(),
        aborted: traj.aborted,
    })
}

/// Per-pair summary table: worst excursion over the whole run, steady-state
/// peak-to-peak figures, and the consecutive-pair speed amplification.
pub fn metrics_csv_string(scenario: &ScenarioFile, traj: &Trajectory<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# scenario={:016x}", scenario.source_hash);
    out.push_str(
        "pair,cars,gap_ref,max_abs_spacing_error,p2p_spacing_error,p2p_follower_speed,speed_amplification\n",
    );
    let n = traj.n_samples();
    if n == 0 || traj.n_vehicles() < 2 {
        return out;
    }
    let window = steady_window(n, scenario.metrics.steady_fraction);
    let errors = spacing_error_series(traj);
    for pair in 0..traj.n_vehicles() - 1 {
        let vals = &errors.values[pair];
        let max_abs = vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let p2p_err = peak_to_peak(vals, window.clone()).unwrap_or(f64::NAN);
        let p2p_follow = peak_to_peak(&traj.velocities[pair + 1], window.clone()).unwrap_or(f64::NAN);
        let p2p_lead = peak_to_peak(&traj.velocities[pair], window.clone()).unwrap_or(f64::NAN);
        let _ = write!(
            out,
            "{pair},{}-{},{},{},{},{},",
            pair,
            pair + 1,
            errors.references[pair],
            max_abs,
            p2p_err,
            p2p_follow
        );
        // Ratio left blank when the upstream vehicle is quiet.
        if p2p_lead > 1e-9 && p2p_follow.is_finite() {
            let _ = writeln!(out, "{}", p2p_follow / p2p_lead);
        } else {
            out.push('\n');
        }
    }
    out
}

/// One row per recorded event; columns not applying to a kind stay empty.
pub fn events_csv_string(traj: &Trajectory<f64>, scenario_hash: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# scenario={scenario_hash:016x}");
    out.push_str("kind,time,vehicle,pair,value\n");
    for ev in &traj.events {
        match ev {
            SimEvent::NonEquilibriumStart { max_accel } => {
                let _ = writeln!(out, "nonequilibrium_start,0,,,{max_accel}");
            }
            SimEvent::Collision { time, pair, gap } => {
                let _ = writeln!(out, "collision,{time},,{pair},{gap}");
            }
            SimEvent::VelocityClamped { time, vehicle } => {
                let _ = writeln!(out, "velocity_clamped,{time},{vehicle},,");
            }
            SimEvent::NonFinite { time } => {
                let _ = writeln!(out, "non_finite,{time},,,");
            }
        }
    }
    out
}

fn verdict_toml_string(
    scenario: &ScenarioFile,
    verdict: Option<&StabilityVerdict<f64>>,
    reason: Option<&str>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario = \"{}\"", scenario.name);
    let _ = writeln!(out, "scenario_hash = \"{:016x}\"", scenario.source_hash);
    let _ = writeln!(out, "basis = \"{}\"", basis_name(scenario.metrics.basis));
    let _ = writeln!(out, "tolerance = {:?}", scenario.metrics.verdict_tolerance);
    let _ = writeln!(out, "steady_fraction = {:?}", scenario.metrics.steady_fraction);
    match verdict {
        Some(v) => {
            let _ = writeln!(out, "status = \"{}\"", if v.stable { "stable" } else { "unstable" });
            let ratios: Vec<String> = v.ratios.iter().map(|r| format!("{r:?}")).collect();
            let _ = writeln!(out, "ratios = [{}]", ratios.join(", "));
        }
        None => {
            let _ = writeln!(out, "status = \"undefined\"");
            let _ = writeln!(out, "reason = \"{}\"", reason.unwrap_or("unknown"));
        }
    }
    out
}

fn provenance_toml_string(scenario: &ScenarioFile, toolkit_version: &str) -> String {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "toolkit_version = \"{toolkit_version}\"");
    let _ = writeln!(out, "scenario = \"{}\"", scenario.name);
    let _ = writeln!(out, "scenario_hash = \"{:016x}\"", scenario.source_hash);
    let _ = writeln!(out, "dt = {:?}", scenario.config.dt);
    let _ = writeln!(out, "n_vehicles = {}", scenario.config.n_vehicles);
    // The only wall-clock stamp in the bundle; everything else is
    // byte-reproducible.
    let _ = writeln!(out, "generated_unix_seconds = {stamp}");
    out
}

/// Writes `map.csv`, `map.svg`, and `provenance.toml` for a stability map.
pub fn write_map_bundle(
    dir: &Path,
    map: &StabilityMap<f64>,
    request_hash: u64,
    toolkit_version: &str,
) -> Result<(), BundleError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("map.csv"), map_csv_string(map, Some(request_hash)))?;
    if let Ok(svg) = map_svg(map) {
        std::fs::write(dir.join("map.svg"), svg)?;
    }
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut prov = String::new();
    let _ = writeln!(prov, "toolkit_version = \"{toolkit_version}\"");
    let _ = writeln!(prov, "condition = \"{}\"", map.condition);
    let _ = writeln!(prov, "request_hash = \"{request_hash:016x}\"");
    let _ = writeln!(prov, "generated_unix_seconds = {stamp}");
    std::fs::write(dir.join("provenance.toml"), prov)?;
    Ok(())
}

/// Re-renders the deterministic members of a run bundle to strings without
/// touching the filesystem; used by determinism tests.
pub fn deterministic_bundle_strings(
    scenario: &ScenarioFile,
    traj: &Trajectory<f64>,
) -> Vec<(&'static str, String)> {
    vec![
        ("trajectory.csv", trajectory_csv_string(traj, Some(scenario.source_hash))),
        ("metrics.csv", metrics_csv_string(scenario, traj)),
        ("events.csv", events_csv_string(traj, scenario.source_hash)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_bundled;
    use crate::sim::run_simulation;

    #[test]
    fn bundle_writes_expected_files() {
        let sf = load_bundled("cacc_v2v").unwrap();
        let mut cfg = sf.config.clone();
        cfg.t_end = 1.0;
        let traj = run_simulation(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = write_run_bundle(dir.path(), &sf, &traj, "0.0-test").unwrap();
        assert!(summary.verdict.is_some() || summary.n_events > 0);
        for f in ["trajectory.csv", "metrics.csv", "events.csv", "verdict.toml", "provenance.toml"] {
            assert!(dir.path().join(f).is_file(), "missing {f}");
        }
        assert!(dir.path().join("plots").join("velocity.svg").is_file());
        assert!(dir.path().join("plots").join("spacing_error.svg").is_file());
        let prov = std::fs::read_to_string(dir.path().join("provenance.toml")).unwrap();
        assert!(prov.contains(&format!("{:016x}", sf.source_hash)));
    }

    #[test]
    fn deterministic_members_are_byte_stable() {
        let sf = load_bundled("gmm_m0_l1").unwrap();
        let mut cfg = sf.config.clone();
        cfg.t_end = 2.0;
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(deterministic_bundle_strings(&sf, &a), deterministic_bundle_strings(&sf, &b));
    }

    #[test]
    fn metrics_rows_cover_every_pair() {
        let sf = load_bundled("idm_standard").unwrap();
        let mut cfg = sf.config.clone();
        cfg.t_end = 1.0;
        let traj = run_simulation(&cfg).unwrap();
        let csv = metrics_csv_string(&sf, &traj);
        // Comment, header, then one row per consecutive pair.
        assert_eq!(csv.trim_end().lines().count(), 2 + 4);
        assert!(csv.contains("0-1"));
        assert!(csv.contains("3-4"));
    }

    #[test]
    fn event_rows_match_kinds() {
        let sf = load_bundled("ovm_short_gap").unwrap();
        let mut cfg = sf.config.clone();
        cfg.t_end = 0.2;
        let traj = run_simulation(&cfg).unwrap();
        let csv = events_csv_string(&traj, sf.source_hash);
        // The deliberately off-equilibrium start must be on record.
        assert!(csv.contains("nonequilibrium_start"), "csv: {csv}");
    }
}

//! `platoon`: run scenarios, compare models, and chart stability regions
//! from the command line. Every command writes its artifacts as a run
//! bundle under the output root (`--out`, else `PLATOON_OUT`, else
//! `./platoon-out`).
//!
//! Exit codes: 0 success, 1 validation or runtime failure (one
//! `error: ...` line on stderr), 2 usage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use platoon_core::io::bundle::{write_map_bundle, write_run_bundle, RunSummary};
use platoon_core::metrics::spacing_error_series;
use platoon_core::scenario::{
    bundled_scenario_names, bundled_scenario_text, fnv1a_hash, load_scenario_str,
    override_scenario_text, ScenarioFile,
};
use platoon_core::sim::{run_simulation, ModelSpec, Trajectory};
use platoon_core::stability::{build_stability_map, CellState, MapCondition, MapRequest};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "platoon",
    version,
    about = "Vehicle-platoon simulation and string-stability analysis",
    arg_required_else_help = true
)]
struct Cli {
    /// Output root for all artifacts (overrides PLATOON_OUT).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifact bundle.
    Simulate {
        /// Bundled scenario name or path to a scenario file.
        scenario: String,
    },
    /// Run several scenarios side by side on worker threads.
    ///
    /// The single name "all" expands to one representative scenario per
    /// model family.
    Compare {
        /// Bundled names, file paths, or the word "all".
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Override the reaction delay (s) of the reactive models; the
        /// cooperative controller keeps its own communication delay.
        #[arg(long, value_name = "SECONDS")]
        delay: Option<f64>,
    },
    /// Evaluate an analytic stability condition over a parameter grid.
    StabilityMap {
        /// One of: idm, ovm, gmm, cacc, cacc3d.
        condition: String,
        /// Axis range overrides, each as name=min:max.
        #[arg(long, value_name = "NAME=MIN:MAX")]
        axes: Vec<String>,
        /// Samples per axis.
        #[arg(long, default_value_t = 200)]
        res: usize,
    },
    /// Re-run one scenario across several values of one parameter.
    Sweep {
        /// Bundled scenario name or path to a scenario file.
        scenario: String,
        /// Dotted key into the scenario file, e.g. model.idm.time_headway.
        #[arg(long, value_name = "NAME")]
        param: String,
        /// Values substituted for the parameter, one run each.
        #[arg(long, value_name = "VALUE", num_args = 1.., required = true)]
        values: Vec<String>,
    },
    /// List the bundled scenario library.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_root = cli
        .out
        .or_else(|| std::env::var_os("PLATOON_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("platoon-out"));
    let result = match cli.command {
        Command::Simulate { scenario } => cmd_simulate(&out_root, &scenario),
        Command::Compare { scenarios, delay } => cmd_compare(&out_root, &scenarios, delay),
        Command::StabilityMap { condition, axes, res } => {
            cmd_stability_map(&out_root, &condition, &axes, res)
        }
        Command::Sweep { scenario, param, values } => {
            cmd_sweep(&out_root, &scenario, &param, &values)
        }
        Command::ListScenarios => cmd_list_scenarios(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            // One line, whatever the source of the failure.
            eprintln!("error: {}", msg.replace('\n', "; "));
            ExitCode::from(1)
        }
    }
}

/// Bundled name first, then the filesystem. Returns the scenario text.
fn scenario_text(name_or_path: &str) -> Result<String, String> {
    if let Some(text) = bundled_scenario_text(name_or_path) {
        return Ok(text.to_string());
    }
    let path = PathBuf::from(name_or_path);
    if path.is_file() {
        return std::fs::read_to_string(&path).map_err(|e| format!("cannot read {name_or_path}: {e}"));
    }
    Err(format!(
        "no bundled scenario or file named \"{name_or_path}\" (bundled: {})",
        bundled_scenario_names().join(", ")
    ))
}

fn load_named(name_or_path: &str) -> Result<ScenarioFile, String> {
    let text = scenario_text(name_or_path)?;
    load_scenario_str(&text).map_err(|e| e.to_string())
}

fn run_scenario(sf: &ScenarioFile) -> Result<Trajectory<f64>, String> {
    run_simulation(&sf.config).map_err(|e| format!("{}: {e}", sf.name))
}

fn describe(summary: &RunSummary, sf: &ScenarioFile) -> String {
    let status = match &summary.verdict {
        Some(v) if v.stable => "stable".to_string(),
        Some(_) => "unstable".to_string(),
        None => "undefined".to_string(),
    };
    let mut line = format!(
        "{}  status={status}  events={}  hash={:016x}",
        sf.name, summary.n_events, sf.source_hash
    );
    if summary.aborted {
        line.push_str("  (aborted)");
    }
    line
}

fn cmd_simulate(out_root: &Path, scenario: &str) -> Result<(), String> {
    let sf = load_named(scenario)?;
    let traj = run_scenario(&sf)?;
    let dir = out_root.join(&sf.name);
    let summary = write_run_bundle(&dir, &sf, &traj, VERSION).map_err(|e| e.to_string())?;
    println!("{}", describe(&summary, &sf));
    println!("wrote {}", dir.display());
    Ok(())
}

/// One representative scenario per model family, used by `compare all`.
const COMPARE_ALL: &[&str] = &["idm_standard", "ovm_short_gap", "gmm_m1_l2", "cacc_v2v_150ms"];

fn cmd_compare(out_root: &Path, scenarios: &[String], delay: Option<f64>) -> Result<(), String> {
    let names: Vec<String> = if scenarios.len() == 1 && scenarios[0] == "all" {
        COMPARE_ALL.iter().map(|s| s.to_string()).collect()
    } else {
        scenarios.to_vec()
    };
    // Load and validate everything up front so a typo fails the whole
    // command before any artifact is written.
    let mut files = Vec::new();
    for name in &names {
        let text = scenario_text(name)?;
        let base = load_scenario_str(&text).map_err(|e| e.to_string())?;
        let file = match delay {
            // The delay override targets reactive laws only; the
            // cooperative controller models communication lag instead.
            Some(d) if !matches!(base.config.model, ModelSpec::Cacc(_)) => {
                let patched =
                    override_scenario_text(&text, &[("platoon.response_delay".into(), format!("{d}"))])
                        .map_err(|e| e.to_string())?;
                load_scenario_str(&patched).map_err(|e| e.to_string())?
            }
            _ => base,
        };
        files.push(file);
    }

    let results: Vec<Result<(RunSummary, f64), String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|sf| {
                let dir = out_root.join("compare").join(&sf.name);
                scope.spawn(move || {
                    let traj = run_scenario(sf)?;
                    let peak = peak_abs_spacing_error(&traj);
                    let summary =
                        write_run_bundle(&dir, sf, &traj, VERSION).map_err(|e| e.to_string())?;
                    Ok((summary, peak))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut failures = Vec::new();
    for (sf, res) in files.iter().zip(results) {
        match res {
            Ok((summary, peak)) => {
                println!("{}  peak|e|={peak:.4} m", describe(&summary, sf));
            }
            Err(e) => failures.push(e),
        }
    }
    if failures.is_empty() {
        println!("wrote {}", out_root.join("compare").display());
        Ok(())
    } else {
        Err(failures.join("; "))
    }
}

fn peak_abs_spacing_error(traj: &Trajectory<f64>) -> f64 {
    if traj.n_vehicles() < 2 || traj.n_samples() == 0 {
        return 0.0;
    }
    spacing_error_series(traj)
        .values
        .iter()
        .flat_map(|pair| pair.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
}

fn cmd_stability_map(
    out_root: &Path,
    condition: &str,
    axes: &[String],
    res: usize,
) -> Result<(), String> {
    let cond = MapCondition::from_name(condition).ok_or_else(|| {
        format!("unknown condition \"{condition}\" (one of: idm, ovm, gmm, cacc, cacc3d)")
    })?;
    let mut req: MapRequest<f64> = MapRequest::with_defaults(cond, res);
    for spec in axes {
        apply_axis_override(&mut req, spec)?;
    }
    let map = build_stability_map(&req)?;

    // Hash the canonical request line so artifacts can be matched to the
    // exact grid they came from.
    let request_line = describe_request(&req);
    let request_hash = fnv1a_hash(request_line.as_bytes());

    let dir = out_root.join("maps").join(cond.name());
    write_map_bundle(&dir, &map, request_hash, VERSION).map_err(|e| e.to_string())?;

    let mut stable = 0usize;
    let mut unstable = 0usize;
    let mut undefined = 0usize;
    for s in &map.mask {
        match s {
            CellState::Stable => stable += 1,
            CellState::Unstable => unstable += 1,
            CellState::Undefined => undefined += 1,
        }
    }
    println!("{request_line}");
    println!("cells: {stable} stable, {unstable} unstable, {undefined} undefined");
    println!("wrote {}", dir.display());
    Ok(())
}

fn describe_request(req: &MapRequest<f64>) -> String {
    let axes: Vec<String> = req
        .axes
        .iter()
        .map(|a| format!("{}={}:{}x{}", a.name, a.min, a.max, a.resolution))
        .collect();
    format!("{} {}", req.condition.name(), axes.join(" "))
}

fn apply_axis_override(req: &mut MapRequest<f64>, spec: &str) -> Result<(), String> {
    let (name, range) = spec
        .split_once('=')
        .ok_or_else(|| format!("axis override \"{spec}\" is not name=min:max"))?;
    let (lo, hi) = range
        .split_once(':')
        .ok_or_else(|| format!("axis override \"{spec}\" is not name=min:max"))?;
    let lo: f64 = lo.parse().map_err(|_| format!("bad axis minimum in \"{spec}\""))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad axis maximum in \"{spec}\""))?;
    let axis = req
        .axes
        .iter_mut()
        .find(|a| a.name == name)
        .ok_or_else(|| {
            let names: Vec<_> = req.condition.axis_names().to_vec();
            format!("no axis \"{name}\" for this condition (axes: {})", names.join(", "))
        })?;
    axis.min = lo;
    axis.max = hi;
    Ok(())
}

fn cmd_sweep(
    out_root: &Path,
    scenario: &str,
    param: &str,
    values: &[String],
) -> Result<(), String> {
    let text = scenario_text(scenario)?;
    // Validate every point before running any so the sweep is all-or-nothing.
    let mut runs = Vec::new();
    for value in values {
        let patched = override_scenario_text(&text, &[(param.to_string(), value.clone())])
            .map_err(|e| format!("{param}={value}: {e}"))?;
        let sf = load_scenario_str(&patched).map_err(|e| format!("{param}={value}: {e}"))?;
        runs.push((value.clone(), sf));
    }

    let results: Vec<Result<RunSummary, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(value, sf)| {
                let leaf = format!("{}__{}={}", sf.name, param, value).replace('/', "_");
                let dir = out_root.join("sweep").join(leaf);
                scope.spawn(move || {
                    let traj = run_scenario(sf)?;
                    write_run_bundle(&dir, sf, &traj, VERSION).map_err(|e| e.to_string())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut failures = Vec::new();
    for ((value, sf), res) in runs.iter().zip(results) {
        match res {
            Ok(summary) => println!("{param}={value}  {}", describe(&summary, sf)),
            Err(e) => failures.push(e),
        }
    }
    if failures.is_empty() {
        println!("wrote {}", out_root.join("sweep").display());
        Ok(())
    } else {
        Err(failures.join("; "))
    }
}

fn cmd_list_scenarios() -> Result<(), String> {
    for name in bundled_scenario_names() {
        let sf = platoon_core::scenario::load_bundled(name).map_err(|e| e.to_string())?;
        println!("{name:<18} {}", sf.description.as_deref().unwrap_or(""));
    }
    Ok(())
}

//! Scenario files: a TOML description of one platoon run.
//!
//! A scenario pins everything a run needs — model kind and parameters,
//! platoon layout, leader perturbation, integration grid, and metric
//! options — so that results are reproducible from the file alone. The
//! full schema with defaults is documented in the repository README;
//! unknown keys are rejected by name, and validation reports every
//! problem in one pass rather than stopping at the first.
//!
//! A library of ready-made scenarios is compiled into the crate; see
//! [`bundled_scenario_names`] and [`load_bundled`]. Parameters that a
//! scenario had to assume (rather than take from a published source)
//! are listed under `[provenance] assumed` inside the file.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::metrics::{DEFAULT_STEADY_FRACTION, DEFAULT_VERDICT_TOLERANCE, VerdictBasis};
use crate::models::{CaccParams, GmmParams, IdmParams, OvmParams};
use crate::perturb::{PerturbationSpec, Waveform};
use crate::sim::{CollisionPolicy, ModelSpec, PlatoonConfig, SpacingInit};

/// The schema revision this build understands.
pub const SCHEMA_VERSION: u32 = 1;

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub name: String,
    pub description: Option<String>,
    /// Ready-to-run configuration; already validated.
    pub config: PlatoonConfig<f64>,
    pub metrics: MetricOptions,
    /// Dotted paths of parameters the scenario assumes rather than cites.
    pub assumed: Vec<String>,
    /// FNV-1a hash of the exact file bytes; cross-referenced by every
    /// artifact written from this scenario.
    pub source_hash: u64,
}

/// Post-processing options carried by the scenario.
#[derive(Debug, Clone, Copy)]
pub struct MetricOptions {
    /// Trailing fraction of the run treated as steady state.
    pub steady_fraction: f64,
    /// Amplification slack before a pair counts as amplifying.
    pub verdict_tolerance: f64,
    /// Which series the verdict measures.
    pub basis: VerdictBasis,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            steady_fraction: DEFAULT_STEADY_FRACTION,
            verdict_tolerance: DEFAULT_VERDICT_TOLERANCE,
            basis: VerdictBasis::Velocity,
        }
    }
}

/// Why a scenario failed to load.
#[derive(Debug)]
pub enum ScenarioError {
    Io(std::io::Error),
    /// Syntax or unknown-field error; the message carries line/column.
    Parse(String),
    /// Every semantic problem found, one message per field.
    Invalid(Vec<String>),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Io(e) => write!(f, "cannot read scenario: {e}"),
            ScenarioError::Parse(msg) => write!(f, "scenario parse error: {msg}"),
            ScenarioError::Invalid(errs) => {
                write!(f, "invalid scenario ({} problem(s)):", errs.len())?;
                for e in errs {
                    write!(f, "\n  - {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ScenarioError {}

/// 64-bit FNV-1a of `bytes`; the hash that ties artifacts to their scenario.
pub fn fnv1a_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

// ---------------------------------------------------------------------------
// Raw file layout. Every table denies unknown fields so typos surface as
// parse errors naming the offending key.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    scenario: RawMeta,
    platoon: RawPlatoon,
    model: RawModel,
    #[serde(default)]
    perturbation: Option<RawPerturbation>,
    #[serde(default)]
    run: Option<RawRun>,
    #[serde(default)]
    metrics: Option<RawMetrics>,
    #[serde(default)]
    provenance: Option<RawProvenance>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeta {
    name: String,
    #[serde(default)]
    description: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlatoon {
    n_vehicles: usize,
    equilibrium_speed: f64,
    #[serde(default)]
    spacing: Option<RawSpacing>,
    #[serde(default)]
    vehicle_length: Option<f64>,
    #[serde(default)]
    response_delay: Option<f64>,
    #[serde(default)]
    collision_policy: Option<String>,
}

/// Either a literal gap in metres or the string "auto".
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSpacing {
    Gap(f64),
    Mode(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    #[serde(default)]
    idm: Option<RawIdm>,
    #[serde(default)]
    ovm: Option<RawOvm>,
    #[serde(default)]
    gmm: Option<RawGmm>,
    #[serde(default)]
    cacc: Option<RawCacc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIdm {
    #[serde(default = "d_one")]
    max_accel: f64,
    #[serde(default = "d_thirty")]
    desired_speed: f64,
    #[serde(default = "d_four")]
    accel_exponent: f64,
    #[serde(default = "d_1_5")]
    comfort_decel: f64,
    #[serde(default = "d_two")]
    min_gap: f64,
    #[serde(default)]
    jam_gap: f64,
    #[serde(default = "d_1_5")]
    time_headway: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOvm {
    #[serde(default = "d_one")]
    sensitivity: f64,
    #[serde(default = "d_22")]
    desired_speed: f64,
    #[serde(default = "d_four")]
    form_offset: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGmm {
    #[serde(default = "d_one")]
    sensitivity: f64,
    #[serde(default)]
    speed_exponent: f64,
    #[serde(default = "d_one")]
    spacing_exponent: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCacc {
    #[serde(default = "d_kp")]
    k_p: f64,
    #[serde(default = "d_kd")]
    k_d: f64,
    #[serde(default = "d_one")]
    k_v: f64,
    #[serde(default = "d_ka")]
    k_a: f64,
    /// Message age of the forwarded leader terms (s); 0 means live.
    #[serde(default)]
    comm_delay: f64,
    #[serde(default = "d_two")]
    standstill: f64,
    #[serde(default = "d_1_5")]
    time_headway: f64,
    #[serde(default = "d_true")]
    use_v2v: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerturbation {
    #[serde(default = "d_sinusoid")]
    waveform: String,
    #[serde(default = "d_two")]
    amplitude: f64,
    #[serde(default = "d_half")]
    angular_frequency: f64,
    #[serde(default)]
    window_start: f64,
    #[serde(default)]
    window_duration: f64,
    #[serde(default)]
    step_delta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default = "d_dt")]
    dt: f64,
    #[serde(default = "d_fifty")]
    t_end: f64,
    #[serde(default)]
    position_base: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetrics {
    #[serde(default = "d_half")]
    steady_fraction: f64,
    #[serde(default = "d_tol")]
    verdict_tolerance: f64,
    #[serde(default = "d_velocity")]
    basis: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProvenance {
    #[serde(default)]
    assumed: Vec<String>,
    #[serde(default)]
    note: Option<String>,
}

fn d_one() -> f64 {
    1.0
}
fn d_two() -> f64 {
    2.0
}
fn d_four() -> f64 {
    4.0
}
fn d_1_5() -> f64 {
    1.5
}
fn d_22() -> f64 {
    22.0
}
fn d_thirty() -> f64 {
    30.0
}
fn d_fifty() -> f64 {
    50.0
}
fn d_half() -> f64 {
    0.5
}
fn d_dt() -> f64 {
    0.01
}
fn d_kp() -> f64 {
    0.25
}
fn d_kd() -> f64 {
    0.7
}
fn d_ka() -> f64 {
    0.4
}
fn d_tol() -> f64 {
    DEFAULT_VERDICT_TOLERANCE
}
fn d_true() -> bool {
    true
}
fn d_sinusoid() -> String {
    "sinusoid".into()
}
fn d_velocity() -> String {
    "velocity".into()
}

// ---------------------------------------------------------------------------

/// Loads and validates a scenario from disk.
pub fn load_scenario(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(ScenarioError::Io)?;
    load_scenario_str(&text)
}

/// Loads and validates a scenario from its TOML text.
pub fn load_scenario_str(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let mut errs = Vec::new();

    if raw.schema_version != SCHEMA_VERSION {
        errs.push(format!(
            "schema_version {} is not supported (this build reads version {})",
            raw.schema_version, SCHEMA_VERSION
        ));
    }
    if raw.scenario.name.is_empty() {
        errs.push("scenario.name must not be empty".into());
    }

    let model = build_model(&raw.model, &mut errs);

    let mut config = PlatoonConfig::new(
        model.unwrap_or(ModelSpec::Ovm(OvmParams {
            sensitivity: 1.0,
            desired_speed: 22.0,
            form_offset: 4.0,
        })),
        raw.platoon.n_vehicles,
        raw.platoon.equilibrium_speed,
    );

    match raw.platoon.spacing {
        None => {}
        Some(RawSpacing::Gap(g)) => config.spacing = SpacingInit::Fixed(g),
        Some(RawSpacing::Mode(ref m)) if m == "auto" => config.spacing = SpacingInit::Auto,
        Some(RawSpacing::Mode(ref m)) => {
            errs.push(format!("platoon.spacing must be a gap in metres or \"auto\", got \"{m}\""));
        }
    }
    if let Some(len) = raw.platoon.vehicle_length {
        config.vehicle_length = len;
    }
    if let Some(tau) = raw.platoon.response_delay {
        config.response_delay = tau;
    }
    match raw.platoon.collision_policy.as_deref() {
        None | Some("abort") => {}
        Some("record") => config.collision_policy = CollisionPolicy::Record,
        Some(other) => {
            errs.push(format!(
                "platoon.collision_policy must be \"abort\" or \"record\", got \"{other}\""
            ));
        }
    }

    if let Some(p) = &raw.perturbation {
        match build_perturbation(p) {
            Ok(spec) => config.perturbation = spec,
            Err(e) => errs.push(e),
        }
    } else {
        // Unstated perturbations default to the comparison study's forcing.
        config.perturbation = PerturbationSpec::sinusoid(2.0, 0.5);
    }

    if let Some(r) = &raw.run {
        config.dt = r.dt;
        config.t_end = r.t_end;
        config.position_base = r.position_base;
    }

    let mut metrics = MetricOptions::default();
    if let Some(m) = &raw.metrics {
        metrics.steady_fraction = m.steady_fraction;
        metrics.verdict_tolerance = m.verdict_tolerance;
        match m.basis.as_str() {
            "velocity" => metrics.basis = VerdictBasis::Velocity,
            "spacing_error" => metrics.basis = VerdictBasis::SpacingError,
            other => {
                errs.push(format!(
                    "metrics.basis must be \"velocity\" or \"spacing_error\", got \"{other}\""
                ));
            }
        }
        if !(metrics.steady_fraction > 0.0 && metrics.steady_fraction <= 1.0) {
            errs.push(format!(
                "metrics.steady_fraction must be in (0, 1], got {}",
                metrics.steady_fraction
            ));
        }
        if !(metrics.verdict_tolerance >= 0.0) {
            errs.push(format!(
                "metrics.verdict_tolerance must be >= 0, got {}",
                metrics.verdict_tolerance
            ));
        }
    }

    errs.extend(config.validate());

    if !errs.is_empty() {
        return Err(ScenarioError::Invalid(errs));
    }
    let (assumed, _note) = match raw.provenance {
        Some(p) => (p.assumed, p.note),
        None => (Vec::new(), None),
    };
    Ok(ScenarioFile {
        name: raw.scenario.name,
        description: raw.scenario.description,
        config,
        metrics,
        assumed,
        source_hash: fnv1a_hash(text.as_bytes()),
    })
}

// Picks the parameter table matching `kind` and flags tables that do not
// belong, so a file cannot silently carry ignored parameters.
fn build_model(raw: &RawModel, errs: &mut Vec<String>) -> Option<ModelSpec<f64>> {
    let kind = raw.kind.as_str();
    let wants_idm = matches!(kind, "idm" | "idm_spacing_only");
    if raw.idm.is_some() && !wants_idm {
        errs.push(format!("[model.idm] does not apply to kind \"{kind}\""));
    }
    if raw.ovm.is_some() && kind != "ovm" {
        errs.push(format!("[model.ovm] does not apply to kind \"{kind}\""));
    }
    if raw.gmm.is_some() && kind != "gmm" {
        errs.push(format!("[model.gmm] does not apply to kind \"{kind}\""));
    }
    if raw.cacc.is_some() && kind != "cacc" {
        errs.push(format!("[model.cacc] does not apply to kind \"{kind}\""));
    }

    let idm_params = |t: &Option<RawIdm>| {
        let d = RawIdm {
            max_accel: d_one(),
            desired_speed: d_thirty(),
            accel_exponent: d_four(),
            comfort_decel: d_1_5(),
            min_gap: d_two(),
            jam_gap: 0.0,
            time_headway: d_1_5(),
        };
        let t = t.as_ref().unwrap_or(&d);
        IdmParams {
            max_accel: t.max_accel,
            desired_speed: t.desired_speed,
            accel_exponent: t.accel_exponent,
            comfort_decel: t.comfort_decel,
            min_gap: t.min_gap,
            jam_gap: t.jam_gap,
            time_headway: t.time_headway,
        }
    };

    match kind {
        "idm" => Some(ModelSpec::Idm(idm_params(&raw.idm))),
        "idm_spacing_only" => Some(ModelSpec::IdmSpacingOnly(idm_params(&raw.idm))),
        "ovm" => {
            let d = RawOvm { sensitivity: d_one(), desired_speed: d_22(), form_offset: d_four() };
            let t = raw.ovm.as_ref().unwrap_or(&d);
            Some(ModelSpec::Ovm(OvmParams {
                sensitivity: t.sensitivity,
                desired_speed: t.desired_speed,
                form_offset: t.form_offset,
            }))
        }
        "gmm" => {
            let d = RawGmm { sensitivity: d_one(), speed_exponent: 0.0, spacing_exponent: d_one() };
            let t = raw.gmm.as_ref().unwrap_or(&d);
            Some(ModelSpec::Gmm(GmmParams {
                sensitivity: t.sensitivity,
                speed_exponent: t.speed_exponent,
                spacing_exponent: t.spacing_exponent,
            }))
        }
        "cacc" => {
            let d = RawCacc {
                k_p: d_kp(),
                k_d: d_kd(),
                k_v: d_one(),
                k_a: d_ka(),
                comm_delay: 0.0,
                standstill: d_two(),
                time_headway: d_1_5(),
                use_v2v: true,
            };
            let t = raw.cacc.as_ref().unwrap_or(&d);
            Some(ModelSpec::Cacc(CaccParams {
                k_p: t.k_p,
                k_d: t.k_d,
                k_v: t.k_v,
                k_a: t.k_a,
                comm_delay: t.comm_delay,
                standstill: t.standstill,
                time_headway: t.time_headway,
                use_v2v: t.use_v2v,
                // A positive message age implies the delayed path.
                use_delay: t.comm_delay > 0.0,
            }))
        }
        other => {
            errs.push(format!(
                "model.kind must be one of idm, idm_spacing_only, ovm, gmm, cacc; got \"{other}\""
            ));
            None
        }
    }
}

fn build_perturbation(raw: &RawPerturbation) -> Result<PerturbationSpec<f64>, String> {
    let waveform = match raw.waveform.as_str() {
        "none" => Waveform::None,
        "sinusoid" => Waveform::Sinusoid,
        "windowed_sinusoid" => Waveform::WindowedSinusoid,
        "step" => Waveform::Step,
        "square" => Waveform::Square,
        "sawtooth" => Waveform::Sawtooth,
        other => {
            return Err(format!(
                "perturbation.waveform must be one of none, sinusoid, windowed_sinusoid, \
                 step, square, sawtooth; got \"{other}\""
            ));
        }
    };
    Ok(PerturbationSpec {
        waveform,
        amplitude: raw.amplitude,
        angular_frequency: raw.angular_frequency,
        window_start: raw.window_start,
        window_duration: raw.window_duration,
        step_delta: raw.step_delta,
    })
}

// ---------------------------------------------------------------------------
// Bundled library.

macro_rules! bundled {
    ($($name:literal),+ $(,)?) => {
        /// Name/text pairs of the compiled-in scenario library.
        pub const BUNDLED_SCENARIOS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../scenarios/", $name, ".toml")))),+
        ];
    };
}

bundled!(
    "idm_standard",
    "idm_spacing_only",
    "ovm_short_gap",
    "gmm_m0_l1",
    "gmm_m1_l1",
    "gmm_m1_l2",
    "cacc_no_v2v",
    "cacc_v2v",
    "cacc_v2v_150ms",
    "cacc_v2v_delayed",
    "idm_pulse",
    "ovm_pulse",
    "gmm_pulse",
    "cacc_pulse",
    "idm_square",
    "ovm_square",
    "gmm_square",
    "cacc_square",
);

/// Names of all compiled-in scenarios, in library order.
pub fn bundled_scenario_names() -> Vec<&'static str> {
    BUNDLED_SCENARIOS.iter().map(|(n, _)| *n).collect()
}

/// Raw TOML text of a bundled scenario, if the name exists.
pub fn bundled_scenario_text(name: &str) -> Option<&'static str> {
    BUNDLED_SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Loads a bundled scenario by name.
pub fn load_bundled(name: &str) -> Result<ScenarioFile, ScenarioError> {
    match bundled_scenario_text(name) {
        Some(text) => load_scenario_str(text),
        None => Err(ScenarioError::Invalid(vec![format!(
            "no bundled scenario named \"{name}\"; run list-scenarios for the library"
        )])),
    }
}

/// Applies dotted-path `key = value` overrides to scenario text and
/// returns the rewritten TOML.
///
/// Paths address existing or new keys (`model.idm.time_headway`,
/// `run.t_end`); intermediate tables are created as needed. Values are
/// parsed as TOML literals first (numbers, booleans), falling back to
/// plain strings, so `--param platoon.spacing --values auto` works.
pub fn override_scenario_text(
    text: &str,
    overrides: &[(String, String)],
) -> Result<String, ScenarioError> {
    let mut doc: toml::Value =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    for (path, value) in overrides {
        // A bare literal is not a TOML document, so parse it behind a dummy
        // key. Anything that will not parse that way (or smuggles extra keys
        // in) is kept as a plain string and left to schema validation.
        let parsed: toml::Value = match format!("v = {value}").parse::<toml::Table>() {
            Ok(mut t) if t.len() == 1 => t.remove("v").unwrap(),
            _ => toml::Value::String(value.clone()),
        };
        let mut node = &mut doc;
        let parts: Vec<&str> = path.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(ScenarioError::Invalid(vec![format!(
                "override path \"{path}\" has an empty segment"
            )]));
        }
        for part in &parts[..parts.len() - 1] {
            let table = node.as_table_mut().ok_or_else(|| {
                ScenarioError::Invalid(vec![format!(
                    "override path \"{path}\" crosses the non-table key \"{part}\""
                )])
            })?;
            node = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::map::Map::new()));
        }
        let last = parts[parts.len() - 1];
        let table = node.as_table_mut().ok_or_else(|| {
            ScenarioError::Invalid(vec![format!(
                "override path \"{path}\" ends inside a non-table value"
            )])
        })?;
        table.insert(last.to_string(), parsed);
    }
    toml::to_string(&doc).map_err(|e| ScenarioError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MINIMAL: &str = r#"
schema_version = 1

[scenario]
name = "minimal"

[platoon]
n_vehicles = 5
equilibrium_speed = 27.8

[model]
kind = "idm"
"#;

    #[test]
    fn minimal_file_uses_documented_defaults() {
        let sf = load_scenario_str(MINIMAL).unwrap();
        assert_eq!(sf.name, "minimal");
        assert_eq!(sf.config.n_vehicles, 5);
        assert_eq!(sf.config.dt, 0.01);
        assert_eq!(sf.config.t_end, 50.0);
        assert!(matches!(sf.config.spacing, SpacingInit::Auto));
        match &sf.config.model {
            ModelSpec::Idm(p) => {
                assert_eq!(p.time_headway, 1.5);
                assert_eq!(p.desired_speed, 30.0);
            }
            other => panic!("wrong model: {other:?}"),
        }
        assert_eq!(sf.config.perturbation.amplitude, 2.0);
        assert_eq!(sf.config.perturbation.angular_frequency, 0.5);
        assert_relative_eq!(sf.metrics.verdict_tolerance, 0.05);
    }

    #[test]
    fn unknown_field_is_rejected_by_name() {
        let text = MINIMAL.replace("[model]", "foo = 3\n\n[model]");
        let err = load_scenario_str(&text).unwrap_err();
        match err {
            ScenarioError::Parse(msg) => assert!(msg.contains("foo"), "message: {msg}"),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn zero_dt_is_a_named_validation_error() {
        let text = format!("{MINIMAL}\n[run]\ndt = 0.0\n");
        let err = load_scenario_str(&text).unwrap_err();
        match err {
            ScenarioError::Invalid(errs) => {
                assert!(errs.iter().any(|e| e.contains("dt")), "errors: {errs:?}");
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn all_problems_reported_in_one_pass() {
        let text = r#"
schema_version = 1

[scenario]
name = "broken"

[platoon]
n_vehicles = 0
equilibrium_speed = -1.0

[model]
kind = "idm"

[run]
dt = 0.0
t_end = -5.0
"#;
        let err = load_scenario_str(text).unwrap_err();
        match err {
            ScenarioError::Invalid(errs) => {
                assert!(errs.len() >= 3, "expected several problems, got {errs:?}");
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn mismatched_parameter_table_is_flagged() {
        let text = MINIMAL.to_string() + "\n[model.ovm]\nsensitivity = 1.0\n";
        let err = load_scenario_str(&text).unwrap_err();
        match err {
            ScenarioError::Invalid(errs) => {
                assert!(errs.iter().any(|e| e.contains("model.ovm")), "errors: {errs:?}");
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn spacing_accepts_number_or_auto() {
        let fixed = MINIMAL.replace("equilibrium_speed = 27.8", "equilibrium_speed = 27.8\nspacing = 30.0");
        let sf = load_scenario_str(&fixed).unwrap();
        assert!(matches!(sf.config.spacing, SpacingInit::Fixed(g) if g == 30.0));

        let auto = MINIMAL.replace("equilibrium_speed = 27.8", "equilibrium_speed = 27.8\nspacing = \"auto\"");
        assert!(matches!(load_scenario_str(&auto).unwrap().config.spacing, SpacingInit::Auto));

        let bad = MINIMAL.replace("equilibrium_speed = 27.8", "equilibrium_speed = 27.8\nspacing = \"tight\"");
        assert!(load_scenario_str(&bad).is_err());
    }

    #[test]
    fn positive_comm_delay_enables_the_delayed_path() {
        let text = r#"
schema_version = 1

[scenario]
name = "delayed"

[platoon]
n_vehicles = 6
equilibrium_speed = 23.0

[model]
kind = "cacc"

[model.cacc]
comm_delay = 0.15
"#;
        let sf = load_scenario_str(text).unwrap();
        match &sf.config.model {
            ModelSpec::Cacc(p) => {
                assert_eq!(p.comm_delay, 0.15);
                assert!(p.use_delay);
                assert!(p.use_v2v);
            }
            other => panic!("wrong model: {other:?}"),
        }
    }

    #[test]
    fn every_bundled_scenario_loads() {
        for (name, text) in BUNDLED_SCENARIOS {
            let sf = load_scenario_str(text)
                .unwrap_or_else(|e| panic!("bundled scenario {name} failed to load: {e}"));
            assert_eq!(&sf.name, name, "file name and scenario.name disagree");
        }
        assert_eq!(bundled_scenario_names().len(), BUNDLED_SCENARIOS.len());
    }

    #[test]
    fn bundled_idm_run_matches_published_setup() {
        let sf = load_bundled("idm_standard").unwrap();
        assert_eq!(sf.config.n_vehicles, 5);
        assert_relative_eq!(sf.config.equilibrium_speed, 27.8);
        match &sf.config.model {
            ModelSpec::Idm(p) => assert_relative_eq!(p.time_headway, 1.5),
            other => panic!("wrong model: {other:?}"),
        }
    }

    #[test]
    fn unknown_bundled_name_is_an_error() {
        assert!(load_bundled("no_such_run").is_err());
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = fnv1a_hash(b"abc");
        assert_eq!(a, fnv1a_hash(b"abc"));
        assert_ne!(a, fnv1a_hash(b"abd"));
        // Reference value of the empty-input FNV-1a offset basis.
        assert_eq!(fnv1a_hash(b""), 0xcbf29ce484222325);
    }

    #[test]
    fn override_rewrites_nested_keys() {
        let out = override_scenario_text(
            MINIMAL,
            &[
                ("run.t_end".into(), "80.0".into()),
                ("model.idm.time_headway".into(), "2.5".into()),
            ],
        )
        .unwrap();
        let sf = load_scenario_str(&out).unwrap();
        assert_eq!(sf.config.t_end, 80.0);
        match &sf.config.model {
            ModelSpec::Idm(p) => assert_eq!(p.time_headway, 2.5),
            other => panic!("wrong model: {other:?}"),
        }
    }

    #[test]
    fn override_parses_strings_and_booleans() {
        let out = override_scenario_text(
            MINIMAL,
            &[("platoon.spacing".into(), "auto".into())],
        )
        .unwrap();
        let sf = load_scenario_str(&out).unwrap();
        assert!(matches!(sf.config.spacing, SpacingInit::Auto));

        let cacc = r#"
schema_version = 1

[scenario]
name = "c"

[platoon]
n_vehicles = 6
equilibrium_speed = 23.0

[model]
kind = "cacc"
"#;
        let out = override_scenario_text(cacc, &[("model.cacc.use_v2v".into(), "false".into())])
            .unwrap();
        let sf = load_scenario_str(&out).unwrap();
        assert!(matches!(&sf.config.model, ModelSpec::Cacc(p) if !p.use_v2v));
    }

    #[test]
    fn override_through_scalar_fails_cleanly() {
        let err = override_scenario_text(
            MINIMAL,
            &[("platoon.n_vehicles.sub".into(), "1".into())],
        )
        .unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid(_)));
    }
}

//! CSV serialization of trajectories and stability maps.
//!
//! Numbers are written with the shortest decimal form that parses back to
//! the identical bit pattern, so `parse(write(x)) = x` holds exactly.
//! Leading `# key=value` comment lines carry cross-references (the
//! scenario hash) without disturbing column-oriented consumers.

use std::fmt::Write as _;
use std::path::Path;

use crate::sim::Trajectory;
use crate::stability::{CellState, MapAxis, StabilityMap};

/// A malformed CSV input.
#[derive(Debug)]
pub struct CsvError {
    /// 1-based line of the problem, when known.
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(n) => write!(f, "csv line {}: {}", n, self.message),
            None => write!(f, "csv: {}", self.message),
        }
    }
}

impl std::error::Error for CsvError {}

fn err(line: Option<usize>, message: impl Into<String>) -> CsvError {
    CsvError { line, message: message.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, CsvError> {
    tok.parse::<f64>().map_err(|_| err(Some(line), format!("cannot parse number \"{tok}\"")))
}

/// The exact column header for an `n`-vehicle trajectory.
pub fn trajectory_header(n_vehicles: usize) -> String {
    let mut h = String::from("t");
    for i in 0..n_vehicles {
        let _ = write!(h, ",veh{i}_x,veh{i}_v,veh{i}_a");
    }
    for i in 0..n_vehicles.saturating_sub(1) {
        let _ = write!(h, ",gap_{}_{}", i, i + 1);
    }
    h
}

/// Renders a trajectory as CSV text; `scenario_hash` becomes a leading
/// `# scenario=` comment when present.
pub fn trajectory_csv_string(traj: &Trajectory<f64>, scenario_hash: Option<u64>) -> String {
    let n = traj.n_vehicles();
    let mut out = String::new();
    if let Some(h) = scenario_hash {
        let _ = writeln!(out, "# scenario={h:016x}");
    }
    out.push_str(&trajectory_header(n));
    out.push('\n');
    for k in 0..traj.n_samples() {
        let _ = write!(out, "{}", traj.times[k]);
        for i in 0..n {
            let _ = write!(
                out,
                ",{},{},{}",
                traj.positions[i][k], traj.velocities[i][k], traj.accelerations[i][k]
            );
        }
        for pair in 0..n.saturating_sub(1) {
            let _ = write!(out, ",{}", traj.gaps[pair][k]);
        }
        out.push('\n');
    }
    out
}

/// Writes [`trajectory_csv_string`] to `path`.
pub fn write_trajectory_csv(
    traj: &Trajectory<f64>,
    scenario_hash: Option<u64>,
    path: &Path,
) -> std::io::Result<()> {
    std::fs::write(path, trajectory_csv_string(traj, scenario_hash))
}

/// Parses trajectory CSV text back into series plus the scenario hash, if
/// the file carried one. Events and the abort flag are not part of the
/// column format; the returned trajectory has none.
pub fn parse_trajectory_csv(text: &str) -> Result<(Trajectory<f64>, Option<u64>), CsvError> {
    let mut lines = text.lines().enumerate().peekable();
    let mut hash = None;
    while let Some((_, line)) = lines.peek() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("scenario=") {
                hash = Some(
                    u64::from_str_radix(v.trim(), 16)
                        .map_err(|_| err(None, format!("bad scenario hash \"{v}\"")))?,
                );
            }
            lines.next();
        } else {
            break;
        }
    }

    let (header_idx, header) =
        lines.next().ok_or_else(|| err(None, "missing header row"))?;
    // Column count 1 + 3n + (n-1) = 4n determines the vehicle count.
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || !cols.len().is_multiple_of(4) {
        return Err(err(Some(header_idx + 1), format!("unrecognized header \"{header}\"")));
    }
    let n = cols.len() / 4; // 4n = 1 + 3n + (n-1); integer division is exact
    if header != trajectory_header(n) {
        return Err(err(Some(header_idx + 1), format!("unrecognized header \"{header}\"")));
    }

    let mut times = Vec::new();
    let mut positions = vec![Vec::new(); n];
    let mut velocities = vec![Vec::new(); n];
    let mut accelerations = vec![Vec::new(); n];
    let mut gaps = vec![Vec::new(); n.saturating_sub(1)];
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != cols.len() {
            return Err(err(
                Some(idx + 1),
                format!("expected {} fields, found {}", cols.len(), row.len()),
            ));
        }
        let ln = idx + 1;
        times.push(parse_f64(row[0], ln)?);
        for i in 0..n {
            positions[i].push(parse_f64(row[1 + 3 * i], ln)?);
            velocities[i].push(parse_f64(row[2 + 3 * i], ln)?);
            accelerations[i].push(parse_f64(row[3 + 3 * i], ln)?);
        }
        for pair in 0..n - 1 {
            gaps[pair].push(parse_f64(row[1 + 3 * n + pair], ln)?);
        }
    }
    Ok((
        Trajectory {
            times,
            positions,
            velocities,
            accelerations,
            gaps,
            events: Vec::new(),
            aborted: false,
        },
        hash,
    ))
}

fn state_name(s: CellState) -> &'static str {
    match s {
        CellState::Stable => "stable",
        CellState::Unstable => "unstable",
        CellState::Undefined => "undefined",
    }
}

fn state_from_name(s: &str, line: usize) -> Result<CellState, CsvError> {
    match s {
        "stable" => Ok(CellState::Stable),
        "unstable" => Ok(CellState::Unstable),
        "undefined" => Ok(CellState::Undefined),
        other => Err(err(Some(line), format!("unknown cell state \"{other}\""))),
    }
}

/// Renders a stability map as CSV: axis metadata in comments, then one row
/// per cell with grid indices, axis values, the margin, and the state.
pub fn map_csv_string(map: &StabilityMap<f64>, request_hash: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(h) = request_hash {
        let _ = writeln!(out, "# request={h:016x}");
    }
    let _ = writeln!(out, "# condition={}", map.condition);
    for ax in &map.axes {
        debug_assert!(!ax.name.contains(','), "axis names are comma-free identifiers");
        let _ = writeln!(out, "# axis={},{},{},{}", ax.name, ax.min, ax.max, ax.resolution);
    }
    for ax in &map.axes {
        let _ = write!(out, "i_{},", ax.name);
    }
    for ax in &map.axes {
        let _ = write!(out, "{},", ax.name);
    }
    out.push_str("margin,state\n");

    let dims: Vec<usize> = map.axes.iter().map(|a| a.resolution).collect();
    let mut coords = vec![0usize; dims.len()];
    for cell in 0..map.values.len() {
        for &c in &coords {
            let _ = write!(out, "{c},");
        }
        for (ax, &c) in map.axes.iter().zip(&coords) {
            let _ = write!(out, "{},", ax.value(c));
        }
        let _ = writeln!(out, "{},{}", map.values[cell], state_name(map.mask[cell]));
        // Row-major increment: last axis varies fastest.
        for d in (0..dims.len()).rev() {
            coords[d] += 1;
            if coords[d] < dims[d] {
                break;
            }
            coords[d] = 0;
        }
    }
    out
}

/// Writes [`map_csv_string`] to `path`.
pub fn write_map_csv(
    map: &StabilityMap<f64>,
    request_hash: Option<u64>,
    path: &Path,
) -> std::io::Result<()> {
    std::fs::write(path, map_csv_string(map, request_hash))
}

/// Parses map CSV text back into a [`StabilityMap`] plus the request hash.
pub fn parse_map_csv(text: &str) -> Result<(StabilityMap<f64>, Option<u64>), CsvError> {
    let mut hash = None;
    let mut condition = None;
    let mut axes: Vec<MapAxis<f64>> = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((idx, line)) = lines.peek().copied() {
        let Some(rest) = line.strip_prefix('#') else { break };
        let rest = rest.trim();
        let ln = idx + 1;
        if let Some(v) = rest.strip_prefix("request=") {
            hash = Some(
                u64::from_str_radix(v.trim(), 16)
                    .map_err(|_| err(Some(ln), format!("bad request hash \"{v}\"")))?,
            );
        } else if let Some(v) = rest.strip_prefix("condition=") {
            condition = Some(v.trim().to_string());
        } else if let Some(v) = rest.strip_prefix("axis=") {
            let parts: Vec<&str> = v.split(',').collect();
            if parts.len() != 4 {
                return Err(err(Some(ln), format!("bad axis metadata \"{v}\"")));
            }
            axes.push(MapAxis {
                name: parts[0].to_string(),
                min: parse_f64(parts[1], ln)?,
                max: parse_f64(parts[2], ln)?,
                resolution: parts[3]
                    .parse()
                    .map_err(|_| err(Some(ln), format!("bad axis resolution \"{}\"", parts[3])))?,
            });
        }
        lines.next();
    }
    let condition = condition.ok_or_else(|| err(None, "missing # condition= comment"))?;
    if axes.is_empty() {
        return Err(err(None, "missing # axis= comments"));
    }
    lines.next(); // header row; cell geometry comes from the metadata

    let total: usize = axes.iter().map(|a| a.resolution).product();
    let mut values = Vec::with_capacity(total);
    let mut mask = Vec::with_capacity(total);
    let margin_col = 2 * axes.len();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let ln = idx + 1;
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != margin_col + 2 {
            return Err(err(
                Some(ln),
                format!("expected {} fields, found {}", margin_col + 2, row.len()),
            ));
        }
        values.push(parse_f64(row[margin_col], ln)?);
        mask.push(state_from_name(row[margin_col + 1], ln)?);
    }
    if values.len() != total {
        return Err(err(
            None,
            format!("expected {} cells from the axis metadata, found {}", total, values.len()),
        ));
    }
    Ok((StabilityMap { condition, axes, values, mask }, hash))
}

//! The `analyze` subcommand: rebuild a solution stack from stored EULF1
//! snapshots and emit the convergence table on standard output.
//!
//! The input directory is expected to hold `level_<n>` subdirectories (as
//! written by `run`), each containing full-state `.eulf` snapshots. The
//! stack is assembled from all levels up to the reference at one common
//! snapshot time, so stored runs can be re-analyzed with a different
//! exponent, component scaling, or variable without re-simulating.

use crate::{runtime, usage, CliError};
use kfv_core::gas::GasModel;
use kfv_core::kconv::{error_metrics, SolutionStack, Variable};
use kfv_core::transport::{attach_e4, e4_column, E4Options};
use kfv_core::{io, Error, Real};
use std::path::{Path, PathBuf};

pub fn analyze_cmd(
    dir: &Path,
    reference: Option<usize>,
    q: f64,
    variable: &str,
    time: Option<f64>,
    scaling: Option<&str>,
    marginal: bool,
) -> Result<(), CliError> {
    let variable = Variable::parse(variable).map_err(usage)?;
    let opts = parse_e4_options(scaling, marginal)?;

    let levels = scan_levels(dir)?;
    let levels = select_levels(levels, reference)?;
    let index = index_snapshots(&levels)?;
    let t = pick_time(&levels, &index, time)?;
    let stack = load_stack(&levels, &index, t)?;

    let gamma = stack.gas().gamma();
    let q_sup = 2.0 * gamma / (gamma + 1.0);
    if !(1.0..q_sup).contains(&q) {
        eprintln!(
            "warning: q = {q} lies outside [1, {q_sup:.4}), the range where \
             measure convergence is guaranteed; proceeding"
        );
    }

    let mut table = error_metrics(&stack, stack.len() - 1, variable).map_err(runtime)?;
    let e4 = e4_column(&stack, q, &opts).map_err(|e| match e {
        Error::Param(_) => usage(e),
        other => runtime(other),
    })?;
    attach_e4(&mut table, &e4).map_err(runtime)?;

    let mut out = io::format_metrics_table(&table, &[]);
    if let Some(note) = analysis_note(q, &opts) {
        out = insert_after_first_line(&out, &note);
    }
    print!("{out}");
    Ok(())
}

/// Comment line recording non-default transport settings; `None` when the
/// output should be byte-identical to the table written during `run`.
fn analysis_note(q: f64, opts: &E4Options<Real>) -> Option<String> {
    let default = E4Options::<Real>::default();
    if q == 1.0 && opts.scaling == default.scaling && opts.marginal == default.marginal {
        return None;
    }
    let scaling = opts
        .scaling
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",");
    Some(format!(
        "# e4 q={q} scaling={scaling} marginal={}",
        opts.marginal
    ))
}

fn insert_after_first_line(text: &str, line: &str) -> String {
    match text.split_once('\n') {
        Some((first, rest)) => format!("{first}\n{line}\n{rest}"),
        None => format!("{text}\n{line}\n"),
    }
}

fn parse_e4_options(scaling: Option<&str>, marginal: bool) -> Result<E4Options<Real>, CliError> {
    let mut opts = E4Options::default();
    opts.marginal = marginal;
    if let Some(text) = scaling {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 5 {
            return Err(CliError::Usage(format!(
                "scaling needs 5 comma-separated factors (rho,m1,m2,S,E), got {}",
                parts.len()
            )));
        }
        for (slot, part) in opts.scaling.iter_mut().zip(&parts) {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("bad scaling factor `{part}`: {e}")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(CliError::Usage(format!(
                    "scaling factors must be finite and non-negative, got {v}"
                )));
            }
            *slot = v;
        }
    }
    Ok(opts)
}

/// `level_<n>` subdirectories, sorted by n.
fn scan_levels(dir: &Path) -> Result<Vec<(usize, PathBuf)>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", dir.display())))?;
    let mut levels = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| runtime(format!("while listing {}: {e}", dir.display())))?;
        if !entry.path().is_dir() {
            continue;
        }
        let name = entry.file_name();
        let Some(rest) = name.to_string_lossy().strip_prefix("level_").map(String::from) else {
            continue;
        };
        let Ok(n) = rest.parse::<usize>() else {
            continue;
        };
        levels.push((n, entry.path()));
    }
    if levels.is_empty() {
        return Err(CliError::Usage(format!(
            "no level_<n> directories under {}",
            dir.display()
        )));
    }
    levels.sort_by_key(|(n, _)| *n);
    Ok(levels)
}

/// Keeps the levels up to the reference (default: all of them).
fn select_levels(
    levels: Vec<(usize, PathBuf)>,
    reference: Option<usize>,
) -> Result<Vec<(usize, PathBuf)>, CliError> {
    let Some(reference) = reference else {
        return Ok(levels);
    };
    if !levels.iter().any(|(n, _)| *n == reference) {
        let available: Vec<String> = levels.iter().map(|(n, _)| n.to_string()).collect();
        return Err(CliError::Usage(format!(
            "reference level {reference} not found; available: {}",
            available.join(", ")
        )));
    }
    Ok(levels.into_iter().filter(|(n, _)| *n <= reference).collect())
}

/// Per level (same order as `levels`): full-state snapshots as sorted
/// (time, path) pairs.
fn index_snapshots(levels: &[(usize, PathBuf)]) -> Result<Vec<Vec<(f64, PathBuf)>>, CliError> {
    let mut index = Vec::with_capacity(levels.len());
    for (n, dir) in levels {
        let mut snaps = Vec::new();
        let entries = std::fs::read_dir(dir)
            .map_err(|e| runtime(format!("cannot read {}: {e}", dir.display())))?;
        for entry in entries {
            let entry =
                entry.map_err(|e| runtime(format!("while listing {}: {e}", dir.display())))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("eulf") {
                continue;
            }
            let header = io::read_snapshot_header(&path).map_err(runtime)?;
            if header.planes != 4 {
                continue; // scalar planes (averages, variances) are not states
            }
            if header.n != *n {
                return Err(runtime(format!(
                    "{} holds an n = {} snapshot but sits in a level_{n:04} directory",
                    path.display(),
                    header.n
                )));
            }
            if !header.time.is_finite() {
                return Err(runtime(format!(
                    "{} has a non-finite snapshot time",
                    path.display()
                )));
            }
            snaps.push((header.time, path));
        }
        if snaps.is_empty() {
            return Err(runtime(format!(
                "no full-state .eulf snapshots in {}",
                dir.display()
            )));
        }
        snaps.sort_by(|a, b| (a.0, a.1.clone()).partial_cmp(&(b.0, b.1.clone())).unwrap());
        index.push(snaps);
    }
    Ok(index)
}

/// The snapshot time to analyze: the requested one (exact match in every
/// level) or the latest time common to all levels.
fn pick_time(
    levels: &[(usize, PathBuf)],
    index: &[Vec<(f64, PathBuf)>],
    requested: Option<f64>,
) -> Result<f64, CliError> {
    if let Some(t) = requested {
        for ((n, dir), snaps) in levels.iter().zip(index) {
            if !snaps.iter().any(|(time, _)| *time == t) {
                let times: Vec<String> = snaps.iter().map(|(time, _)| time.to_string()).collect();
                return Err(CliError::Usage(format!(
                    "no snapshot at time {t} under {} (level {n} has: {})",
                    dir.display(),
                    times.join(", ")
                )));
            }
        }
        return Ok(t);
    }
    let mut common: Vec<u64> = index[0].iter().map(|(t, _)| t.to_bits()).collect();
    for snaps in &index[1..] {
        common.retain(|bits| snaps.iter().any(|(t, _)| t.to_bits() == *bits));
    }
    let latest = common
        .iter()
        .map(|bits| f64::from_bits(*bits))
        .fold(f64::NEG_INFINITY, f64::max);
    if !latest.is_finite() {
        let report: Vec<String> = levels
            .iter()
            .zip(index)
            .map(|((n, _), snaps)| {
                format!("level {n} latest t = {}", snaps.last().expect("nonempty").0)
            })
            .collect();
        return Err(runtime(format!(
            "no snapshot time common to all levels ({})",
            report.join("; ")
        )));
    }
    Ok(latest)
}

/// Reads the chosen snapshot of every level and assembles the stack,
/// checking γ consistency across files.
fn load_stack(
    levels: &[(usize, PathBuf)],
    index: &[Vec<(f64, PathBuf)>],
    t: f64,
) -> Result<SolutionStack<Real>, CliError> {
    let mut loaded = Vec::with_capacity(levels.len());
    for snaps in index {
        let (_, path) = snaps
            .iter()
            .find(|(time, _)| *time == t)
            .expect("pick_time guarantees a match");
        let snap = io::read_snapshot(path).map_err(runtime)?;
        loaded.push((path.clone(), snap));
    }
    let (first_path, first) = &loaded[0];
    let gamma = first.gamma;
    for (path, snap) in &loaded[1..] {
        if snap.gamma != gamma {
            return Err(runtime(format!(
                "snapshot gamma mismatch: {} has {} but {} has {}",
                first_path.display(),
                gamma,
                path.display(),
                snap.gamma
            )));
        }
    }
    let gas = GasModel::new(gamma, 0.0).map_err(runtime)?;
    let mut stack = SolutionStack::new(gas, t);
    for (path, snap) in loaded {
        stack
            .push(snap.field)
            .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(stack)
}

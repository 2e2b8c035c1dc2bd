//! Deterministic CSV emission. Floating-point fields are written with nine
//! significant digits; records are quantized to the same precision when they
//! are built, so parse(emit(records)) reproduces the records exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context};

use rdars_core::baselines::SchemeId;

pub const CSV_HEADER: &str =
    "scheme,sweep_value,trial,seed,anmse,objective_exact,objective_approx,iterations,converged,wall_time_ms";

/// One (scheme, sweep value, trial) outcome.
///
/// `wall_time_ms` is fixed to zero in emitted records so that the CSV bytes
/// are a pure function of the configuration; measured timings go to stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub scheme: SchemeId,
    pub sweep_value: f64,
    pub trial: u64,
    pub seed: u64,
    pub anmse: f64,
    pub objective_exact: f64,
    pub objective_approx: f64,
    pub iterations: u64,
    pub converged: bool,
    pub wall_time_ms: u64,
}

/// Rounds to nine significant digits through the decimal representation used
/// in the CSV.
pub fn quantize_sig9(x: f64) -> f64 {
    format_sig9(x).parse().unwrap_or(x)
}

fn format_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn record_line(r: &ResultRecord) -> String {
    let mut line = String::new();
    let _ = write!(
        line,
        "{},{},{},{},{},{},{},{},{},{}",
        r.scheme.name(),
        format_sig9(r.sweep_value),
        r.trial,
        r.seed,
        format_sig9(r.anmse),
        format_sig9(r.objective_exact),
        format_sig9(r.objective_approx),
        r.iterations,
        r.converged,
        r.wall_time_ms
    );
    line
}

pub fn records_to_string(records: &[ResultRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&record_line(r));
        out.push('\n');
    }
    out
}

/// Writes header plus one line per record, newline-terminated.
pub fn emit_csv(records: &[ResultRecord], path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, records_to_string(records))
        .with_context(|| format!("cannot write CSV to {}", path.display()))
}

fn parse_line(line: &str, lineno: usize) -> anyhow::Result<ResultRecord> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 10 {
        return Err(anyhow!(
            "line {lineno}: expected 10 fields, found {}",
            fields.len()
        ));
    }
    let f = |i: usize| -> anyhow::Result<f64> {
        fields[i]
            .parse()
            .map_err(|e| anyhow!("line {lineno}, field {i}: {e}"))
    };
    let u = |i: usize| -> anyhow::Result<u64> {
        fields[i]
            .parse()
            .map_err(|e| anyhow!("line {lineno}, field {i}: {e}"))
    };
    Ok(ResultRecord {
        scheme: SchemeId::from_str(fields[0]).map_err(|e| anyhow!("line {lineno}: {e}"))?,
        sweep_value: f(1)?,
        trial: u(2)?,
        seed: u(3)?,
        anmse: f(4)?,
        objective_exact: f(5)?,
        objective_approx: f(6)?,
        iterations: u(7)?,
        converged: fields[8]
            .parse()
            .map_err(|e| anyhow!("line {lineno}, converged: {e}"))?,
        wall_time_ms: u(9)?,
    })
}

/// Reads back a CSV produced by [`emit_csv`].
pub fn parse_csv(path: &Path) -> anyhow::Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read CSV from {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(anyhow!("bad CSV header: {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| parse_line(line, i + 2))
        .collect()
}

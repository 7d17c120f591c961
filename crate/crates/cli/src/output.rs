//! CSV/JSON emission and atomic file replacement.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use simplexgeo::Trajectory64;

use crate::config::{Format, RunConfig};

/// Column-major numeric output of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    /// `t, p_0, …, p_{N-1}, objective, residual_l1`.
    pub fn from_trajectory(traj: &Trajectory64) -> Self {
        let dim = traj.points.first().map_or(0, |p| p.dim());
        let mut columns = vec!["t".to_string()];
        columns.extend((0..dim).map(|n| format!("p_{n}")));
        columns.push("objective".into());
        columns.push("residual_l1".into());
        let mut table = Self::new(columns);
        for i in 0..traj.len() {
            let mut row = vec![traj.times[i]];
            row.extend_from_slice(traj.points[i].coords());
            row.push(traj.objective[i]);
            row.push(traj.diagnostics[i].residual_l1);
            table.rows.push(row);
        }
        table
    }

    /// Shortest round-trip decimal for every value.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, x) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{x}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct Document<'a> {
    command: &'a str,
    config: &'a RunConfig,
    report: &'a Value,
    columns: &'a [String],
    rows: &'a [Vec<f64>],
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
}

/// Output of a finished run, rendered in the requested format.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub report: Value,
    pub table: Table,
}

impl Artifact {
    pub fn render(&self, command: &str, cfg: &RunConfig) -> String {
        match cfg.format() {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let generated_at = cfg.timestamp().then(|| {
                    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
                });
                let doc = Document {
                    command,
                    config: cfg,
                    report: &self.report,
                    columns: &self.table.columns,
                    rows: &self.table.rows,
                    generated_at,
                };
                let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Writes `contents` to a temporary file next to `path`, then renames it over
/// `path`, so readers see either the old file or the complete new one.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

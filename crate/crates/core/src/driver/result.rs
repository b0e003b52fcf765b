//! Serializable run output and the per-iteration CSV log.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIter,
    /// Every vertex farther than ε is barred after non-cutting solves.
    Stalled,
}

impl Status {
    /// Process exit code used by the command line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::MaxIter => 2,
            Status::Stalled => 3,
        }
    }
}

/// One weak minimizer with its image and the weight it was found for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub x: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    /// Weighted-sum weight (initialization) or recovered dual weight.
    pub w: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceRecord {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A solved direction scalarization and the hyperplane it produced:
/// `wᵀy >= wᵀv + z` with `wᵀc = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub iter: usize,
    pub v: Vec<f64>,
    pub c: Vec<f64>,
    pub w: Vec<f64>,
    pub z: f64,
    /// Whether the halfspace was intersected into the outer approximation.
    pub applied: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub scalarizations: usize,
    pub qp_solved: usize,
    pub qp_skipped: usize,
    /// Solves with `z* <= tol_cut`; no halfspace stored.
    pub non_cutting: usize,
    /// Halfspaces that cut nothing.
    pub redundant_cuts: usize,
    /// Directions `p - s` nudged into the interior of the cone.
    pub perturbed_directions: usize,
    /// Images not stored in the inner approximation (duplicate or dominated).
    pub inner_drops: usize,
    /// Largest distance change of a skipped cache entry when re-solved, if
    /// auditing was on.
    pub max_skip_error: Option<f64>,
}

impl Counters {
    /// Fraction of projections spared by the cache.
    pub fn skip_rate(&self) -> f64 {
        let total = self.qp_solved + self.qp_skipped;
        if total == 0 {
            0.0
        } else {
            self.qp_skipped as f64 / total as f64
        }
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub n_outer_vertices: usize,
    pub n_inner_vertices: usize,
    #[serde(rename = "d_H")]
    pub d_h: Option<f64>,
    pub z_star: Option<f64>,
    pub qp_solved: usize,
    pub qp_skipped: usize,
    pub scalarizations_total: usize,
    pub wallclock_ms: f64,
}

pub const LOG_COLUMNS: [&str; 9] = [
    "iter",
    "n_outer_vertices",
    "n_inner_vertices",
    "d_H",
    "z_star",
    "qp_solved",
    "qp_skipped",
    "scalarizations_total",
    "wallclock_ms",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: Status,
    pub mode: String,
    pub epsilon: f64,
    pub iterations: usize,
    #[serde(rename = "d_H")]
    pub d_h: f64,
    #[serde(rename = "X")]
    pub solutions: Vec<SolutionRecord>,
    pub outer_vertices: Vec<Vec<f64>>,
    pub inner_vertices: Vec<Vec<f64>>,
    pub outer_halfspaces: Vec<HalfspaceRecord>,
    pub cuts: Vec<CutRecord>,
    pub counters: Counters,
    pub log: Vec<IterRecord>,
}

impl RunResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn write_log<W: Write>(&self, out: W) -> Result<()> {
        let mut w = LogWriter::new(out);
        for r in &self.log {
            w.push(r)?;
        }
        Ok(())
    }
}

/// CSV writer that flushes after every row.
pub struct LogWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> LogWriter<W> {
    pub fn new(out: W) -> Self {
        LogWriter {
            inner: csv::WriterBuilder::new().has_headers(true).from_writer(out),
        }
    }

    pub fn push(&mut self, r: &IterRecord) -> Result<()> {
        self.inner.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        self.inner.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_matches_columns() {
        let r = IterRecord {
            iter: 0,
            n_outer_vertices: 1,
            n_inner_vertices: 2,
            d_h: Some(0.5),
            z_star: None,
            qp_solved: 1,
            qp_skipped: 0,
            scalarizations_total: 2,
            wallclock_ms: 0.0,
        };
        let mut buf = Vec::new();
        LogWriter::new(&mut buf).push(&r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, LOG_COLUMNS.join(","));
        assert_eq!(text.lines().nth(1).unwrap(), "0,1,2,0.5,,1,0,2,0.0");
    }
}

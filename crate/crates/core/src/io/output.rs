//! Output files of a run: `series.csv`, `snapshots.jsonl`, `manifest.json`.
//!
//! Every number is written with 17 significant digits so that reading a
//! file back reproduces the values exactly.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::audit::{curvature_hat, riccati_envelope, scalar_torsion_field, DiagnosticsRecord};
use crate::circle::{CircleGrid, Mat3Field};
use crate::error::{FlowError, Result};
use crate::flow::FlowState;
use crate::gauge::{convergence_report, normalized_q, LimitPrediction};
use crate::mat3::Mat3;

pub const FORMAT_VERSION: &str = "hsflow-output/1";

pub const SERIES_HEADER: [&str; 12] = [
    "t",
    "v",
    "torsion_max",
    "riccati_envelope",
    "detQ_err_max",
    "cohom_drift_max",
    "trQ_max",
    "skew_drift_max",
    "min_eig_beta",
    "qhat_dist",
    "qhat_prime_inf",
    "curv_max",
];

/// Round-trip exact decimal form of `x`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row of `series.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub v: f64,
    pub torsion_max: f64,
    pub riccati_envelope: f64,
    pub det_q_err_max: f64,
    pub cohom_drift_max: f64,
    pub tr_q_max: f64,
    pub skew_drift_max: f64,
    pub min_eig_beta: f64,
    pub qhat_dist: f64,
    pub qhat_prime_inf: f64,
    pub curv_max: f64,
}

impl SeriesRow {
    /// Combines a record with the normalized-gauge quantities of `state`.
    /// `torsion0` is the torsion maximum at `t = 0`.
    pub fn build(
        record: &DiagnosticsRecord,
        state: &FlowState<f64>,
        pred: &LimitPrediction<f64>,
        torsion0: f64,
        hat_nodes: usize,
    ) -> Result<Self> {
        let (qhat, v) = normalized_q(state, hat_nodes)?;
        let report = convergence_report(&qhat, pred, v);
        let curv = curvature_hat(&qhat, v)?.sup_norm();
        Ok(SeriesRow {
            t: record.t,
            v: record.v,
            torsion_max: record.torsion_max,
            riccati_envelope: riccati_envelope(torsion0, record.t),
            det_q_err_max: record.det_q_err_max,
            cohom_drift_max: record.cohom_drift_max,
            tr_q_max: record.tr_q_max,
            skew_drift_max: record.skew_drift_max,
            min_eig_beta: record.min_eig_beta,
            qhat_dist: report.dist_inf,
            qhat_prime_inf: report.q_prime_inf,
            curv_max: curv,
        })
    }

    pub fn values(&self) -> [f64; 12] {
        [
            self.t,
            self.v,
            self.torsion_max,
            self.riccati_envelope,
            self.det_q_err_max,
            self.cohom_drift_max,
            self.tr_q_max,
            self.skew_drift_max,
            self.min_eig_beta,
            self.qhat_dist,
            self.qhat_prime_inf,
            self.curv_max,
        ]
    }

    pub fn to_csv_line(&self) -> String {
        self.values().iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(",")
    }
}

pub fn write_series_header<W: Write>(w: &mut W) -> Result<()> {
    writeln!(w, "{}", SERIES_HEADER.join(","))?;
    Ok(())
}

/// Parses `series.csv` back into rows.
pub fn read_series<R: BufRead>(r: R) -> Result<Vec<SeriesRow>> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line != SERIES_HEADER.join(",") {
                return Err(FlowError::Parse(format!("unexpected series header `{line}`")));
            }
            continue;
        }
        let vals = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|_| FlowError::Parse(format!("line {}: bad number `{s}`", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != 12 {
            return Err(FlowError::Parse(format!("line {}: expected 12 columns", i + 1)));
        }
        rows.push(SeriesRow {
            t: vals[0],
            v: vals[1],
            torsion_max: vals[2],
            riccati_envelope: vals[3],
            det_q_err_max: vals[4],
            cohom_drift_max: vals[5],
            tr_q_max: vals[6],
            skew_drift_max: vals[7],
            min_eig_beta: vals[8],
            qhat_dist: vals[9],
            qhat_prime_inf: vals[10],
            curv_max: vals[11],
        });
    }
    Ok(rows)
}

/// Writes one JSON object per node: `t`, `k`, `x0`, `alpha` (row-major), `V`, `T`.
pub fn write_snapshot<W: Write>(w: &mut W, state: &FlowState<f64>) -> Result<()> {
    let alpha = state.alpha();
    let vol = state.volume();
    let torsion = scalar_torsion_field(state)?;
    let t = fmt_num(state.t());
    for (k, a) in alpha.samples().iter().enumerate() {
        let entries: Vec<String> = a.m.iter().flatten().map(|&x| fmt_num(x)).collect();
        writeln!(
            w,
            "{{\"t\":{t},\"k\":{k},\"x0\":{},\"alpha\":[{}],\"V\":{},\"T\":{}}}",
            fmt_num(state.grid().node(k)),
            entries.join(","),
            fmt_num(vol.samples()[k]),
            fmt_num(torsion.samples()[k]),
        )?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct SnapshotLine {
    t: f64,
    k: usize,
    alpha: [f64; 9],
}

/// A stored state: its time and the coefficient matrices at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub alpha: Vec<Mat3<f64>>,
}

impl Snapshot {
    pub fn field(&self, grid: &CircleGrid<f64>) -> Result<Mat3Field<f64>> {
        Mat3Field::new(grid.clone(), self.alpha.clone())
    }
}

/// Reads `snapshots.jsonl`, grouping consecutive lines by time.
pub fn read_snapshots<R: BufRead>(r: R) -> Result<Vec<Snapshot>> {
    let mut out: Vec<Snapshot> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SnapshotLine =
            serde_json::from_str(&line).map_err(|e| FlowError::Parse(format!("snapshot line {}: {e}", i + 1)))?;
        let m = Mat3::new(std::array::from_fn(|a| std::array::from_fn(|b| rec.alpha[3 * a + b])));
        match out.last_mut() {
            Some(s) if s.t == rec.t && rec.k == s.alpha.len() => s.alpha.push(m),
            _ if rec.k == 0 => out.push(Snapshot { t: rec.t, alpha: vec![m] }),
            _ => return Err(FlowError::Parse(format!("snapshot line {}: node {} out of order", i + 1, rec.k))),
        }
    }
    if let Some(first) = out.first() {
        let n = first.alpha.len();
        if let Some(bad) = out.iter().find(|s| s.alpha.len() != n) {
            return Err(FlowError::GridMismatch { expected: n, found: bad.alpha.len() });
        }
    }
    Ok(out)
}

/// Description of a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: String,
    /// The effective configuration as config-file text.
    pub config: String,
    pub initial: String,
    pub out_dir: String,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain struct");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: RunManifest = serde_json::from_str(text).map_err(|e| FlowError::Parse(format!("manifest: {e}")))?;
        if m.format_version != FORMAT_VERSION {
            return Err(FlowError::Parse(format!("unsupported format version `{}`", m.format_version)));
        }
        Ok(m)
    }
}

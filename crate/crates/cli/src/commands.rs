use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hsflow::audit::{
    check_records, linearize_eleven_term, principal_symbol, random_direction, richardson_errors, torsion_pairs,
    Auditor, DiagnosticsRecord, PropertyCheck,
};
use hsflow::circle::{CircleGrid, Mat3Field, SymField};
use hsflow::flow::{run_with, FlowState};
use hsflow::gauge::limit_prediction;
use hsflow::io::{
    parse_config, read_series, read_snapshots, write_series_header, write_snapshot, InitialData, RunConfig,
    RunManifest, SeriesRow, FORMAT_VERSION,
};
use hsflow::mat3::{fuzz, trace_gap_projected};
use hsflow::{FlowError, Result};

/// Named pass/fail results of a command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<(String, bool)>,
}

impl Outcome {
    fn push(&mut self, out: &mut dyn Write, name: &str, pass: bool, worst: f64) -> Result<()> {
        writeln!(out, "{} {name} worst={worst:.3e}", if pass { "PASS" } else { "FAIL" })?;
        self.checks.push((name.to_string(), pass));
        Ok(())
    }

    fn push_property(&mut self, out: &mut dyn Write, c: &PropertyCheck) -> Result<()> {
        self.push(out, c.name, c.pass, c.worst)
    }

    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().all(|(_, p)| *p) {
            0
        } else {
            1
        }
    }
}

fn load_config(config: &Option<PathBuf>, preset: &Option<String>) -> Result<RunConfig> {
    let mut cfg = match config {
        Some(p) => parse_config(&fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(name) = preset {
        cfg.set_preset(name)?;
    }
    Ok(cfg)
}

fn initial_field(cfg: &RunConfig, grid: &CircleGrid<f64>) -> Result<Mat3Field<f64>> {
    match &cfg.initial {
        InitialData::Preset(p) => Ok(p.sample(grid)),
        InitialData::Snapshot(path) => {
            let snaps = read_snapshots(BufReader::new(File::open(path)?))?;
            let last = snaps
                .last()
                .ok_or_else(|| FlowError::Parse(format!("{} holds no snapshot", path.display())))?;
            last.field(grid)
        }
    }
}

pub fn run(config: &Option<PathBuf>, preset: &Option<String>, out_dir: &Path, out: &mut dyn Write) -> Result<Outcome> {
    let cfg = load_config(config, preset)?;
    let grid = cfg.flow.grid::<f64>()?;
    let alpha0 = initial_field(&cfg, &grid)?;
    let pred = limit_prediction(&alpha0)?;
    let hat_nodes = cfg.hat_nodes();

    fs::create_dir_all(out_dir)?;
    let manifest = RunManifest {
        format_version: FORMAT_VERSION.to_string(),
        config: cfg.to_text(),
        initial: cfg.initial.describe(),
        out_dir: out_dir.display().to_string(),
    };
    fs::write(out_dir.join("manifest.json"), manifest.to_json())?;
    let mut series = BufWriter::new(File::create(out_dir.join("series.csv"))?);
    let mut snaps = BufWriter::new(File::create(out_dir.join("snapshots.jsonl"))?);
    write_series_header(&mut series)?;

    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let summary = run_with(&cfg.flow, &alpha0, |state, rec| {
        let torsion0 = records.first().map_or(rec.torsion_max, |r| r.torsion_max);
        let row = SeriesRow::build(rec, state, &pred, torsion0, hat_nodes)?;
        writeln!(series, "{}", row.to_csv_line())?;
        write_snapshot(&mut snaps, state)?;
        records.push(rec.clone());
        Ok(())
    })?;
    series.flush()?;
    snaps.flush()?;

    writeln!(
        out,
        "steps={} t_final={} converged={} rows={}",
        summary.steps,
        summary.t_final,
        summary.converged,
        records.len()
    )?;
    let mut outcome = Outcome::default();
    for c in check_records(&records) {
        outcome.push_property(out, &c)?;
    }
    Ok(outcome)
}

pub fn audit(out_dir: &Path, out: &mut dyn Write) -> Result<Outcome> {
    let manifest = RunManifest::from_json(&fs::read_to_string(out_dir.join("manifest.json"))?)?;
    let cfg = parse_config(&manifest.config)?;
    let grid = cfg.flow.grid::<f64>()?;
    let snaps = read_snapshots(BufReader::new(File::open(out_dir.join("snapshots.jsonl"))?))?;
    let series = read_series(BufReader::new(File::open(out_dir.join("series.csv"))?))?;
    let first = snaps.first().ok_or_else(|| FlowError::Parse("no snapshots".into()))?;
    let alpha0 = first.field(&grid)?;
    let auditor = Auditor::new(&alpha0)?;
    let pred = limit_prediction(&alpha0)?;

    let states = snaps
        .iter()
        .map(|s| FlowState::new(&s.field(&grid)?, s.t))
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<DiagnosticsRecord> = states.iter().map(|s| auditor.audit(s)).collect();

    let mut outcome = Outcome::default();
    for c in check_records(&records) {
        outcome.push_property(out, &c)?;
    }

    // V(x0, t) pointwise non-decreasing between stored states
    let mut v_drop = f64::NEG_INFINITY;
    for w in states.windows(2) {
        let (a, b) = (w[0].volume(), w[1].volume());
        for (x, y) in a.samples().iter().zip(b.samples()) {
            v_drop = v_drop.max(x - y);
        }
    }
    outcome.push(out, "volume-pointwise", v_drop <= 1e-10, v_drop)?;

    // zero off-diagonal entries of the initial data stay zero up to t = 10
    let zero_entries: Vec<(usize, usize)> = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && alpha0.samples().iter().all(|a| a.m[i][j] == 0.0))
        .collect();
    let mut offdiag = 0.0f64;
    for s in snaps.iter().filter(|s| s.t <= 10.0) {
        for a in &s.alpha {
            for &(i, j) in &zero_entries {
                offdiag = offdiag.max(a.m[i][j].abs());
            }
        }
    }
    outcome.push(out, "zero-entries-preserved", offdiag <= 1e-8, offdiag)?;

    let (mut tr_b, mut tr_a, mut gap) = (0.0f64, 0.0f64, f64::INFINITY);
    for s in &states {
        for (a, b) in torsion_pairs(&s.q())? {
            tr_b = tr_b.max(b.trace().abs());
            tr_a = tr_a.max((a.trace() - (b.to_mat3() * b.to_mat3()).trace()).abs());
            gap = gap.min(trace_gap_projected(&a, &b));
        }
    }
    outcome.push(out, "trace-b", tr_b <= 1e-10, tr_b)?;
    outcome.push(out, "trace-a", tr_a <= 1e-8, tr_a)?;
    outcome.push(out, "trace-gap", gap >= -1e-8, gap)?;

    let mut mismatch = if series.len() == states.len() { 0.0f64 } else { f64::INFINITY };
    if series.len() == states.len() {
        let torsion0 = records[0].torsion_max;
        for ((row, rec), state) in series.iter().zip(&records).zip(&states) {
            let again = SeriesRow::build(rec, state, &pred, torsion0, cfg.hat_nodes())?;
            for (x, y) in row.values().iter().zip(again.values()) {
                mismatch = mismatch.max((x - y).abs() / (1.0 + x.abs()));
            }
        }
    }
    outcome.push(out, "series-reproduced", mismatch <= 1e-9, mismatch)?;
    Ok(outcome)
}

pub fn predict_limit(config: &Option<PathBuf>, preset: &Option<String>, out: &mut dyn Write) -> Result<Outcome> {
    let cfg = load_config(config, preset)?;
    let alpha0 = initial_field(&cfg, &cfg.flow.grid::<f64>()?)?;
    let pred = limit_prediction(&alpha0)?;
    writeln!(out, "v_inf = {}", hsflow::io::fmt_num(pred.v_inf))?;
    writeln!(out, "qhat_inf =")?;
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| hsflow::io::fmt_num(pred.qhat_inf.get(i, j))).collect();
        writeln!(out, "  {}", row.join(" "))?;
    }
    Ok(Outcome::default())
}

pub fn lemma_fuzz(seed: u64, trials: usize, out: &mut dyn Write) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    for r in fuzz::run_all(seed, trials) {
        writeln!(out, "{r}")?;
        outcome.checks.push((r.name.to_string(), r.passed));
    }
    Ok(outcome)
}

pub fn linearize_audit(
    config: &Option<PathBuf>,
    preset: &Option<String>,
    seed: u64,
    out: &mut dyn Write,
) -> Result<Outcome> {
    let cfg = load_config(config, preset)?;
    let grid = cfg.flow.grid::<f64>()?;
    let alpha: SymField<f64> = initial_field(&cfg, &grid)?.map(|a| a.split().0);
    let beta = random_direction(&grid, 3, seed);
    let mut outcome = Outcome::default();

    let e = richardson_errors(&alpha, &beta, &[1e-3, 1e-4])?;
    writeln!(out, "fd error eps=1e-3: {:.3e}  eps=1e-4: {:.3e}", e[0], e[1])?;
    let ratio = e[0] / e[1];
    outcome.push(out, "richardson-ratio>=50", ratio >= 50.0 || e[0] <= 1e-12, ratio)?;

    let mut sym = 0.0f64;
    let mut homog = 0.0f64;
    for (a, b) in alpha.samples().iter().zip(beta.samples()) {
        sym = sym.max(principal_symbol(a, 1.0, a)?.norm_inf());
        let one = principal_symbol(a, 1.0, b)?;
        let two = principal_symbol(a, 2.0, b)?;
        homog = homog.max((two - one.scale(4.0)).norm_inf() / (1.0 + two.norm_inf()));
    }
    outcome.push(out, "symbol-kills-alpha", sym <= 1e-14, sym)?;
    outcome.push(out, "symbol-homogeneous", homog <= 1e-14, homog)?;

    let printed = linearize_eleven_term(&alpha, &beta)?;
    let fd = hsflow::audit::fd_jacobian(&alpha, &beta, 1e-4)?;
    writeln!(out, "info eleven-term form vs fd: {:.3e}", fd.sup_distance(&printed)?)?;
    Ok(outcome)
}

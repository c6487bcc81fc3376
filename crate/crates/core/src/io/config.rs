//! `key = value` run configuration with `#` comments.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::circle::{CircleGrid, DiffScheme, Mat3Field};
use crate::error::{FlowError, Result};
use crate::flow::FlowConfig;
use crate::mat3::{Mat3, Vec3};
use crate::scalar::Real;

/// Named families of initial data.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// `diag(1 + a cos x0, 1, 1)`.
    Cosine { a: f64 },
    /// Symmetric part `diag(1 + 0.3 cos x0, 1, 1)`, skew axial vector `(0.2 sin x0, 0, 0)`.
    Skewed,
    /// Identity plus `0.2 sin x0` in the `(1, 3)` and `(3, 1)` entries.
    Offdiag,
    /// Any constant matrix with positive-definite symmetric part.
    Constant(Mat3<f64>),
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Cosine { .. } => "cosine",
            Preset::Skewed => "skewed",
            Preset::Offdiag => "offdiag",
            Preset::Constant(_) => "constant",
        }
    }

    /// The preset with its default parameters.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "cosine" => Some(Preset::Cosine { a: 0.5 }),
            "skewed" => Some(Preset::Skewed),
            "offdiag" => Some(Preset::Offdiag),
            "constant" => Some(Preset::Constant(Mat3::diag(1.0, 2.0, 3.0))),
            _ => None,
        }
    }

    pub fn sample<T: Real>(&self, grid: &CircleGrid<T>) -> Mat3Field<T> {
        let c = T::lit;
        match self {
            Preset::Cosine { a } => {
                let a = c(*a);
                Mat3Field::from_fn(grid, |x| Mat3::diag(T::one() + a * x.cos(), T::one(), T::one()))
            }
            Preset::Skewed => Mat3Field::from_fn(grid, |x| {
                Mat3::diag(T::one() + c(0.3) * x.cos(), T::one(), T::one())
                    + Vec3::new(c(0.2) * x.sin(), T::zero(), T::zero()).skew()
            }),
            Preset::Offdiag => Mat3Field::from_fn(grid, |x| {
                let mut m = Mat3::identity();
                m.m[0][2] = c(0.2) * x.sin();
                m.m[2][0] = m.m[0][2];
                m
            }),
            Preset::Constant(m) => Mat3Field::constant(grid, Mat3::new(m.m.map(|r| r.map(c)))),
        }
    }
}

/// Where the initial coefficient field comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Preset(Preset),
    /// Last state stored in a snapshot file written by an earlier run.
    Snapshot(PathBuf),
}

impl InitialData {
    pub fn describe(&self) -> String {
        match self {
            InitialData::Preset(p) => format!("preset:{}", p.name()),
            InitialData::Snapshot(p) => format!("snapshot:{}", p.display()),
        }
    }
}

/// Everything a config file can set.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub flow: FlowConfig,
    pub initial: InitialData,
    /// Node count of the uniform grid used for the normalized gauge; `N` if unset.
    pub hat_nodes: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            flow: FlowConfig::default(),
            initial: InitialData::Preset(Preset::Cosine { a: 0.5 }),
            hat_nodes: None,
        }
    }
}

impl RunConfig {
    pub fn hat_nodes(&self) -> usize {
        self.hat_nodes.unwrap_or(self.flow.n)
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let f = &self.flow;
        let mut s = String::new();
        let _ = writeln!(s, "N = {}", f.n);
        let _ = writeln!(s, "scheme = {}", f.scheme);
        let _ = writeln!(s, "cflSafety = {:?}", f.cfl_safety);
        let _ = writeln!(s, "dtMax = {:?}", f.dt_max);
        let _ = writeln!(s, "tEnd = {:?}", f.t_end);
        let _ = writeln!(s, "stopTol = {:?}", f.stop_tol);
        let _ = writeln!(s, "outputEvery = {:?}", f.output_every);
        let _ = writeln!(s, "renormalizeQ = {}", f.renormalize_q);
        let _ = writeln!(s, "dealias = {}", f.dealias);
        let _ = writeln!(s, "filterOrder = {}", f.filter_order);
        if let Some(m) = self.hat_nodes {
            let _ = writeln!(s, "hatNodes = {m}");
        }
        match &self.initial {
            InitialData::Preset(p) => {
                let _ = writeln!(s, "preset = {}", p.name());
                match p {
                    Preset::Cosine { a } => {
                        let _ = writeln!(s, "a = {a:?}");
                    }
                    Preset::Constant(m) => {
                        let vals: Vec<String> = m.m.iter().flatten().map(|x| format!("{x:?}")).collect();
                        let _ = writeln!(s, "constant = {}", vals.join(" "));
                    }
                    _ => {}
                }
            }
            InitialData::Snapshot(p) => {
                let _ = writeln!(s, "initial = {}", p.display());
            }
        }
        s
    }

    /// Replaces the initial data by a named preset with default parameters.
    pub fn set_preset(&mut self, name: &str) -> Result<()> {
        let p = Preset::by_name(name)
            .ok_or_else(|| FlowError::Config { line: 0, message: format!("unknown preset `{name}`") })?;
        self.initial = InitialData::Preset(p);
        Ok(())
    }
}

fn parse_num<V: FromStr>(line: usize, key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| FlowError::Config { line, message: format!("malformed value `{value}` for {key}") })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(FlowError::Config { line, message: format!("malformed flag `{value}` for {key}") }),
    }
}

/// Parses config text. Unset keys keep their defaults; the parsed values
/// are validated as a whole at the end.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut preset_name: Option<(usize, String)> = None;
    let mut amplitude: Option<(usize, f64)> = None;
    let mut constant: Option<(usize, Mat3<f64>)> = None;
    let mut initial: Option<PathBuf> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| FlowError::Config { line, message: format!("expected `key = value`, got `{body}`") })?;
        let bad = |message: String| Err(FlowError::Config { line, message });
        match key {
            "N" => {
                let n: i64 = parse_num(line, key, value)?;
                if n < 8 || n % 2 != 0 {
                    return bad(format!("N must be an even integer >= 8, got {n}"));
                }
                cfg.flow.n = n as usize;
            }
            "scheme" => {
                cfg.flow.scheme =
                    DiffScheme::from_str(value).map_err(|message| FlowError::Config { line, message })?;
            }
            "cflSafety" => {
                let v: f64 = parse_num(line, key, value)?;
                if !(v > 0.0 && v <= 1.0) {
                    return bad(format!("cflSafety must lie in (0, 1], got {v}"));
                }
                cfg.flow.cfl_safety = v;
            }
            "dtMax" => {
                let v: f64 = parse_num(line, key, value)?;
                if !(v > 0.0) {
                    return bad(format!("dtMax must be positive, got {v}"));
                }
                cfg.flow.dt_max = v;
            }
            "tEnd" => {
                let v: f64 = parse_num(line, key, value)?;
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("tEnd must be positive, got {v}"));
                }
                cfg.flow.t_end = v;
            }
            "stopTol" => {
                let v: f64 = parse_num(line, key, value)?;
                if !(v >= 0.0) {
                    return bad(format!("stopTol must be non-negative, got {v}"));
                }
                cfg.flow.stop_tol = v;
            }
            "outputEvery" => {
                let v: f64 = parse_num(line, key, value)?;
                if !(v > 0.0) {
                    return bad(format!("outputEvery must be positive, got {v}"));
                }
                cfg.flow.output_every = v;
            }
            "renormalizeQ" => cfg.flow.renormalize_q = parse_bool(line, key, value)?,
            "dealias" => cfg.flow.dealias = parse_bool(line, key, value)?,
            "filterOrder" => {
                let p: i64 = parse_num(line, key, value)?;
                if !(p == 0 || (2..=64).contains(&p)) || p % 2 != 0 {
                    return bad(format!("filterOrder must be 0 or an even integer in 2..=64, got {p}"));
                }
                cfg.flow.filter_order = p as u32;
            }
            "hatNodes" => {
                let m: i64 = parse_num(line, key, value)?;
                if m < 8 || m % 2 != 0 {
                    return bad(format!("hatNodes must be an even integer >= 8, got {m}"));
                }
                cfg.hat_nodes = Some(m as usize);
            }
            "preset" => {
                if Preset::by_name(value).is_none() {
                    return bad(format!("unknown preset `{value}`"));
                }
                preset_name = Some((line, value.to_string()));
            }
            "a" => amplitude = Some((line, parse_num(line, key, value)?)),
            "constant" => {
                let vals = value
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num::<f64>(line, key, s))
                    .collect::<Result<Vec<_>>>()?;
                let m = match vals.len() {
                    3 => Mat3::diag(vals[0], vals[1], vals[2]),
                    9 => Mat3::new(std::array::from_fn(|i| std::array::from_fn(|j| vals[3 * i + j]))),
                    k => return bad(format!("constant takes 3 (diagonal) or 9 values, got {k}")),
                };
                if !m.is_finite() || !m.split().0.is_positive_definite() {
                    return bad("constant matrix needs a positive-definite symmetric part".into());
                }
                constant = Some((line, m));
            }
            "initial" => initial = Some(PathBuf::from(value)),
            other => return bad(format!("unknown key `{other}`")),
        }
    }
    if let Some(path) = initial {
        if let Some((line, _)) = preset_name {
            return Err(FlowError::Config { line, message: "preset and initial are mutually exclusive".into() });
        }
        cfg.initial = InitialData::Snapshot(path);
    } else {
        let name = preset_name.as_ref().map(|p| p.1.as_str()).unwrap_or("cosine");
        let mut preset = Preset::by_name(name).expect("checked above");
        match (&mut preset, amplitude, constant) {
            (Preset::Cosine { a }, Some((_, v)), _) => *a = v,
            (Preset::Constant(m), _, Some((_, v))) => *m = v,
            (_, Some((line, _)), _) => {
                return Err(FlowError::Config { line, message: format!("`a` does not apply to preset {name}") })
            }
            (_, _, Some((line, _))) => {
                return Err(FlowError::Config {
                    line,
                    message: format!("`constant` does not apply to preset {name}"),
                })
            }
            _ => {}
        }
        if let Preset::Cosine { a } = preset {
            if !(a.abs() < 1.0) {
                let line = amplitude.map(|p| p.0).unwrap_or(0);
                return Err(FlowError::Config { line, message: format!("cosine amplitude must satisfy |a| < 1, got {a}") });
            }
        }
        cfg.initial = InitialData::Preset(preset);
    }
    Ok(cfg)
}

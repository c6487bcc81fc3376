//! Time integration of `d/dt alpha = (V^{-1} (alpha / V)')'` on the circle.
//!
//! The state keeps the symmetric part and the axial vector of the skew part
//! in separate fields. The right-hand side depends on the symmetric part
//! only, so the skew part is carried along untouched and stays constant to
//! the last bit.

mod qv;

pub use qv::{evolve_qv_step, qv_rhs, qv_stable_dt, run_qv, QvState};

use crate::audit::{Auditor, DiagnosticsRecord};
use crate::circle::{CircleGrid, DiffScheme, Mat3Field, Order, ScalarField, SymField, Vec3Field};
use crate::error::{FlowError, Result};
use crate::geometry::q_and_v;
use crate::mat3::{compose, inner_with_inverse, split};
use crate::scalar::Real;

/// Integration and output settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub n: usize,
    pub scheme: DiffScheme,
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Runs stop once `||Q'||_inf` drops below this.
    pub stop_tol: f64,
    pub output_every: f64,
    /// Re-impose `det Q = 1` after each step of the `(Q, V)` scheme.
    pub renormalize_q: bool,
    pub dealias: bool,
    /// Order of the exponential filter on the spectral right-hand side; 0 is off.
    pub filter_order: u32,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            n: 128,
            scheme: DiffScheme::Spectral,
            cfl_safety: 0.25,
            dt_max: f64::INFINITY,
            t_end: 50.0,
            stop_tol: 1e-10,
            output_every: 0.1,
            renormalize_q: false,
            dealias: false,
            filter_order: 36,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Err(FlowError::Config { line: 0, message });
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cflSafety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("tEnd must be positive and finite, got {}", self.t_end));
        }
        if !(self.dt_max > 0.0) {
            return bad(format!("dtMax must be positive, got {}", self.dt_max));
        }
        if !(self.output_every > 0.0) {
            return bad(format!("outputEvery must be positive, got {}", self.output_every));
        }
        if !(self.stop_tol >= 0.0) {
            return bad(format!("stopTol must be non-negative, got {}", self.stop_tol));
        }
        CircleGrid::<f64>::new(self.n).map(|_| ())
    }

    /// The grid described by `n`, `scheme`, `dealias` and `filter_order`.
    pub fn grid<T: Real>(&self) -> Result<CircleGrid<T>> {
        Ok(CircleGrid::new(self.n)?
            .with_scheme(self.scheme)
            .with_dealias(self.dealias)
            .with_filter(self.filter_order))
    }
}

/// The coefficient field at one flow time.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState<T: Real> {
    t: T,
    beta: SymField<T>,
    gamma: Vec3Field<T>,
}

impl<T: Real> FlowState<T> {
    /// Validates that `alpha` is finite with positive-definite symmetric part.
    pub fn new(alpha: &Mat3Field<T>, t: T) -> Result<Self> {
        let beta = alpha.map(|a| split(a).0);
        let gamma = alpha.map(|a| split(a).1);
        Self::from_parts(beta, gamma, t)
    }

    pub fn from_parts(beta: SymField<T>, gamma: Vec3Field<T>, t: T) -> Result<Self> {
        beta.grid().check_same(gamma.grid())?;
        if !beta.is_finite() || !gamma.is_finite() {
            return Err(FlowError::UnstableStep { t: t.as_f64() });
        }
        if let Some(k) = beta.samples().iter().position(|b| !b.is_positive_definite()) {
            return Err(FlowError::NotPositiveDefinite {
                context: format!("symmetric part at node {k}"),
                t: Some(t.as_f64()),
            });
        }
        Ok(FlowState { t, beta, gamma })
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn grid(&self) -> &CircleGrid<T> {
        self.beta.grid()
    }

    pub fn beta(&self) -> &SymField<T> {
        &self.beta
    }

    pub fn gamma(&self) -> &Vec3Field<T> {
        &self.gamma
    }

    pub fn alpha(&self) -> Mat3Field<T> {
        self.beta.zip_map(&self.gamma, |b, g| compose(b, g)).expect("same grid")
    }

    /// `V = (det beta)^{1/3}` at every node.
    pub fn volume(&self) -> ScalarField<T> {
        self.beta.map(|b| b.det().cbrt())
    }

    /// `Q = V^{-1} beta` at every node.
    pub fn q(&self) -> SymField<T> {
        self.beta.map(|b| b.scale(T::one() / b.det().cbrt()))
    }
}

/// `(V^{-1} Q')'` from the symmetric part alone; conservative form. The
/// grid's filter, if any, is applied to the result.
pub fn rhs_beta<T: Real>(beta: &SymField<T>) -> Result<SymField<T>> {
    let qv = beta.samples().iter().map(q_and_v).collect::<Result<Vec<_>>>()?;
    let q = SymField::from_vec_unchecked(beta.grid(), qv.iter().map(|p| p.0).collect());
    let dq = q.deriv(Order::First);
    let flux = dq.samples().iter().zip(&qv).map(|(d, (_, v))| d.scale(T::one() / *v)).collect();
    Ok(SymField::from_vec_unchecked(beta.grid(), flux).deriv(Order::First).filtered())
}

/// Flow velocity of a state; exactly symmetric.
pub fn rhs_conservative<T: Real>(state: &FlowState<T>) -> Result<SymField<T>> {
    rhs_beta(&state.beta).map_err(|e| e.at_time(state.t.as_f64()))
}

/// The expanded form of the velocity, valid for symmetric `alpha`.
pub fn rhs_expanded<T: Real>(state: &FlowState<T>) -> Result<SymField<T>> {
    let tol = T::lit(1e-12);
    if state.gamma.sup_norm() > tol {
        return Err(FlowError::ConstraintViolated(format!(
            "expanded form needs symmetric alpha, skew part {:e}",
            state.gamma.sup_norm()
        )));
    }
    expanded_velocity(&state.beta).map_err(|e| e.at_time(state.t.as_f64()))
}

/// The expanded velocity of a symmetric coefficient field.
pub fn expanded_velocity<T: Real>(a: &SymField<T>) -> Result<SymField<T>> {
    let d1 = a.deriv(Order::First);
    let d2 = a.deriv(Order::Second);
    let third = T::one() / T::lit(3.0);
    let samples = a
        .samples()
        .iter()
        .zip(d1.samples().iter().zip(d2.samples()))
        .map(|(al, (a1, a2))| {
            let ai = al.inverse_pd()?;
            let v2 = al.det().cbrt().powi(2);
            let p_a2 = inner_with_inverse(&ai, al, a2);
            let p_a1 = inner_with_inverse(&ai, al, a1);
            let p_11 = inner_with_inverse(&ai, a1, a1);
            let coeff = -third * p_a2 + third * p_11 + T::lit(2.0 / 9.0) * p_a1 * p_a1;
            Ok((*a2 - a1.scale(p_a1) + al.scale(coeff)).scale(T::one() / v2))
        })
        .collect::<Result<Vec<_>>>()?;
    SymField::new(a.grid().clone(), samples)
}

/// `min(dtMax, cflSafety * h^2 * min V^2 / 2)`.
pub fn stable_dt<T: Real>(state: &FlowState<T>, cfg: &FlowConfig) -> T {
    let h = state.grid().spacing();
    let vmin = state.volume().min();
    let budget = T::lit(cfg.cfl_safety) * h * h * vmin * vmin / T::lit(2.0);
    budget.min(T::lit(cfg.dt_max))
}

/// One classical RK4 step of size `dt`.
pub fn advance<T: Real>(state: &FlowState<T>, dt: T) -> Result<FlowState<T>> {
    let t = state.t;
    let fail = |e: FlowError| e.at_time(t.as_f64());
    let b0 = &state.beta;
    let stage = |k: &SymField<T>, c: T| b0.zip_map(k, |b, d| *b + d.scale(c)).expect("same grid");
    let half = dt / T::lit(2.0);
    let k1 = rhs_beta(b0).map_err(fail)?;
    let k2 = rhs_beta(&stage(&k1, half)).map_err(fail)?;
    let k3 = rhs_beta(&stage(&k2, half)).map_err(fail)?;
    let k4 = rhs_beta(&stage(&k3, dt)).map_err(fail)?;
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(b0.len());
    for (i, b) in b0.samples().iter().enumerate() {
        let incr = k1.samples()[i] + k2.samples()[i].scale(two) + k3.samples()[i].scale(two) + k4.samples()[i];
        out.push(*b + incr.scale(sixth));
    }
    let t_new = t + dt;
    let beta = SymField::new(b0.grid().clone(), out)
        .map_err(|_| FlowError::UnstableStep { t: t_new.as_f64() })?;
    FlowState::from_parts(beta, state.gamma.clone(), t_new)
}

/// Outcome of [`run`]: the states and records at every output time.
#[derive(Debug, Clone)]
pub struct RunOutput<T: Real> {
    pub trajectory: Vec<FlowState<T>>,
    pub records: Vec<DiagnosticsRecord>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    /// Whether the run ended on the `||Q'||_inf < stopTol` rule.
    pub converged: bool,
}

/// Integrates from `alpha0` and keeps every output snapshot in memory.
pub fn run<T: Real>(cfg: &FlowConfig, alpha0: &Mat3Field<T>) -> Result<RunOutput<T>> {
    let mut trajectory = Vec::new();
    let mut records = Vec::new();
    let summary = run_with(cfg, alpha0, |s, r| {
        trajectory.push(s.clone());
        records.push(r.clone());
        Ok(())
    })?;
    Ok(RunOutput { trajectory, records, summary })
}

/// Integrates from `alpha0`, handing each output state and its record to
/// `observer` as soon as it is produced.
pub fn run_with<T: Real>(
    cfg: &FlowConfig,
    alpha0: &Mat3Field<T>,
    mut observer: impl FnMut(&FlowState<T>, &DiagnosticsRecord) -> Result<()>,
) -> Result<RunSummary> {
    cfg.validate()?;
    if alpha0.len() != cfg.n {
        return Err(FlowError::GridMismatch { expected: cfg.n, found: alpha0.len() });
    }
    let grid = cfg.grid::<T>()?;
    let alpha0 = Mat3Field::new(grid, alpha0.samples().to_vec())?;
    let mut state = FlowState::new(&alpha0, T::zero())?;
    let auditor = Auditor::new(&alpha0)?;

    let mut steps = 0;
    let mut k_out: u64 = 0;
    loop {
        let t = state.t.as_f64();
        let record = auditor.audit(&state);
        observer(&state, &record)?;
        if record.q_prime_inf < cfg.stop_tol {
            return Ok(RunSummary { steps, t_final: t, converged: true });
        }
        if t >= cfg.t_end {
            return Ok(RunSummary { steps, t_final: t, converged: false });
        }
        k_out += 1;
        let target = (k_out as f64 * cfg.output_every).min(cfg.t_end);
        while state.t.as_f64() < target {
            let now = state.t.as_f64();
            let dt = stable_dt(&state, cfg).as_f64();
            let clamped = now + dt >= target;
            let step = if clamped { target - now } else { dt };
            state = advance(&state, T::lit(step))?;
            if clamped {
                state.t = T::lit(target);
            }
            steps += 1;
        }
    }
}

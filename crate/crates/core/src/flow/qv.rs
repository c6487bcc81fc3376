//! The coupled `(Q, V)` system `V_t = T V / 3`, `Q_t = Lap Q - T Q / 3`,
//! integrated independently of the `alpha` scheme for cross-checking.

use super::FlowConfig;
use crate::circle::{Order, ScalarField, SymField};
use crate::error::{FlowError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct QvState<T: Real> {
    pub t: T,
    pub q: SymField<T>,
    pub v: ScalarField<T>,
}

/// Time derivatives `(Q_t, V_t)`, passed through the grid's filter like the
/// `alpha` scheme's right-hand side.
pub fn qv_rhs<T: Real>(q: &SymField<T>, v: &ScalarField<T>) -> Result<(SymField<T>, ScalarField<T>)> {
    q.grid().check_same(v.grid())?;
    if !(v.min() > T::zero()) {
        return Err(FlowError::not_pd("volume factor V must be positive"));
    }
    let third = T::one() / T::lit(3.0);
    let dq = q.deriv(Order::First);
    let flux = dq.zip_map(v, |d, vv| d.scale(T::one() / *vv))?;
    let dflux = flux.deriv(Order::First);
    let mut dq_dt = Vec::with_capacity(q.len());
    let mut dv_dt = Vec::with_capacity(q.len());
    for k in 0..q.len() {
        let (qk, vk) = (q.samples()[k], v.samples()[k]);
        let m = qk.inverse_pd()? * dq.samples()[k];
        let torsion = (m * m).trace() / (vk * vk);
        dq_dt.push(dflux.samples()[k].scale(T::one() / vk) - qk.scale(third * torsion));
        dv_dt.push(third * torsion * vk);
    }
    Ok((
        SymField::new(q.grid().clone(), dq_dt)?.filtered(),
        ScalarField::new(v.grid().clone(), dv_dt)?.filtered(),
    ))
}

/// One RK4 step of the `(Q, V)` system.
pub fn evolve_qv_step<T: Real>(
    q: &SymField<T>,
    v: &ScalarField<T>,
    dt: T,
    renormalize: bool,
) -> Result<(SymField<T>, ScalarField<T>)> {
    let tol = T::lit(1e-6);
    if let Some(k) = q.samples().iter().position(|m| !((m.det() - T::one()).abs() <= tol)) {
        return Err(FlowError::ConstraintViolated(format!(
            "det Q = {} at node {k}",
            q.samples()[k].det()
        )));
    }
    let axpy = |x: &SymField<T>, y: &ScalarField<T>, kx: &SymField<T>, ky: &ScalarField<T>, c: T| {
        (
            x.zip_map(kx, |a, b| *a + b.scale(c)).expect("same grid"),
            y.zip_map(ky, |a, b| *a + *b * c).expect("same grid"),
        )
    };
    let half = dt / T::lit(2.0);
    let (q1, v1) = qv_rhs(q, v)?;
    let (s, w) = axpy(q, v, &q1, &v1, half);
    let (q2, v2) = qv_rhs(&s, &w)?;
    let (s, w) = axpy(q, v, &q2, &v2, half);
    let (q3, v3) = qv_rhs(&s, &w)?;
    let (s, w) = axpy(q, v, &q3, &v3, dt);
    let (q4, v4) = qv_rhs(&s, &w)?;
    let two = T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let mut qn = Vec::with_capacity(q.len());
    let mut vn = Vec::with_capacity(q.len());
    for k in 0..q.len() {
        let dq = q1.samples()[k] + q2.samples()[k].scale(two) + q3.samples()[k].scale(two) + q4.samples()[k];
        let dv = v1.samples()[k] + two * v2.samples()[k] + two * v3.samples()[k] + v4.samples()[k];
        let mut qk = q.samples()[k] + dq.scale(sixth);
        if renormalize {
            qk = qk.scale(T::one() / qk.det().cbrt());
        }
        qn.push(qk);
        vn.push(v.samples()[k] + dv * sixth);
    }
    let q_new = SymField::new(q.grid().clone(), qn).map_err(|_| FlowError::UnstableStep { t: f64::NAN })?;
    let v_new = ScalarField::new(v.grid().clone(), vn).map_err(|_| FlowError::UnstableStep { t: f64::NAN })?;
    if let Some(k) = q_new.samples().iter().position(|m| !m.is_positive_definite()) {
        return Err(FlowError::not_pd(format!("Q at node {k}")));
    }
    Ok((q_new, v_new))
}

/// Step budget of the `(Q, V)` scheme, the same as for the `alpha` scheme.
pub fn qv_stable_dt<T: Real>(v: &ScalarField<T>, cfg: &FlowConfig) -> T {
    let h = v.grid().spacing();
    let vmin = v.min();
    (T::lit(cfg.cfl_safety) * h * h * vmin * vmin / T::lit(2.0)).min(T::lit(cfg.dt_max))
}

/// Integrates the `(Q, V)` system to `t_end`.
pub fn run_qv<T: Real>(cfg: &FlowConfig, start: QvState<T>, t_end: T) -> Result<QvState<T>> {
    let QvState { mut t, mut q, mut v } = start;
    while t < t_end {
        let dt = qv_stable_dt(&v, cfg).min(t_end - t);
        let (qn, vn) = evolve_qv_step(&q, &v, dt, cfg.renormalize_q).map_err(|e| e.at_time(t.as_f64()))?;
        q = qn;
        v = vn;
        t = if dt == t_end - t { t_end } else { t + dt };
    }
    Ok(QvState { t, q, v })
}

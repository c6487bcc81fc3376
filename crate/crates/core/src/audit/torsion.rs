//! The heat-type evolution of the scalar torsion and the trace monomials
//! that feed it.

use crate::circle::{Order, ScalarField, SymField};
use crate::error::{FlowError, Result};
use crate::flow::FlowState;
use crate::geometry::invariant_laplacian;
use crate::mat3::SymMat3;
use crate::scalar::Real;

/// Trace monomials of `A = Q^{-1/2} Q'' Q^{-1/2}`, `B = Q^{-1/2} Q' Q^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorsionTraces<T> {
    pub tr_b2: T,
    pub tr_b3: T,
    pub tr_b4: T,
    pub tr_ab: T,
    pub tr_ab2: T,
    pub tr_a2: T,
}

impl<T: Real> TorsionTraces<T> {
    pub fn from_pair(a: &SymMat3<T>, b: &SymMat3<T>) -> Self {
        let (am, bm) = (a.to_mat3(), b.to_mat3());
        let bb = bm * bm;
        TorsionTraces {
            tr_b2: bb.trace(),
            tr_b3: (bb * bm).trace(),
            tr_b4: (bb * bb).trace(),
            tr_ab: (am * bm).trace(),
            tr_ab2: (am * bb).trace(),
            tr_a2: (am * am).trace(),
        }
    }
}

/// The pair `(A, B)` at every node of `Q`.
pub fn torsion_pairs<T: Real>(q: &SymField<T>) -> Result<Vec<(SymMat3<T>, SymMat3<T>)>> {
    let d1 = q.deriv(Order::First);
    let d2 = q.deriv(Order::Second);
    q.samples()
        .iter()
        .zip(d1.samples().iter().zip(d2.samples()))
        .map(|(qk, (q1, q2))| {
            let s = qk.inv_sqrt()?;
            Ok((s.sandwich(q2), s.sandwich(q1)))
        })
        .collect()
}

/// Trace monomials at every node of `Q`.
pub fn torsion_traces<T: Real>(q: &SymField<T>) -> Result<Vec<TorsionTraces<T>>> {
    Ok(torsion_pairs(q)?.iter().map(|(a, b)| TorsionTraces::from_pair(a, b)).collect())
}

/// Scalar torsion `V^{-2} tr((Q^{-1} Q')^2)` of a state.
pub fn scalar_torsion_field<T: Real>(state: &FlowState<T>) -> Result<ScalarField<T>> {
    let q = state.q();
    let dq = q.deriv(Order::First);
    let v = state.volume();
    let vals = q
        .samples()
        .iter()
        .zip(dq.samples())
        .zip(v.samples())
        .map(|((qk, dk), vk)| {
            let m = qk.inverse_pd()? * *dk;
            Ok((m * m).trace() / (*vk * *vk))
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(q.grid().clone(), vals)
}

/// Right-hand side of `T_t - Lap T = ...` assembled from the state.
pub fn heat_rhs<T: Real>(state: &FlowState<T>) -> Result<ScalarField<T>> {
    let traces = torsion_traces(&state.q())?;
    let v = state.volume();
    let dv = v.deriv(Order::First);
    let torsion = scalar_torsion_field(state)?;
    let dtorsion = torsion.deriv(Order::First);
    let c = T::lit;
    let vals = (0..v.len())
        .map(|k| {
            let tr = traces[k];
            let vk = v.samples()[k];
            let tk = torsion.samples()[k];
            let r = dv.samples()[k] / vk;
            let v2 = vk * vk;
            let v4 = v2 * v2;
            -c(2.0 / 3.0) * tk * tk + c(8.0) / v2 * r * r * tk - c(6.0) / v4 * r * tr.tr_ab
                + c(2.0) / v4 * r * tr.tr_b3
                + c(8.0) / v4 * tr.tr_ab2
                + (c(5.0) * r * dtorsion.samples()[k] - c(2.0) / v2 * tr.tr_a2 - c(6.0) / v2 * tr.tr_b4) / v2
        })
        .collect();
    ScalarField::new(v.grid().clone(), vals)
}

/// `(dT/dt - Lap T) - RHS` at the middle state, with the time derivative
/// taken as a centered difference over three equally spaced states.
pub fn torsion_heat_residual<T: Real>(
    prev: &FlowState<T>,
    cur: &FlowState<T>,
    next: &FlowState<T>,
) -> Result<ScalarField<T>> {
    prev.grid().check_same(cur.grid())?;
    cur.grid().check_same(next.grid())?;
    let (d0, d1) = (cur.t() - prev.t(), next.t() - cur.t());
    if !(d0 > T::zero()) || (d1 - d0).abs() > T::lit(1e-6) * d0 {
        return Err(FlowError::ConstraintViolated(format!(
            "states must be equally spaced in time, got steps {d0} and {d1}"
        )));
    }
    let tp = scalar_torsion_field(prev)?;
    let tn = scalar_torsion_field(next)?;
    let tc = scalar_torsion_field(cur)?;
    let dt = next.t() - prev.t();
    let lap = invariant_laplacian(&tc, &cur.volume())?;
    let rhs = heat_rhs(cur)?;
    let vals = (0..tc.len())
        .map(|k| (tn.samples()[k] - tp.samples()[k]) / dt - lap.samples()[k] - rhs.samples()[k])
        .collect();
    ScalarField::new(tc.grid().clone(), vals)
}

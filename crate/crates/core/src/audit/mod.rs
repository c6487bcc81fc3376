//! Numerical checks of the quantitative statements about the flow:
//! monitors along a run, the Riccati envelope for the scalar torsion, the
//! torsion heat identity, curvature in the normalized gauge, and the
//! linearized operator.

mod curvature;
mod linear;
mod torsion;

pub use curvature::{curvature_hat, CurvatureHat};
pub use linear::{
    fd_jacobian, linearize, linearize_eleven_term, principal_symbol, random_direction, richardson_errors,
};
pub use torsion::{
    heat_rhs, scalar_torsion_field, torsion_heat_residual, torsion_pairs, torsion_traces, TorsionTraces,
};

use crate::circle::{Mat3Field, Order, Vec3Field};
use crate::error::{FlowError, Result};
use crate::flow::FlowState;
use crate::geometry::is_hypersymplectic;
use crate::mat3::Mat3;
use crate::scalar::Real;

/// Monitors of one flow state, relative to the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `v_t`, the integral of `V`.
    pub v: f64,
    pub torsion_max: f64,
    /// Integral of every entry of `alpha`.
    pub cohom: [[f64; 3]; 3],
    pub cohom_drift_max: f64,
    pub tr_q_max: f64,
    pub det_q_err_max: f64,
    pub skew_drift_max: f64,
    pub min_eig_beta: f64,
    /// `(1/3) int tr alpha(., 0)`.
    pub volume_bound: f64,
    pub eig_lo: f64,
    pub eig_hi: f64,
    /// `||Q'||_inf` in the original coordinate.
    pub q_prime_inf: f64,
}

/// Reference data from `t = 0` shared by all records of a run.
#[derive(Debug, Clone)]
pub struct Auditor<T: Real> {
    cohom0: Mat3<T>,
    gamma0: Vec3Field<T>,
    volume_bound: T,
}

impl<T: Real> Auditor<T> {
    pub fn new(alpha0: &Mat3Field<T>) -> Result<Self> {
        let (ok, margin) = is_hypersymplectic(alpha0);
        if !ok {
            return Err(FlowError::not_pd(format!("initial symmetric part, smallest eigenvalue {margin:e}")));
        }
        let cohom0 = alpha0.integrate_components();
        Ok(Auditor {
            cohom0,
            gamma0: alpha0.map(|a| a.split().1),
            volume_bound: cohom0.trace() / T::lit(3.0),
        })
    }

    pub fn volume_bound(&self) -> T {
        self.volume_bound
    }

    pub fn audit(&self, state: &FlowState<T>) -> DiagnosticsRecord {
        let f = |x: T| x.as_f64();
        let vol = state.volume();
        let q = state.q();
        let dq = q.deriv(Order::First);
        let mut torsion_max = T::zero();
        let mut tr_q_max = T::neg_infinity();
        let mut det_err = T::zero();
        let mut eig_lo = T::infinity();
        let mut eig_hi = T::neg_infinity();
        for ((qk, dqk), vk) in q.samples().iter().zip(dq.samples()).zip(vol.samples()) {
            let torsion = match qk.inverse_unchecked() {
                Some(qi) => {
                    let m = qi * *dqk;
                    (m * m).trace() / (*vk * *vk)
                }
                None => T::nan(),
            };
            torsion_max = torsion_max.max(torsion);
            tr_q_max = tr_q_max.max(qk.trace());
            det_err = det_err.max((qk.det() - T::one()).abs());
            let ev = qk.eigenvalues();
            eig_lo = eig_lo.min(ev[0]);
            eig_hi = eig_hi.max(ev[2]);
        }
        let alpha = state.alpha();
        let cohom = alpha.integrate_components();
        let drift = (cohom - self.cohom0).norm_inf();
        let min_eig_beta = state.beta().samples().iter().map(|b| b.eigenvalues()[0]).fold(T::infinity(), T::min);
        DiagnosticsRecord {
            t: f(state.t()),
            v: f(vol.integrate()),
            torsion_max: f(torsion_max),
            cohom: cohom.m.map(|row| row.map(f)),
            cohom_drift_max: f(drift),
            tr_q_max: f(tr_q_max),
            det_q_err_max: f(det_err),
            skew_drift_max: f(state.gamma().sup_distance(&self.gamma0).unwrap_or(T::nan())),
            min_eig_beta: f(min_eig_beta),
            volume_bound: f(self.volume_bound),
            eig_lo: f(eig_lo),
            eig_hi: f(eig_hi),
            q_prime_inf: f(dq.sup_norm()),
        }
    }
}

/// Record of `state` against the initial data `alpha0`.
pub fn audit<T: Real>(state: &FlowState<T>, alpha0: &Mat3Field<T>) -> Result<DiagnosticsRecord> {
    Ok(Auditor::new(alpha0)?.audit(state))
}

/// `T0 / (1 + T0 t / 3)`.
pub fn riccati_envelope(t0: f64, t: f64) -> f64 {
    t0 / (1.0 + t0 * t / 3.0)
}

/// Checks `T(t) <= envelope(T(t_first), t - t_first) (1 + 1e-6) + 1e-8` at
/// every sample. The returned margin is the smallest slack, negative when
/// violated.
pub fn riccati_check(series: &[(f64, f64)]) -> (bool, f64) {
    let Some(&(t_first, t0)) = series.first() else {
        return (true, f64::INFINITY);
    };
    let worst = series
        .iter()
        .map(|&(t, val)| riccati_envelope(t0, t - t_first) * (1.0 + 1e-6) + 1e-8 - val)
        .fold(f64::INFINITY, f64::min);
    (worst >= 0.0, worst)
}

/// Outcome of one property check over a sequence of records.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub pass: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
}

/// Checks the run-level properties that every sequence of records from one
/// trajectory must satisfy, in time order.
pub fn check_records(records: &[DiagnosticsRecord]) -> Vec<PropertyCheck> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let pairs = || records.windows(2).map(|w| (&w[0], &w[1]));
    let max_of = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::NEG_INFINITY, f64::max);
    let v_drop = max_of(&mut pairs().map(|(a, b)| a.v - b.v));
    let v_excess = max_of(&mut records.iter().map(|r| r.v - r.volume_bound));
    let trq_rise = max_of(&mut pairs().map(|(a, b)| b.tr_q_max - a.tr_q_max));
    let m = first.tr_q_max;
    let (lo, hi) = (1.0 / (m * m) * (1.0 - 1e-8), m * (1.0 + 1e-8));
    let sandwich = max_of(&mut records.iter().map(|r| (lo - r.eig_lo).max(r.eig_hi - hi)));
    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.torsion_max)).collect();
    let (ric_ok, ric_slack) = riccati_check(&series);
    let cohom = max_of(&mut records.iter().map(|r| r.cohom_drift_max));
    let skew = max_of(&mut records.iter().map(|r| r.skew_drift_max));
    let det = max_of(&mut records.iter().map(|r| r.det_q_err_max));
    let min_beta = records.iter().map(|r| r.min_eig_beta).fold(f64::INFINITY, f64::min);
    vec![
        PropertyCheck { name: "volume-monotone", pass: v_drop <= 1e-10, worst: v_drop },
        PropertyCheck { name: "volume-bound", pass: v_excess <= 1e-10, worst: v_excess },
        PropertyCheck { name: "trq-max-principle", pass: trq_rise <= 1e-10, worst: trq_rise },
        PropertyCheck { name: "eigen-sandwich", pass: sandwich <= 0.0, worst: sandwich },
        PropertyCheck { name: "riccati-envelope", pass: ric_ok, worst: ric_slack },
        PropertyCheck { name: "cohomology", pass: cohom <= 1e-9, worst: cohom },
        PropertyCheck { name: "skew-constant", pass: skew <= 1e-12, worst: skew },
        PropertyCheck { name: "det-q", pass: det <= 1e-10, worst: det },
        PropertyCheck { name: "beta-positive", pass: min_beta > 0.0, worst: min_beta },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::CircleGrid;
    use std::f64::consts::PI;

    #[test]
    fn flat_fixed_point_record() {
        let g = CircleGrid::<f64>::new(32).unwrap();
        let a = Mat3Field::constant(&g, Mat3::identity());
        let r = audit(&FlowState::new(&a, 0.0).unwrap(), &a).unwrap();
        assert!((r.v - 2.0 * PI).abs() < 1e-13);
        assert_eq!(r.torsion_max, 0.0);
        assert!(r.det_q_err_max <= 1e-13);
        assert_eq!(r.skew_drift_max, 0.0);
        assert_eq!(r.q_prime_inf, 0.0);
        assert_eq!((r.eig_lo, r.eig_hi), (1.0, 1.0));
    }

    #[test]
    fn cosine_volume_below_bound() {
        let n = 128;
        let g = CircleGrid::<f64>::new(n).unwrap();
        let a = Mat3Field::from_fn(&g, |x: f64| Mat3::diag(1.0 + 0.5 * x.cos(), 1.0, 1.0));
        let r = audit(&FlowState::new(&a, 0.0).unwrap(), &a).unwrap();
        assert!((r.volume_bound - 2.0 * PI).abs() < 1e-13);
        // composite Simpson on a fine grid as an independent quadrature
        let m = 20000;
        let h = 2.0 * PI / m as f64;
        let f = |x: f64| (1.0 + 0.5 * x.cos()).cbrt();
        let simpson: f64 = (0..m)
            .map(|k| {
                let x = k as f64 * h;
                h / 6.0 * (f(x) + 4.0 * f(x + h / 2.0) + f(x + h))
            })
            .sum();
        assert!((r.v - simpson).abs() < 1e-12, "{} vs {}", r.v, simpson);
        assert!(r.v < 2.0 * PI);
    }

    #[test]
    fn riccati_envelope_values() {
        assert!((riccati_envelope(3.0, 1.0) - 1.5).abs() < 1e-15);
        assert!(riccati_check(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).0);
        let (ok, margin) = riccati_check(&[(0.0, 3.0), (1.0, 1.4)]);
        assert!(ok && margin > 0.0);
        let (ok, margin) = riccati_check(&[(0.0, 3.0), (1.0, 1.6)]);
        assert!(!ok && margin < 0.0);
    }

    #[test]
    fn auditor_rejects_degenerate() {
        let g = CircleGrid::<f64>::new(16).unwrap();
        let a = Mat3Field::constant(&g, Mat3::diag(1.0, 0.0, 1.0));
        assert!(Auditor::new(&a).is_err());
    }

    #[test]
    fn record_checks_on_short_run() {
        let g = CircleGrid::<f64>::new(32).unwrap();
        let a = Mat3Field::from_fn(&g, |x: f64| Mat3::diag(1.0 + 0.5 * x.cos(), 1.0, 1.0));
        let aud = Auditor::new(&a).unwrap();
        let mut s = FlowState::new(&a, 0.0).unwrap();
        let mut recs = vec![aud.audit(&s)];
        for _ in 0..4 {
            for _ in 0..20 {
                s = crate::flow::advance(&s, 1e-3).unwrap();
            }
            recs.push(aud.audit(&s));
        }
        let checks = check_records(&recs);
        assert_eq!(checks.len(), 9);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        let mut bad = recs.clone();
        bad[2].v = bad[1].v - 1e-6;
        assert!(!check_records(&bad)[0].pass);
        assert!(check_records(&[]).is_empty());
    }
}

//! Riemann curvature of `(v / 2 pi)^2 dy^2 + Q_ij(y) dx_i dx_j` on the
//! uniform `y` grid.

use crate::circle::{Mat3Field, Order, SymField};
use crate::error::{FlowError, Result};
use crate::mat3::Mat3;
use crate::scalar::Real;

pub type Tensor3<T> = [[[T; 3]; 3]; 3];
pub type Tensor4<T> = [[[[T; 3]; 3]; 3]; 3];

/// Curvature components at every node.
#[derive(Debug, Clone)]
pub struct CurvatureHat<T: Real> {
    /// `[i][j]` holds `R_{y i y}^j`.
    pub ryiy: Mat3Field<T>,
    /// `[i][j][k][l]` holds `R_{ijk}^l`.
    pub rijkl: Vec<Tensor4<T>>,
    /// `[i][j][k]` holds `R_{y i j}^k`, identically zero.
    pub ryijk: Vec<Tensor3<T>>,
}

impl<T: Real> CurvatureHat<T> {
    /// Largest absolute component over all nodes and families.
    pub fn sup_norm(&self) -> T {
        let m4 = self.rijkl.iter().flatten().flatten().flatten().flatten().fold(T::zero(), |a, x| a.max(x.abs()));
        let m3 = self.ryijk.iter().flatten().flatten().flatten().fold(T::zero(), |a, x| a.max(x.abs()));
        self.ryiy.sup_norm().max(m4).max(m3)
    }
}

pub fn curvature_hat<T: Real>(qhat: &SymField<T>, v: T) -> Result<CurvatureHat<T>> {
    if !(v > T::zero()) {
        return Err(FlowError::not_pd("v must be positive"));
    }
    let tol = T::lit(1e-8);
    for (k, q) in qhat.samples().iter().enumerate() {
        if !q.is_positive_definite() {
            return Err(FlowError::not_pd(format!("Qhat at node {k}")));
        }
        if (q.det() - T::one()).abs() > tol {
            return Err(FlowError::ConstraintViolated(format!("det Qhat = {} at node {k}", q.det())));
        }
    }
    let d1 = qhat.deriv(Order::First);
    let d2 = qhat.deriv(Order::Second);
    let scale = {
        let s = T::two_pi() / v;
        s * s / T::lit(4.0)
    };
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let mut ryiy = Vec::with_capacity(qhat.len());
    let mut rijkl = Vec::with_capacity(qhat.len());
    for k in 0..qhat.len() {
        let qi = qhat.samples()[k].inverse_pd()?.to_mat3();
        let q1 = d1.samples()[k].to_mat3();
        let q2 = d2.samples()[k].to_mat3();
        // R_{yiy}^j = (1/2) Q^{jk} Q''_{ik} - (1/4) Q^{jl} Q'_{lp} Q^{pk} Q'_{ki}
        let first = q2 * qi;
        let second = q1 * qi * q1 * qi;
        let mut r = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = half * first.m[i][j] - quarter * second.m[i][j];
            }
        }
        ryiy.push(r);
        // R_{ijk}^l = (1/4)(2 pi / v)^2 Q^{lp} (Q'_{ik} Q'_{jp} - Q'_{ip} Q'_{jk})
        let p = q1 * qi;
        let mut t = [[[[T::zero(); 3]; 3]; 3]; 3];
        for (i, ti) in t.iter_mut().enumerate() {
            for (j, tj) in ti.iter_mut().enumerate() {
                for (kk, tk) in tj.iter_mut().enumerate() {
                    for (l, x) in tk.iter_mut().enumerate() {
                        *x = scale * (q1.m[i][kk] * p.m[j][l] - p.m[i][l] * q1.m[j][kk]);
                    }
                }
            }
        }
        rijkl.push(t);
    }
    Ok(CurvatureHat {
        ryiy: Mat3Field::new(qhat.grid().clone(), ryiy)?,
        rijkl,
        ryijk: vec![[[[T::zero(); 3]; 3]; 3]; qhat.len()],
    })
}

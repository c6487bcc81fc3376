//! Geometry of a T3-invariant triple in normal form
//! `omega_i = alpha_ij(x0) dx0 ^ dx_j + (1/2) eps_ipq dx_p ^ dx_q`.
//!
//! Everything here is pointwise in `x0` except the invariant Laplacian and
//! the fieldwise validation helpers. Derivatives in `x0` are supplied by the
//! caller so that the pointwise layer does not depend on a grid.

use crate::circle::{Mat3Field, Order, ScalarField};
use crate::error::{FlowError, Result};
use crate::mat3::{split, Mat3, SymMat3, Vec3};
use crate::scalar::Real;

/// Derived geometry at one point of the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample<T> {
    pub alpha: Mat3<T>,
    /// Volume factor `(det beta)^{1/3}`.
    pub v: T,
    /// `V^{-1} beta`, unit determinant.
    pub q: SymMat3<T>,
    pub q_prime: SymMat3<T>,
    /// Axial vector `(g23, g31, g12)` of the skew part.
    pub gamma: Vec3<T>,
    /// Metric coefficients in the coordinate coframe `dx0..dx3`.
    pub metric: [[T; 4]; 4],
    /// Row `i` holds the coefficients of `tau_i` in the adapted coframe.
    pub tau: Mat3<T>,
    pub scalar_torsion: T,
    /// Coefficient of the volume form on `dx0123`; equals `v`.
    pub mu: T,
}

/// `(Q, V)` from a positive-definite symmetric part.
pub fn q_and_v<T: Real>(beta: &SymMat3<T>) -> Result<(SymMat3<T>, T)> {
    beta.ldl_pivots()?;
    let v = beta.det().cbrt();
    Ok((beta.scale(T::one() / v), v))
}

/// `Q'` and `V'` from `beta` and `beta'`.
pub fn q_prime<T: Real>(beta: &SymMat3<T>, beta_prime: &SymMat3<T>) -> Result<(SymMat3<T>, T)> {
    let (_, v) = q_and_v(beta)?;
    let inv = beta.inverse_pd()?;
    let v_prime = v * (inv * *beta_prime).trace() / T::lit(3.0);
    let qp = beta_prime.scale(T::one() / v) - beta.scale(v_prime / (v * v));
    Ok((qp, v_prime))
}

/// `V^{-2} tr((Q^{-1} Q')^2)`.
pub fn scalar_torsion<T: Real>(q: &SymMat3<T>, q_prime: &SymMat3<T>, v: T) -> Result<T> {
    let qi = q.inverse_pd()?;
    let m = qi * *q_prime;
    Ok((m * m).trace() / (v * v))
}

/// Metric from the coordinate formula
/// `V^{-1}(det alpha dx0^2 - 2 (beta gamma)_i dx0 dx_i + beta_ij dx_i dx_j)`.
pub fn metric_coordinate<T: Real>(alpha: &Mat3<T>) -> Result<[[T; 4]; 4]> {
    let (beta, gamma) = split(alpha);
    let (_, v) = q_and_v(&beta)?;
    let bg = beta.mul_vec(&gamma);
    let mut g = [[T::zero(); 4]; 4];
    g[0][0] = alpha.det() / v;
    for i in 0..3 {
        g[0][i + 1] = -bg[i] / v;
        g[i + 1][0] = g[0][i + 1];
        for j in 0..3 {
            g[i + 1][j + 1] = beta.get(i, j) / v;
        }
    }
    Ok(g)
}

/// Metric from the adapted coframe form `V^2 th0^2 + Q_ij th_i th_j`,
/// `th_i = dx_i - gamma_i dx0`, expanded in coordinates.
pub fn metric_coframe<T: Real>(v: T, q: &SymMat3<T>, gamma: &Vec3<T>) -> [[T; 4]; 4] {
    let qg = q.mul_vec(gamma);
    let mut g = [[T::zero(); 4]; 4];
    g[0][0] = v * v + gamma.dot(&qg);
    for i in 0..3 {
        g[0][i + 1] = -qg[i];
        g[i + 1][0] = -qg[i];
        for j in 0..3 {
            g[i + 1][j + 1] = q.get(i, j);
        }
    }
    g
}

/// Pointwise geometry from `alpha` and its `x0`-derivative.
pub fn geometry_at<T: Real>(alpha: &Mat3<T>, alpha_prime: &Mat3<T>) -> Result<GeometrySample<T>> {
    let (beta, gamma) = split(alpha);
    let (beta_prime, _) = split(alpha_prime);
    let (q, v) = q_and_v(&beta)?;
    let (qp, _) = q_prime(&beta, &beta_prime)?;
    let metric = metric_coordinate(alpha)?;
    let tau = qp.to_mat3().scale(T::one() / v);
    let scalar_torsion = scalar_torsion(&q, &qp, v)?;
    Ok(GeometrySample { alpha: *alpha, v, q, q_prime: qp, gamma, metric, tau, scalar_torsion, mu: v })
}

/// Geometry at every node, differentiating with the field's grid scheme.
pub fn geometry_field<T: Real>(alpha: &Mat3Field<T>) -> Result<Vec<GeometrySample<T>>> {
    let dalpha = alpha.deriv(Order::First);
    alpha
        .samples()
        .iter()
        .zip(dalpha.samples())
        .map(|(a, da)| geometry_at(a, da))
        .collect()
}

/// Whether `sym(alpha)` is positive definite at every node, with the
/// smallest eigenvalue found as margin.
pub fn is_hypersymplectic<T: Real>(alpha: &Mat3Field<T>) -> (bool, T) {
    let margin = alpha
        .samples()
        .iter()
        .map(|a| split(a).0.eigenvalues()[0])
        .fold(T::infinity(), T::min);
    (margin > T::zero(), margin)
}

/// Laplacian of a T3-invariant function, `V^{-1}(V^{-1} f')'`.
pub fn invariant_laplacian<T: Real>(f: &ScalarField<T>, v: &ScalarField<T>) -> Result<ScalarField<T>> {
    f.grid().check_same(v.grid())?;
    if !(v.min() > T::zero()) {
        return Err(FlowError::not_pd("volume factor V must be positive"));
    }
    let flux = f.deriv(Order::First).zip_map(v, |df, vv| *df / *vv)?;
    flux.deriv(Order::First).zip_map(v, |d, vv| *d / *vv)
}

/// A T3-invariant triple before normalization: `a` holds the `dx0 ^ dx_j`
/// coefficients (row `i` for `omega_i`), `eta[i]` the constant skew
/// coefficients of `dx_p ^ dx_q`.
#[derive(Debug, Clone)]
pub struct InvariantTripleRaw<T: Real> {
    pub a: Mat3Field<T>,
    eta: [Mat3<T>; 3],
}

impl<T: Real> InvariantTripleRaw<T> {
    pub fn new(a: Mat3Field<T>, eta: [Mat3<T>; 3]) -> Result<Self> {
        for (i, e) in eta.iter().enumerate() {
            if *e + e.transpose() != Mat3::zero() {
                return Err(FlowError::ConstraintViolated(format!("eta_{} is not skew", i + 1)));
            }
        }
        Ok(InvariantTripleRaw { a, eta })
    }

    /// The normal-form fibre part `eta_i = (1/2) eps_ipq`.
    pub fn standard_eta() -> [Mat3<T>; 3] {
        let half = T::lit(0.5);
        std::array::from_fn(|i| {
            let mut axial = Vec3::zero();
            axial.0[i] = half;
            axial.skew()
        })
    }

    pub fn eta(&self) -> &[Mat3<T>; 3] {
        &self.eta
    }
}

/// Constant change of basis `omega~_i = A_ij omega_j` bringing a triple into
/// normal form, and the resulting coefficient field `alpha = A a`.
pub fn normalize_triple<T: Real>(raw: &InvariantTripleRaw<T>) -> Result<(Mat3<T>, Mat3Field<T>)> {
    // rows of e are the eta_i as vectors (eta_23, eta_31, eta_12)
    let e = Mat3 { m: raw.eta.map(|m| m.axial().0) };
    let scale = e.frobenius();
    let det = e.det();
    if !(det.abs() > T::epsilon() * T::lit(64.0) * scale * scale * scale) {
        return Err(FlowError::NotAFrame);
    }
    let a = e.inverse().ok_or(FlowError::NotAFrame)?.scale(T::lit(0.5));
    let alpha = raw.a.map(|m| a * *m);
    Ok((a, alpha))
}

/// One component of a 3-form on `T3 x T4` in the coordinate order
/// `(t1, t2, t3, x0, x1, x2, x3)`, indices strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormComponent<T> {
    pub indices: [usize; 3],
    pub coeff: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Export<T> {
    pub phi: Vec<FormComponent<T>>,
    /// `Q_ij dt^i dt^j (+) g`, same coordinate order as `phi`.
    pub g7: [[T; 7]; 7],
}

/// The closed G2 3-form `dt123 - dt^i ^ omega_i` and its metric.
pub fn export_g2<T: Real>(sample: &GeometrySample<T>) -> G2Export<T> {
    let mut phi = vec![FormComponent { indices: [0, 1, 2], coeff: T::one() }];
    for i in 0..3 {
        for j in 0..3 {
            let c = sample.alpha.m[i][j];
            if c != T::zero() {
                phi.push(FormComponent { indices: [i, 3, 4 + j], coeff: -c });
            }
        }
    }
    // -dt^i ^ dx_jk for cyclic (i j k), written with increasing indices
    phi.push(FormComponent { indices: [0, 5, 6], coeff: -T::one() });
    phi.push(FormComponent { indices: [1, 4, 6], coeff: T::one() });
    phi.push(FormComponent { indices: [2, 4, 5], coeff: -T::one() });

    let mut g7 = [[T::zero(); 7]; 7];
    for i in 0..3 {
        for j in 0..3 {
            g7[i][j] = sample.q.get(i, j);
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            g7[3 + a][3 + b] = sample.metric[a][b];
        }
    }
    G2Export { phi, g7 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::CircleGrid;

    type M = Mat3<f64>;

    #[test]
    fn constant_triple_is_flat_point() {
        let s = geometry_at(&M::diag(1.0, 2.0, 3.0), &M::zero()).unwrap();
        let c = 6f64.cbrt();
        assert!((s.v - c).abs() < 1e-15);
        assert!((s.q.s11 - 1.0 / c).abs() < 1e-15);
        assert!((s.q.s33 - 3.0 / c).abs() < 1e-15);
        assert!((s.q.det() - 1.0).abs() < 1e-14);
        assert_eq!(s.scalar_torsion, 0.0);
        assert_eq!(s.tau, M::zero());
        assert_eq!(s.mu, s.v);
    }

    #[test]
    fn cosine_slice_torsion() {
        // x0 = pi/2 slice of diag(1 + cos(x0)/2, 1, 1)
        let s = geometry_at(&M::identity(), &M::diag(-0.5, 0.0, 0.0)).unwrap();
        assert!((s.q_prime.s11 + 1.0 / 3.0).abs() < 1e-15);
        assert!((s.q_prime.s22 - 1.0 / 6.0).abs() < 1e-15);
        assert!((s.scalar_torsion - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn skewed_metric_coefficients() {
        let alpha = M::identity() + Vec3::new(1.0, 0.0, 0.0).skew();
        let s = geometry_at(&alpha, &M::zero()).unwrap();
        assert_eq!(s.metric[0][0], 2.0);
        assert_eq!(s.metric[0][1], -1.0);
        assert_eq!(s.metric[1][0], -1.0);
        assert_eq!(s.metric[1][1], 1.0);
        let cf = metric_coframe(s.v, &s.q, &s.gamma);
        assert_eq!(cf, s.metric);
    }

    #[test]
    fn symmetric_alpha_gives_block_metric() {
        let alpha = M::from_f64([[2.0, 0.3, 0.1], [0.3, 1.0, -0.2], [0.1, -0.2, 1.5]]);
        let s = geometry_at(&alpha, &M::zero()).unwrap();
        assert!((s.metric[0][0] - s.v * s.v).abs() < 1e-14);
        for i in 1..4 {
            assert_eq!(s.metric[0][i], 0.0);
        }
    }

    #[test]
    fn rejects_indefinite_beta() {
        let alpha = M::diag(-1.0, 1.0, 1.0);
        assert!(matches!(
            geometry_at(&alpha, &M::zero()),
            Err(FlowError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn hypersymplectic_checks() {
        let g = CircleGrid::<f64>::new(32).unwrap();
        let flat = Mat3Field::constant(&g, M::identity());
        assert_eq!(is_hypersymplectic(&flat), (true, 1.0));
        let degenerate = Mat3Field::from_fn(&g, |x: f64| M::diag(1.0 + x.cos(), 1.0, 1.0));
        let (ok, margin) = is_hypersymplectic(&degenerate);
        assert!(!ok);
        assert!(margin.abs() < 1e-15);
        let skewed = Mat3Field::constant(&g, M::identity().scale(0.1) + Vec3::new(5.0, 0.0, 0.0).skew());
        let (ok, margin) = is_hypersymplectic(&skewed);
        assert!(ok);
        assert!((margin - 0.1).abs() < 1e-15);
    }

    #[test]
    fn laplacian_examples() {
        let g = CircleGrid::<f64>::new(64).unwrap();
        let f = ScalarField::from_fn(&g, f64::cos);
        let one = ScalarField::constant(&g, 1.0);
        let two = ScalarField::constant(&g, 2.0);
        let want = ScalarField::from_fn(&g, |x: f64| -x.cos());
        let d = invariant_laplacian(&f, &one).unwrap().sup_distance(&want).unwrap();
        assert!(d < 1e-12, "{d}");
        let want = ScalarField::from_fn(&g, |x: f64| -x.cos() / 4.0);
        assert!(invariant_laplacian(&f, &two).unwrap().sup_distance(&want).unwrap() < 1e-12);
        let v = ScalarField::from_fn(&g, |x: f64| 1.0 + 0.5 * x.cos());
        let s = ScalarField::from_fn(&g, f64::sin);
        let lap = invariant_laplacian(&s, &v).unwrap();
        assert!(lap.samples()[0].abs() < 1e-12);
    }

    #[test]
    fn laplacian_errors() {
        let g = CircleGrid::<f64>::new(16).unwrap();
        let f = ScalarField::from_fn(&g, f64::cos);
        let bad = ScalarField::from_fn(&g, f64::cos);
        assert!(matches!(
            invariant_laplacian(&f, &bad),
            Err(FlowError::NotPositiveDefinite { .. })
        ));
        let other = ScalarField::constant(&CircleGrid::new(32).unwrap(), 1.0);
        assert!(matches!(invariant_laplacian(&f, &other), Err(FlowError::GridMismatch { .. })));
    }

    #[test]
    fn normalize_standard_is_identity() {
        let g = CircleGrid::<f64>::new(16).unwrap();
        let a = Mat3Field::from_fn(&g, |x: f64| M::diag(1.0 + 0.2 * x.sin(), 1.0, 2.0));
        let raw = InvariantTripleRaw::new(a.clone(), InvariantTripleRaw::standard_eta()).unwrap();
        let (m, alpha) = normalize_triple(&raw).unwrap();
        assert_eq!(m, M::identity());
        assert_eq!(alpha, a);
    }

    #[test]
    fn normalize_swapped_components() {
        let g = CircleGrid::<f64>::new(16).unwrap();
        let a = Mat3Field::from_fn(&g, |x: f64| M::diag(1.0 + 0.2 * x.sin(), 1.0, 2.0));
        let [e1, e2, e3] = InvariantTripleRaw::<f64>::standard_eta();
        let raw = InvariantTripleRaw::new(a, [e2, e1, e3]).unwrap();
        let (m, _) = normalize_triple(&raw).unwrap();
        let perm = M::from_f64([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(m, perm);
    }

    #[test]
    fn normalize_dependent_eta() {
        let g = CircleGrid::<f64>::new(16).unwrap();
        let a = Mat3Field::constant(&g, M::identity());
        let [e1, _, e3] = InvariantTripleRaw::<f64>::standard_eta();
        let raw = InvariantTripleRaw::new(a, [e1, e1, e3]).unwrap();
        assert!(matches!(normalize_triple(&raw), Err(FlowError::NotAFrame)));
    }

    #[test]
    fn eta_must_be_skew() {
        let g = CircleGrid::<f64>::new(16).unwrap();
        let a = Mat3Field::constant(&g, M::identity());
        let [e1, e2, _] = InvariantTripleRaw::<f64>::standard_eta();
        assert!(InvariantTripleRaw::new(a, [e1, e2, M::identity()]).is_err());
    }

    #[test]
    fn g2_export_flat() {
        let s = geometry_at(&M::identity(), &M::zero()).unwrap();
        let ex = export_g2(&s);
        for (i, row) in ex.g7.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(ex.phi.len(), 7);
    }

    #[test]
    fn g2_export_reads_alpha() {
        let alpha = M::from_f64([[1.5, 0.2, 0.0], [0.1, 2.0, 0.0], [0.0, 0.0, 3.0]]);
        let s = geometry_at(&alpha, &M::zero()).unwrap();
        let ex = export_g2(&s);
        let c = ex.phi.iter().find(|c| c.indices == [0, 3, 4]).unwrap();
        assert_eq!(c.coeff, -1.5);
        let c = ex.phi.iter().find(|c| c.indices == [1, 3, 4]).unwrap();
        assert_eq!(c.coeff, -0.1);
        assert!(ex.phi.iter().all(|c| c.indices != [0, 3, 6]));
        let diag = geometry_at(&M::diag(1.0, 2.0, 3.0), &M::zero()).unwrap();
        let ex = export_g2(&diag);
        let c = 6f64.cbrt();
        assert!((ex.g7[2][2] - 3.0 / c).abs() < 1e-15);
        assert!((ex.g7[3][3] - c * c).abs() < 1e-14);
        assert!((ex.g7[6][6] - 3.0 / c).abs() < 1e-15);
    }
}

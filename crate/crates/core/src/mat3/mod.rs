//! Pointwise 3x3 coefficient algebra.
//!
//! `Mat3` holds a general coefficient matrix (the normal-form matrix of a
//! triple), `SymMat3` its symmetric part and all the derived symmetric
//! quantities, and `Vec3` the axial vector of a skew matrix under the
//! convention `v = (s23, s31, s12)`.

mod lemmas;

pub mod fuzz;

pub use lemmas::{sos_certificate, trace_gap, trace_gap_projected, trace_gap_reduced, trace_gap_unchecked};

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use crate::error::{FlowError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T>(pub [T; 3]);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

/// Symmetric 3x3 matrix stored by its six independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat3<T> {
    pub s11: T,
    pub s22: T,
    pub s33: T,
    pub s12: T,
    pub s13: T,
    pub s23: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Vec3([a, b, c])
    }

    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    pub fn dot(&self, o: &Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// The skew matrix whose axial vector is `self`.
    pub fn skew(&self) -> Mat3<T> {
        let [a, b, c] = self.0;
        let z = T::zero();
        Mat3 { m: [[z, c, -b], [-c, z, a], [b, -a, z]] }
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Real> Mat3<T> {
    pub fn new(m: [[T; 3]; 3]) -> Self {
        Mat3 { m }
    }

    pub fn zero() -> Self {
        Mat3 { m: [[T::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let mut m = Self::zero();
        m.m[0][0] = a;
        m.m[1][1] = b;
        m.m[2][2] = c;
        m
    }

    pub fn from_f64(rows: [[f64; 3]; 3]) -> Self {
        Mat3 { m: rows.map(|r| r.map(T::lit)) }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        let m = &self.m;
        let cof = |a: usize, b: usize, c: usize, e: usize| m[a][b] * m[c][e] - m[a][e] * m[c][b];
        let adj = [
            [cof(1, 1, 2, 2), -cof(0, 1, 2, 2), cof(0, 1, 1, 2)],
            [-cof(1, 0, 2, 2), cof(0, 0, 2, 2), -cof(0, 0, 1, 2)],
            [cof(1, 0, 2, 1), -cof(0, 0, 2, 1), cof(0, 0, 1, 1)],
        ];
        Some(Mat3 { m: adj.map(|r| r.map(|x| x / d)) })
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let mut out = [T::zero(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.m[i][0] * v.0[0] + self.m[i][1] * v.0[1] + self.m[i][2] * v.0[2];
        }
        Vec3(out)
    }

    pub fn scale(&self, s: T) -> Self {
        Mat3 { m: self.m.map(|r| r.map(|x| x * s)) }
    }

    pub fn norm_inf(&self) -> T {
        self.m.iter().flatten().fold(T::zero(), |a, &x| a.max(x.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.m.iter().flatten().fold(T::zero(), |a, &x| a + x * x).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }

    /// Symmetric part and axial vector of the skew part.
    pub fn split(&self) -> (SymMat3<T>, Vec3<T>) {
        split(self)
    }

    /// Axial vector `(m23, m31, m12)` of a matrix assumed skew.
    pub fn axial(&self) -> Vec3<T> {
        Vec3([self.m[1][2], self.m[2][0], self.m[0][1]])
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Mat3<T>;
    fn mul(self, o: Mat3<T>) -> Mat3<T> {
        let mut p = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                p.m[i][j] = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        p
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Mat3<T>;
    fn add(self, o: Mat3<T>) -> Mat3<T> {
        let mut p = self;
        for i in 0..3 {
            for j in 0..3 {
                p.m[i][j] = p.m[i][j] + o.m[i][j];
            }
        }
        p
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Mat3<T>;
    fn sub(self, o: Mat3<T>) -> Mat3<T> {
        self + o.scale(-T::one())
    }
}

/// Splits `M` into `beta = (M + M^T)/2` and the axial vector of `(M - M^T)/2`.
///
/// The skew component is taken as the remainder `M_ij - beta_ij` of the upper
/// entry. Diagonals always come back exactly from [`compose`]; an
/// off-diagonal pair comes back exactly when `M_ij + M_ji` is representable
/// and otherwise within one unit of `eps * max(|M_ij|, |M_ji|)`.
pub fn split<T: Real>(m: &Mat3<T>) -> (SymMat3<T>, Vec3<T>) {
    let half = T::lit(0.5);
    let a = &m.m;
    let beta = SymMat3 {
        s11: a[0][0],
        s22: a[1][1],
        s33: a[2][2],
        s12: (a[0][1] + a[1][0]) * half,
        s13: (a[0][2] + a[2][0]) * half,
        s23: (a[1][2] + a[2][1]) * half,
    };
    // Taking the skew part as the remainder keeps beta + skew == M bit-for-bit
    // in the upper triangle; the lower triangle follows by symmetry of the sum.
    let gamma = Vec3([a[1][2] - beta.s23, a[2][0] - beta.s13, a[0][1] - beta.s12]);
    (beta, gamma)
}

/// Assembles `beta + skew(gamma)`.
pub fn compose<T: Real>(beta: &SymMat3<T>, gamma: &Vec3<T>) -> Mat3<T> {
    let [g1, g2, g3] = gamma.0;
    Mat3 {
        m: [
            [beta.s11, beta.s12 + g3, beta.s13 - g2],
            [beta.s12 - g3, beta.s22, beta.s23 + g1],
            [beta.s13 + g2, beta.s23 - g1, beta.s33],
        ],
    }
}

/// Both sides of `det M = det beta + gamma^T beta gamma`.
pub fn det_split<T: Real>(m: &Mat3<T>) -> (T, T) {
    let (beta, gamma) = split(m);
    let lhs = m.det();
    let rhs = beta.det() + gamma.dot(&beta.mul_vec(&gamma));
    (lhs, rhs)
}

/// `tr(alpha^{-1} b alpha^{-1} c)`, the symmetric-space metric at `alpha`.
pub fn inner_alpha<T: Real>(alpha: &SymMat3<T>, b: &SymMat3<T>, c: &SymMat3<T>) -> Result<T> {
    let inv = alpha.inverse_pd()?;
    Ok(inner_with_inverse(&inv, b, c))
}

/// `tr(ai b ai c)` for a precomputed inverse `ai`.
pub fn inner_with_inverse<T: Real>(ai: &SymMat3<T>, b: &SymMat3<T>, c: &SymMat3<T>) -> T {
    ((*ai * *b) * (*ai * *c)).trace()
}

impl<T: Real> SymMat3<T> {
    pub fn new(s11: T, s22: T, s33: T, s12: T, s13: T, s23: T) -> Self {
        SymMat3 { s11, s22, s33, s12, s13, s23 }
    }

    pub fn zero() -> Self {
        Self::diag(T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        SymMat3 { s11: a, s22: b, s33: c, s12: T::zero(), s13: T::zero(), s23: T::zero() }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.s11,
            (1, 1) => self.s22,
            (2, 2) => self.s33,
            (0, 1) => self.s12,
            (0, 2) => self.s13,
            (1, 2) => self.s23,
            _ => panic!("index ({i},{j}) out of range"),
        }
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.s11, self.s22, self.s33, self.s12, self.s13, self.s23]
    }

    pub fn from_array(a: [T; 6]) -> Self {
        SymMat3 { s11: a[0], s22: a[1], s33: a[2], s12: a[3], s13: a[4], s23: a[5] }
    }

    pub fn to_mat3(&self) -> Mat3<T> {
        Mat3 {
            m: [
                [self.s11, self.s12, self.s13],
                [self.s12, self.s22, self.s23],
                [self.s13, self.s23, self.s33],
            ],
        }
    }

    /// Symmetrizes an arbitrary matrix.
    pub fn from_mat3(m: &Mat3<T>) -> Self {
        split(m).0
    }

    pub fn trace(&self) -> T {
        self.s11 + self.s22 + self.s33
    }

    pub fn det(&self) -> T {
        self.s11 * (self.s22 * self.s33 - self.s23 * self.s23)
            - self.s12 * (self.s12 * self.s33 - self.s23 * self.s13)
            + self.s13 * (self.s12 * self.s23 - self.s22 * self.s13)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_array(self.to_array().map(|x| x * s))
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        self.to_mat3().mul_vec(v)
    }

    pub fn norm_inf(&self) -> T {
        self.to_array().iter().fold(T::zero(), |a, &x| a.max(x.abs()))
    }

    /// Frobenius norm of the full matrix (off-diagonals counted twice).
    pub fn frobenius(&self) -> T {
        let d = self.s11 * self.s11 + self.s22 * self.s22 + self.s33 * self.s33;
        let o = self.s12 * self.s12 + self.s13 * self.s13 + self.s23 * self.s23;
        (d + o + o).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Symmetric factorization `L D L^T`; returns the pivots or fails on a
    /// non-positive one.
    pub fn ldl_pivots(&self) -> Result<[T; 3]> {
        let d1 = self.s11;
        if !(d1 > T::zero()) {
            return Err(FlowError::not_pd("pivot 1"));
        }
        let l21 = self.s12 / d1;
        let l31 = self.s13 / d1;
        let d2 = self.s22 - l21 * self.s12;
        if !(d2 > T::zero()) {
            return Err(FlowError::not_pd("pivot 2"));
        }
        let l32 = (self.s23 - l31 * self.s12) / d2;
        let d3 = self.s33 - l31 * self.s13 - l32 * l32 * d2;
        if !(d3 > T::zero()) {
            return Err(FlowError::not_pd("pivot 3"));
        }
        Ok([d1, d2, d3])
    }

    pub fn is_positive_definite(&self) -> bool {
        self.ldl_pivots().is_ok()
    }

    /// Inverse of a positive-definite matrix.
    pub fn inverse_pd(&self) -> Result<Self> {
        self.ldl_pivots()?;
        self.inverse_unchecked().ok_or_else(|| FlowError::not_pd("singular"))
    }

    pub fn inverse_unchecked(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        let c11 = self.s22 * self.s33 - self.s23 * self.s23;
        let c22 = self.s11 * self.s33 - self.s13 * self.s13;
        let c33 = self.s11 * self.s22 - self.s12 * self.s12;
        let c12 = self.s13 * self.s23 - self.s12 * self.s33;
        let c13 = self.s12 * self.s23 - self.s13 * self.s22;
        let c23 = self.s12 * self.s13 - self.s11 * self.s23;
        Some(SymMat3::new(c11, c22, c33, c12, c13, c23).scale(T::one() / d))
    }

    /// Eigenvalues (ascending) and eigenvectors (columns) by cyclic Jacobi.
    pub fn eigen(&self) -> ([T; 3], Mat3<T>) {
        let mut a = self.to_mat3().m;
        let mut v = Mat3::<T>::identity().m;
        let scale = self.frobenius();
        if scale == T::zero() {
            return ([T::zero(); 3], Mat3 { m: v });
        }
        let tol = T::epsilon() * scale * T::lit(1e-2);
        for _sweep in 0..64 {
            let off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
            if off <= tol {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..3 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..3 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
        let vals = idx.map(|i| a[i][i]);
        let mut vecs = Mat3::<T>::zero();
        for (col, &i) in idx.iter().enumerate() {
            for r in 0..3 {
                vecs.m[r][col] = v[r][i];
            }
        }
        (vals, Mat3 { m: vecs.m })
    }

    pub fn eigenvalues(&self) -> [T; 3] {
        self.eigen().0
    }

    /// Applies `f` to the spectrum: `U diag(f(l)) U^T`.
    pub fn spectral_map(&self, f: impl Fn(T) -> T) -> Self {
        let (vals, u) = self.eigen();
        let mut out = Self::zero();
        let fv = vals.map(&f);
        let mut arr = [[T::zero(); 3]; 3];
        for (i, row) in arr.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).fold(T::zero(), |acc, k| acc + u.m[i][k] * fv[k] * u.m[j][k]);
            }
        }
        out.s11 = arr[0][0];
        out.s22 = arr[1][1];
        out.s33 = arr[2][2];
        out.s12 = arr[0][1];
        out.s13 = arr[0][2];
        out.s23 = arr[1][2];
        out
    }

    /// `Q^{-1/2}` for a positive-definite `Q`.
    pub fn inv_sqrt(&self) -> Result<Self> {
        self.ldl_pivots()?;
        Ok(self.spectral_map(|l| T::one() / l.sqrt()))
    }

    /// Symmetric product `a b a` for symmetric `a`, `b`.
    pub fn sandwich(&self, b: &Self) -> Self {
        SymMat3::from_mat3(&(self.to_mat3() * b.to_mat3() * self.to_mat3()))
    }
}

impl<T: Real> Add for SymMat3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl<T: Real> AddAssign for SymMat3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for SymMat3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] - b[i]))
    }
}

impl<T: Real> Neg for SymMat3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

/// Symmetric times symmetric is a general matrix.
impl<T: Real> Mul for SymMat3<T> {
    type Output = Mat3<T>;
    fn mul(self, o: Self) -> Mat3<T> {
        self.to_mat3() * o.to_mat3()
    }
}

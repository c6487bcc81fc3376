//! The trace inequality behind the Riccati decay of the scalar torsion, and
//! its sum-of-squares certificate in the diagonal case.

use super::{SymMat3, Vec3};
use crate::error::{FlowError, Result};
use crate::scalar::Real;

fn constraint_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(4096.0))
}

fn tr<T: Real>(m: &super::Mat3<T>) -> T {
    m.trace()
}

/// `RHS - LHS` of the trace inequality for symmetric `A`, `B` with
/// `tr B = 0` and `tr A = tr B^2`. The inequality asserts this is `>= 0`.
pub fn trace_gap<T: Real>(a: &SymMat3<T>, b: &SymMat3<T>) -> Result<T> {
    let tol = constraint_tol::<T>();
    let bn = b.frobenius();
    if b.trace().abs() > tol * bn {
        return Err(FlowError::ConstraintViolated(format!(
            "tr B = {:e} is not zero",
            b.trace()
        )));
    }
    let b2 = (*b * *b).trace();
    if (a.trace() - b2).abs() > tol * (a.frobenius() + bn * bn) {
        return Err(FlowError::ConstraintViolated(format!(
            "tr A - tr B^2 = {:e}",
            a.trace() - b2
        )));
    }
    Ok(trace_gap_unchecked(a, b))
}

/// Same polynomial as [`trace_gap`] without the constraint checks.
pub fn trace_gap_unchecked<T: Real>(a: &SymMat3<T>, b: &SymMat3<T>) -> T {
    let bm = b.to_mat3();
    let am = a.to_mat3();
    let bb = bm * bm;
    let tb2 = tr(&bb);
    let tb3 = tr(&(bb * bm));
    let tb4 = tr(&(bb * bb));
    let tab = tr(&(am * bm));
    let tab2 = tr(&(am * bb));
    let ta2 = tr(&(am * am));
    let sixth = T::one() / T::lit(6.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    sixth * tb2 * tb2 * tb2 + ta2 * tb2 + three * tb4 * tb2 + four * tab * tb3
        - tab * tab
        - three * tb3 * tb3
        - four * tab2 * tb2
}

/// [`trace_gap`] after projecting `(A, B)` onto the constraint set:
/// `B` loses its trace and `A` is shifted by a multiple of the identity so
/// that `tr A = tr B^2`. Meant for derivative data where the constraints
/// hold only to discretization accuracy.
pub fn trace_gap_projected<T: Real>(a: &SymMat3<T>, b: &SymMat3<T>) -> T {
    let third = T::one() / T::lit(3.0);
    let id = SymMat3::identity();
    let bp = *b - id.scale(b.trace() * third);
    let ap = *a + id.scale(((bp * bp).trace() - a.trace()) * third);
    trace_gap_unchecked(&ap, &bp)
}

/// The inequality after the substitution `A~ = A - B^2`, for trace-free
/// `A~` and `B`. Agrees with [`trace_gap`] on `(A~ + B^2, B)`.
pub fn trace_gap_reduced<T: Real>(at: &SymMat3<T>, b: &SymMat3<T>) -> Result<T> {
    let tol = constraint_tol::<T>();
    if b.trace().abs() > tol * b.frobenius() || at.trace().abs() > tol * at.frobenius() {
        return Err(FlowError::ConstraintViolated("A~ and B must be trace-free".into()));
    }
    let am = at.to_mat3();
    let bm = b.to_mat3();
    let bb = bm * bm;
    let tb2 = tr(&bb);
    let tb3 = tr(&(bb * bm));
    let tab = tr(&(am * bm));
    let tab2 = tr(&(am * bb));
    let ta2 = tr(&(am * am));
    let two = T::lit(2.0);
    Ok(T::one() / T::lit(6.0) * tb2 * tb2 * tb2 + ta2 * tb2
        - tab * tab
        + two * tab * tb3
        - two * tab2 * tb2)
}

/// Direct and sum-of-squares evaluations of the diagonal inequality for
/// `A~_d = diag(x)`, `B = diag(y)` with `sum x = sum y = 0`.
pub fn sos_certificate<T: Real>(x: &Vec3<T>, y: &Vec3<T>) -> Result<(T, T)> {
    let tol = constraint_tol::<T>();
    let sx: T = x.0.iter().copied().fold(T::zero(), |a, v| a + v);
    let sy: T = y.0.iter().copied().fold(T::zero(), |a, v| a + v);
    if sx.abs() > tol * (T::one() + x.norm_inf()) || sy.abs() > tol * (T::one() + y.norm_inf()) {
        return Err(FlowError::ConstraintViolated("x and y must sum to zero".into()));
    }
    let sum = |f: &dyn Fn(usize) -> T| (0..3).fold(T::zero(), |a, i| a + f(i));
    let (xs, ys) = (x.0, y.0);
    let sy2 = sum(&|i| ys[i] * ys[i]);
    let sy3 = sum(&|i| ys[i] * ys[i] * ys[i]);
    let sx2 = sum(&|i| xs[i] * xs[i]);
    let sxy = sum(&|i| xs[i] * ys[i]);
    let sxy2 = sum(&|i| xs[i] * ys[i] * ys[i]);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let direct = sx2 * sy2 + sy2 * sy2 * sy2 / T::lit(6.0) - sxy * sxy + two * sxy * sy3
        - two * sxy2 * sy2;
    let [x1, x2, _] = xs;
    let [y1, y2, _] = ys;
    let inner = (x1 * y2 - x2 * y1) - (y1 + two * y2) * (two * y1 + y2) * (y1 - y2) / three;
    let tail = y1 * y2 * (y1 + y2);
    let sos = three * inner * inner + T::lit(9.0) * tail * tail;
    Ok((direct, sos))
}

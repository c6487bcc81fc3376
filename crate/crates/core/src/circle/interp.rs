//! Evaluation of grid functions off the grid.

use rustfft::num_complex::Complex;

use super::ScalarField;
use crate::error::{FlowError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterpMethod {
    #[default]
    Trigonometric,
    PeriodicCubic,
}

fn wrap<T: Real>(x: T) -> T {
    let tau = T::two_pi();
    let r = x - (x / tau).floor() * tau;
    if r >= tau {
        r - tau
    } else {
        r
    }
}

/// The unique trigonometric polynomial of degree `N/2` through the samples,
/// with the Nyquist term taken as a pure cosine.
#[derive(Debug, Clone)]
pub struct TrigInterpolant<T: Real> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> TrigInterpolant<T> {
    pub fn new(f: &ScalarField<T>) -> Self {
        let n = f.len();
        let raw = f.grid().dft(f.samples());
        let inv_n = T::one() / T::from_usize_lossy(n);
        let coeffs = raw[..=n / 2].iter().map(|c| *c * inv_n).collect();
        TrigInterpolant { coeffs }
    }

    pub fn eval(&self, x: T) -> T {
        let half = self.coeffs.len() - 1;
        let two = T::lit(2.0);
        let mut acc = self.coeffs[0].re;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let (s, co) = (T::from_usize_lossy(k) * x).sin_cos();
            let term = c.re * co - c.im * s;
            acc = acc + if k == half { term } else { two * term };
        }
        acc
    }

    /// Derivative of the interpolant (Nyquist cosine excluded).
    pub fn eval_deriv(&self, x: T) -> T {
        let half = self.coeffs.len() - 1;
        let two = T::lit(2.0);
        let mut acc = T::zero();
        for (k, c) in self.coeffs.iter().enumerate().skip(1).take(half.saturating_sub(1)) {
            let kf = T::from_usize_lossy(k);
            let (s, co) = (kf * x).sin_cos();
            acc = acc - two * kf * (c.re * s + c.im * co);
        }
        acc
    }
}

/// Periodic cubic spline through uniformly spaced samples.
#[derive(Debug, Clone)]
pub struct PeriodicCubic<T: Real> {
    h: T,
    values: Vec<T>,
    second: Vec<T>,
}

impl<T: Real> PeriodicCubic<T> {
    pub fn new(f: &ScalarField<T>) -> Self {
        let n = f.len();
        let h = f.grid().spacing();
        let y = f.samples();
        let six_h2 = T::lit(6.0) / (h * h);
        let rhs: Vec<T> = (0..n)
            .map(|i| (y[(i + 1) % n] - T::lit(2.0) * y[i] + y[(i + n - 1) % n]) * six_h2)
            .collect();
        let second = solve_cyclic_141(&rhs);
        PeriodicCubic { h, values: y.to_vec(), second }
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.values.len();
        let s = wrap(x) / self.h;
        let i = (s.floor().to_usize().unwrap_or(0)).min(n - 1);
        let t = s - T::from_usize_lossy(i);
        let j = (i + 1) % n;
        let (a, b) = (T::one() - t, t);
        let h2 = self.h * self.h / T::lit(6.0);
        a * self.values[i]
            + b * self.values[j]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[j]) * h2
    }
}

/// Solves the cyclic system `m[i-1] + 4 m[i] + m[i+1] = r[i]`.
fn solve_cyclic_141<T: Real>(r: &[T]) -> Vec<T> {
    let n = r.len();
    // Sherman-Morrison on the tridiagonal part with corner corrections.
    let four = T::lit(4.0);
    let gamma = -four;
    let mut diag = vec![four; n];
    diag[0] = four - gamma;
    diag[n - 1] = four - T::one() / gamma;
    let thomas = |rhs: &[T]| -> Vec<T> {
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        c[0] = T::one() / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - c[i - 1];
            c[i] = T::one() / m;
            d[i] = (rhs[i] - d[i - 1]) / m;
        }
        let mut x = vec![T::zero(); n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    };
    let x = thomas(r);
    let mut u = vec![T::zero(); n];
    u[0] = gamma;
    u[n - 1] = T::one();
    let z = thomas(&u);
    let vx = x[0] + x[n - 1] / gamma;
    let vz = z[0] + z[n - 1] / gamma;
    let f = vx / (T::one() + vz);
    x.iter().zip(&z).map(|(&a, &b)| a - f * b).collect()
}

/// Monotone piecewise-cubic Hermite interpolant of a strictly increasing
/// periodic lift: knots `(s_k, u_k)` on `[0, 2 pi)` with
/// `u(s + 2 pi) = u(s) + 2 pi`.
#[derive(Debug, Clone)]
pub struct MonotoneCubic<T: Real> {
    knots: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    /// `knots` must start at 0, increase strictly and stay below `2 pi`;
    /// `values` must increase strictly with total rise below `2 pi`.
    pub fn new(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        let n = knots.len();
        let tau = T::two_pi();
        if n < 2 || values.len() != n {
            return Err(FlowError::GridMismatch { expected: n, found: values.len() });
        }
        let ks = |i: usize| if i < n { knots[i] } else { knots[i - n] + tau };
        let vs = |i: usize| if i < n { values[i] } else { values[i - n] + tau };
        let secant: Vec<T> = (0..n)
            .map(|i| (vs(i + 1) - vs(i)) / (ks(i + 1) - ks(i)))
            .collect();
        let width: Vec<T> = (0..n).map(|i| ks(i + 1) - ks(i)).collect();
        if let Some(i) = (0..n).find(|&i| !(width[i] > T::zero()) || !(secant[i] > T::zero())) {
            return Err(FlowError::NonMonotone { node: i });
        }
        let slopes = (0..n)
            .map(|i| {
                let p = (i + n - 1) % n;
                let (h0, h1) = (width[p], width[i]);
                let (d0, d1) = (secant[p], secant[i]);
                let w1 = T::lit(2.0) * h1 + h0;
                let w2 = h1 + T::lit(2.0) * h0;
                (w1 + w2) / (w1 / d0 + w2 / d1)
            })
            .collect();
        Ok(MonotoneCubic { knots, values, slopes })
    }

    /// Locates `s` (any real) and returns the lifted value.
    pub fn eval(&self, s: T) -> T {
        let tau = T::two_pi();
        let turns = (s / tau).floor();
        let r = wrap(s);
        let n = self.knots.len();
        let i = match self.knots.partition_point(|&k| k <= r) {
            0 => 0,
            p => p - 1,
        };
        let (s0, u0) = (self.knots[i], self.values[i]);
        let (s1, u1) = if i + 1 < n {
            (self.knots[i + 1], self.values[i + 1])
        } else {
            (self.knots[0] + tau, self.values[0] + tau)
        };
        let (m0, m1) = (self.slopes[i], self.slopes[(i + 1) % n]);
        let h = s1 - s0;
        let t = (r - s0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * u0 + h10 * h * m0 + h01 * u1 + h11 * h * m1 + turns * tau
    }

    /// Bracketing knot values around `s` in the lifted coordinate.
    pub fn bracket(&self, s: T) -> (T, T) {
        let tau = T::two_pi();
        let turns = (s / tau).floor() * tau;
        let r = wrap(s);
        let n = self.knots.len();
        let i = match self.knots.partition_point(|&k| k <= r) {
            0 => 0,
            p => p - 1,
        };
        let hi = if i + 1 < n { self.values[i + 1] } else { self.values[0] + tau };
        (self.values[i] + turns, hi + turns)
    }
}

/// Values of `f` at arbitrary targets (reduced mod `2 pi`).
pub fn interpolate<T: Real>(f: &ScalarField<T>, targets: &[T], method: InterpMethod) -> Vec<T> {
    match method {
        InterpMethod::Trigonometric => {
            let p = TrigInterpolant::new(f);
            targets.iter().map(|&x| p.eval(x)).collect()
        }
        InterpMethod::PeriodicCubic => {
            let p = PeriodicCubic::new(f);
            targets.iter().map(|&x| p.eval(x)).collect()
        }
    }
}

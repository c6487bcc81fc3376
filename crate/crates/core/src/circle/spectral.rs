use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::Order;
use crate::scalar::Real;

pub(crate) struct FftPair<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> FftPair<T> {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    /// Signed wavenumber of DFT index `j`; the Nyquist index maps to `+n/2`.
    fn wavenumber(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    pub(crate) fn forward(&self, f: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = f.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Derivative of one or two real series in a single complex transform.
    ///
    /// The multiplier `(ik)^p` maps real series to real series (the Nyquist
    /// mode is dropped for odd `p`), so packing `a + i b` is exact.
    pub(crate) fn deriv_pair(
        &self,
        a: &[T],
        b: Option<&[T]>,
        order: Order,
        dealias: bool,
    ) -> (Vec<T>, Option<Vec<T>>) {
        let n = self.n;
        let mut buf: Vec<Complex<T>> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        };
        self.forward.process(&mut buf);
        let inv_n = T::one() / T::from_usize_lossy(n);
        let cutoff = n / 3;
        for (j, c) in buf.iter_mut().enumerate() {
            let k = self.wavenumber(j);
            let nyquist = k as usize == n / 2;
            if (dealias && k.unsigned_abs() as usize > cutoff) || (nyquist && order == Order::First) {
                *c = Complex::new(T::zero(), T::zero());
                continue;
            }
            let kf = T::lit(k as f64);
            *c = match order {
                // i k (re + i im) = -k im + i k re
                Order::First => Complex::new(-kf * c.im, kf * c.re),
                Order::Second => Complex::new(-kf * kf * c.re, -kf * kf * c.im),
            } * inv_n;
        }
        self.inverse.process(&mut buf);
        let da = buf.iter().map(|c| c.re).collect();
        let db = b.map(|_| buf.iter().map(|c| c.im).collect());
        (da, db)
    }

    /// Multiplies mode `k` by `exp(-36 (|k| / (n/2))^order)` in one or two
    /// real series.
    pub(crate) fn filter_pair(&self, a: &[T], b: Option<&[T]>, order: u32) -> (Vec<T>, Option<Vec<T>>) {
        let n = self.n;
        let mut buf: Vec<Complex<T>> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        };
        self.forward.process(&mut buf);
        let inv_n = T::one() / T::from_usize_lossy(n);
        let half = (n / 2) as f64;
        for (j, c) in buf.iter_mut().enumerate() {
            let k = self.wavenumber(j).unsigned_abs() as f64;
            let sigma = (-36.0 * (k / half).powi(order as i32)).exp();
            *c = *c * (T::lit(sigma) * inv_n);
        }
        self.inverse.process(&mut buf);
        let fa = buf.iter().map(|c| c.re).collect();
        let fb = b.map(|_| buf.iter().map(|c| c.im).collect());
        (fa, fb)
    }

    /// Mean and the zero-based periodic part of the antiderivative.
    pub(crate) fn antiderivative(&self, f: &[T]) -> (T, Vec<T>) {
        let n = self.n;
        let mut buf = self.forward(f);
        let inv_n = T::one() / T::from_usize_lossy(n);
        let mean = buf[0].re * inv_n;
        buf[0] = Complex::new(T::zero(), T::zero());
        for (j, c) in buf.iter_mut().enumerate().skip(1) {
            let k = self.wavenumber(j);
            if k as usize == n / 2 {
                // the Nyquist cosine has no periodic antiderivative on the grid
                *c = Complex::new(T::zero(), T::zero());
                continue;
            }
            let kf = T::lit(k as f64);
            // c / (i k) = (im / k) - i (re / k)
            *c = Complex::new(c.im / kf, -c.re / kf) * inv_n;
        }
        self.inverse.process(&mut buf);
        let raw: Vec<T> = buf.iter().map(|c| c.re).collect();
        let offset = raw[0];
        (mean, raw.into_iter().map(|x| x - offset).collect())
    }
}

/// Fourth-order centered differences with periodic wrap.
pub(crate) fn fd4<T: Real>(f: &[T], h: T, order: Order) -> Vec<T> {
    let n = f.len();
    let at = |k: isize| f[k.rem_euclid(n as isize) as usize];
    let twelve = T::lit(12.0);
    (0..n as isize)
        .map(|k| match order {
            Order::First => {
                (at(k - 2) - T::lit(8.0) * at(k - 1) + T::lit(8.0) * at(k + 1) - at(k + 2)) / (twelve * h)
            }
            Order::Second => {
                (-at(k - 2) + T::lit(16.0) * at(k - 1) - T::lit(30.0) * at(k) + T::lit(16.0) * at(k + 1)
                    - at(k + 2))
                    / (twelve * h * h)
            }
        })
        .collect()
}

//! Reparametrization of the circle by `dy/dx0 = 2 pi V / v`, which makes
//! the `dy^2` coefficient of the metric constant, and the limit predicted
//! by the conserved integrals.

use crate::circle::{Mat3Field, MonotoneCubic, Order, ScalarField, SymField, TrigInterpolant};
use crate::error::{FlowError, Result};
use crate::flow::FlowState;
use crate::mat3::{split, SymMat3};
use crate::scalar::Real;

/// The map `x0 -> y` at one flow time and its inverse.
#[derive(Debug, Clone)]
pub struct GaugeMap<T: Real> {
    y_of_x: ScalarField<T>,
    v: T,
    inverse: MonotoneCubic<T>,
    /// Periodic part `y(x) - x`, band-limited like `V`.
    drift: TrigInterpolant<T>,
    volume: TrigInterpolant<T>,
}

impl<T: Real> GaugeMap<T> {
    pub fn y_of_x(&self) -> &ScalarField<T> {
        &self.y_of_x
    }

    /// `v_t`, the integral of `V`.
    pub fn v(&self) -> T {
        self.v
    }

    /// `y(x)` for any real `x`, lifted so that `y(x + 2 pi) = y(x) + 2 pi`.
    pub fn y_at(&self, x: T) -> T {
        x + self.drift.eval(x)
    }

    /// `G_t(y)`: the `x0` with `y(x0) = y`.
    ///
    /// The monotone cubic inverse supplies a bracketed first guess that a
    /// few Newton steps on the spectral forward map then refine.
    pub fn x_of_y(&self, y: T) -> T {
        let mut x = self.inverse.eval(y);
        let (lo, hi) = self.inverse.bracket(y);
        let scale = T::two_pi() / self.v;
        for _ in 0..6 {
            let f = self.y_at(x) - y;
            let slope = scale * self.volume.eval(x);
            let next = x - f / slope;
            if !(next >= lo && next <= hi) {
                break;
            }
            let done = (next - x).abs() <= T::epsilon() * T::lit(4.0) * (T::one() + x.abs());
            x = next;
            if done {
                break;
            }
        }
        x
    }
}

/// Builds the gauge map from the volume factor at one time.
pub fn build_gauge<T: Real>(volume: &ScalarField<T>) -> Result<GaugeMap<T>> {
    if !(volume.min() > T::zero()) {
        return Err(FlowError::not_pd("volume factor V must be positive"));
    }
    let grid = volume.grid();
    let v = volume.integrate();
    let (_, periodic) = grid.antiderivative_periodic(volume.samples());
    let scale = T::two_pi() / v;
    let drift_samples: Vec<T> = periodic.iter().map(|p| *p * scale).collect();
    let drift_field = ScalarField::new(grid.clone(), drift_samples)?;
    let y: Vec<T> = grid.nodes().zip(drift_field.samples()).map(|(x, d)| x + *d).collect();
    if let Some(k) = (1..y.len()).find(|&k| !(y[k] > y[k - 1])) {
        return Err(FlowError::NonMonotone { node: k });
    }
    if !(y[y.len() - 1] < T::two_pi()) {
        return Err(FlowError::NonMonotone { node: y.len() - 1 });
    }
    // inverse: knots in y, values in x
    let inverse = MonotoneCubic::new(y.clone(), grid.nodes().collect())?;
    Ok(GaugeMap {
        y_of_x: ScalarField::new(grid.clone(), y)?,
        v,
        inverse,
        drift: TrigInterpolant::new(&drift_field),
        volume: TrigInterpolant::new(volume),
    })
}

/// `Q(G_t(y_j))` on the uniform `m`-point grid in `y`.
pub fn resample_hat<T: Real>(q: &SymField<T>, gauge: &GaugeMap<T>, m: usize) -> Result<SymField<T>> {
    q.grid().check_same(gauge.y_of_x.grid())?;
    let target_grid = q.grid().resized(m)?;
    let xs: Vec<T> = target_grid.nodes().map(|y| gauge.x_of_y(y)).collect();
    let interps: Vec<TrigInterpolant<T>> = (0..6)
        .map(|c| {
            let series = q.samples().iter().map(|s| s.to_array()[c]).collect();
            TrigInterpolant::new(&ScalarField::new(q.grid().clone(), series).expect("finite samples"))
        })
        .collect();
    let samples: Vec<SymMat3<T>> =
        xs.iter().map(|&x| SymMat3::from_array(std::array::from_fn(|c| interps[c].eval(x)))).collect();
    let tol = T::lit(1e-10);
    if let Some(k) = samples.iter().position(|s| !((s.det() - T::one()).abs() <= tol)) {
        return Err(FlowError::ConstraintViolated(format!(
            "det Qhat = {} after resampling at node {k}",
            samples[k].det()
        )));
    }
    SymField::new(target_grid, samples)
}

/// `Qhat` on an `m`-point `y` grid together with `v_t`.
pub fn normalized_q<T: Real>(state: &FlowState<T>, m: usize) -> Result<(SymField<T>, T)> {
    let gauge = build_gauge(&state.volume())?;
    Ok((resample_hat(&state.q(), &gauge, m)?, gauge.v()))
}

/// Limit `(v_inf, Qhat_inf)` fixed by the conserved integrals of `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitPrediction<T> {
    pub v_inf: T,
    pub qhat_inf: SymMat3<T>,
}

pub fn limit_prediction<T: Real>(alpha0: &Mat3Field<T>) -> Result<LimitPrediction<T>> {
    let mean = split(&alpha0.integrate_components()).0.scale(T::one() / T::two_pi());
    mean.ldl_pivots().map_err(|_| FlowError::not_pd("mean of the symmetric part"))?;
    let c = mean.det().cbrt();
    Ok(LimitPrediction { v_inf: T::two_pi() * c, qhat_inf: mean.scale(T::one() / c) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport<T> {
    /// Largest entry of `Qhat - Qhat_inf` over nodes.
    pub dist_inf: T,
    /// `||Qhat'||_inf` in the `y` coordinate.
    pub q_prime_inf: T,
    pub v_gap: T,
}

pub fn convergence_report<T: Real>(
    qhat: &SymField<T>,
    pred: &LimitPrediction<T>,
    v: T,
) -> ConvergenceReport<T> {
    let dist_inf = qhat.samples().iter().map(|q| (*q - pred.qhat_inf).norm_inf()).fold(T::zero(), T::max);
    ConvergenceReport {
        dist_inf,
        q_prime_inf: qhat.deriv(Order::First).sup_norm(),
        v_gap: (v - pred.v_inf).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::CircleGrid;
    use crate::mat3::Mat3;
    use std::f64::consts::PI;

    fn grid(n: usize) -> CircleGrid<f64> {
        CircleGrid::new(n).unwrap()
    }

    #[test]
    fn constant_volume_is_identity_gauge() {
        let g = grid(32);
        let gm = build_gauge(&ScalarField::constant(&g, 2.0)).unwrap();
        assert!((gm.v() - 4.0 * PI).abs() < 1e-14);
        for (x, y) in g.nodes().zip(gm.y_of_x().samples()) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!((gm.x_of_y(1.234) - 1.234).abs() < 1e-14);
    }

    #[test]
    fn cosine_volume_midpoint() {
        let n = 64;
        let g = grid(n);
        let gm = build_gauge(&ScalarField::from_fn(&g, |x: f64| 1.0 + 0.5 * x.cos())).unwrap();
        assert!((gm.v() - 2.0 * PI).abs() < 1e-13);
        assert!((gm.y_of_x().samples()[n / 2] - PI).abs() < 1e-13);
        // exact y(x) = x + 0.5 sin x
        for y in [0.1, 1.0, 2.5, 4.0, 6.2] {
            let x = gm.x_of_y(y);
            assert!((x + 0.5 * x.sin() - y).abs() < 1e-13, "{y}");
        }
    }

    #[test]
    fn rejects_nonpositive_volume() {
        let g = grid(16);
        let v = ScalarField::from_fn(&g, |x: f64| if x > 3.0 && x < 3.3 { -0.1 } else { 1.0 });
        assert!(matches!(build_gauge(&v), Err(FlowError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn resample_constant_and_identity() {
        let g = grid(32);
        let q0 = SymMat3::diag(2.0, 0.5, 1.0);
        let gm = build_gauge(&ScalarField::constant(&g, 2.0)).unwrap();
        let hat = resample_hat(&SymField::constant(&g, q0), &gm, 48).unwrap();
        assert!(hat.samples().iter().all(|s| (*s - q0).norm_inf() < 1e-14));
        // identity gauge reproduces band-limited data
        let qf = SymField::from_fn(&g, |x: f64| {
            let u = 0.1 * x.sin();
            SymMat3::diag(u.exp(), (-u).exp(), 1.0)
        });
        let hat = resample_hat(&qf, &gm, 32).unwrap();
        assert!(hat.sup_distance(&qf).unwrap() < 1e-13);
    }

    #[test]
    fn resample_cosine_keeps_unit_determinant() {
        let n = 128;
        let g = grid(n);
        let a = Mat3Field::from_fn(&g, |x: f64| Mat3::diag(1.0 + 0.5 * x.cos(), 1.0, 1.0));
        let s = FlowState::new(&a, 0.0).unwrap();
        let (hat, v) = normalized_q(&s, 128).unwrap();
        for q in hat.samples() {
            assert!((q.det() - 1.0).abs() <= 1e-10);
        }
        assert!(v < 2.0 * PI);
        // composition: Qhat(y(x_k)) = Q(x_k)
        let gm = build_gauge(&s.volume()).unwrap();
        let k = 17;
        let xk = g.node(k);
        let yk = gm.y_of_x().samples()[k];
        assert!((gm.x_of_y(yk) - xk).abs() < 1e-12);
    }

    #[test]
    fn limit_prediction_examples() {
        let g = grid(64);
        let cos = Mat3Field::from_fn(&g, |x: f64| Mat3::diag(1.0 + 0.5 * x.cos(), 1.0, 1.0));
        let p = limit_prediction(&cos).unwrap();
        assert!((p.v_inf - 2.0 * PI).abs() < 1e-13);
        assert!((p.qhat_inf - SymMat3::identity()).norm_inf() < 1e-14);
        let p = limit_prediction(&Mat3Field::constant(&g, Mat3::diag(2.0, 2.0, 2.0))).unwrap();
        assert!((p.v_inf - 4.0 * PI).abs() < 1e-13);
        let p = limit_prediction(&Mat3Field::constant(&g, Mat3::diag(1.0, 2.0, 3.0))).unwrap();
        let c = 6f64.cbrt();
        assert!((p.v_inf - 2.0 * PI * c).abs() < 1e-13);
        assert!((p.qhat_inf - SymMat3::diag(1.0, 2.0, 3.0).scale(1.0 / c)).norm_inf() < 1e-15);
        assert!((p.qhat_inf.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_values() {
        let g = grid(64);
        let pred = LimitPrediction { v_inf: 2.0 * PI, qhat_inf: SymMat3::identity() };
        let r = convergence_report(&SymField::constant(&g, SymMat3::identity()), &pred, 2.0 * PI);
        assert_eq!((r.dist_inf, r.q_prime_inf, r.v_gap), (0.0, 0.0, 0.0));
        // t = 0 of the cosine example, in the original coordinate
        let q = SymField::from_fn(&g, |x: f64| {
            let w = 1.0 + 0.5 * x.cos();
            SymMat3::diag(w.powf(2.0 / 3.0), w.powf(-1.0 / 3.0), w.powf(-1.0 / 3.0))
        });
        let r = convergence_report(&q, &pred, 2.0 * PI);
        let want = g
            .nodes()
            .map(|x| {
                let w: f64 = 1.0 + 0.5 * x.cos();
                (w.powf(2.0 / 3.0) - 1.0).abs().max((w.powf(-1.0 / 3.0) - 1.0).abs())
            })
            .fold(0.0, f64::max);
        assert!((r.dist_inf - want).abs() < 1e-15);
    }
}

//! Linearization of the expanded velocity `D(alpha)` and its principal symbol.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circle::{CircleGrid, Order, SymField};
use crate::error::Result;
use crate::flow::expanded_velocity;
use crate::mat3::fuzz::random_sym;
use crate::mat3::{inner_with_inverse, SymMat3};
use crate::scalar::Real;

struct Jets<T: Real> {
    a1: SymField<T>,
    a2: SymField<T>,
    b1: SymField<T>,
    b2: SymField<T>,
}

fn jets<T: Real>(alpha: &SymField<T>, beta: &SymField<T>) -> Result<Jets<T>> {
    alpha.grid().check_same(beta.grid())?;
    Ok(Jets {
        a1: alpha.deriv(Order::First),
        a2: alpha.deriv(Order::Second),
        b1: beta.deriv(Order::First),
        b2: beta.deriv(Order::Second),
    })
}

/// The eleven-term operator as usually written, which treats the metric
/// `<.,.>_alpha` as fixed. It differs from the derivative of `D` by
/// [`linearize`]'s extra terms; kept for comparison in audits.
pub fn linearize_eleven_term<T: Real>(alpha: &SymField<T>, beta: &SymField<T>) -> Result<SymField<T>> {
    let j = jets(alpha, beta)?;
    let d = expanded_velocity(alpha)?;
    let c = T::lit;
    let mut out = Vec::with_capacity(alpha.len());
    for k in 0..alpha.len() {
        let (a, b) = (alpha.samples()[k], beta.samples()[k]);
        let (a1, a2, b1, b2) = (j.a1.samples()[k], j.a2.samples()[k], j.b1.samples()[k], j.b2.samples()[k]);
        let ai = a.inverse_pd()?;
        let ip = |x: &SymMat3<T>, y: &SymMat3<T>| inner_with_inverse(&ai, x, y);
        let a1ia1 = SymMat3::from_mat3(&((a1 * ai) * a1.to_mat3()));
        let g = ip(&a, &a1);
        let bracket = b2 - a.scale(ip(&a, &b2) / c(3.0)) - b.scale(ip(&a, &a2) / c(3.0))
            - a1.scale(ip(&a, &b1))
            - b1.scale(g)
            + a.scale(c(2.0 / 3.0) * ip(&a1, &b1))
            - a.scale(c(2.0 / 3.0) * ip(&a1ia1, &b))
            + b.scale(ip(&a1, &a1) / c(3.0))
            + a.scale(c(4.0 / 9.0) * g * ip(&a, &b1))
            + b.scale(c(2.0 / 9.0) * g * g);
        let v2 = a.det().cbrt().powi(2);
        out.push(bracket.scale(T::one() / v2) - d.samples()[k].scale(c(2.0 / 3.0) * ip(&a, &b)));
    }
    SymField::new(alpha.grid().clone(), out)
}

/// Derivative of `D` at `alpha` in the direction `beta`.
///
/// Besides the eleven terms, the factors `<alpha, alpha''>`, `<alpha, alpha'>`
/// also vary through `alpha^{-1}`, which contributes
/// `V^{-2} [ <beta, alpha''> alpha / 3 + <beta, alpha'> alpha'
/// - (4/9) <alpha, alpha'> <beta, alpha'> alpha ]`.
pub fn linearize<T: Real>(alpha: &SymField<T>, beta: &SymField<T>) -> Result<SymField<T>> {
    let base = linearize_eleven_term(alpha, beta)?;
    let j = jets(alpha, beta)?;
    let c = T::lit;
    let mut out = Vec::with_capacity(alpha.len());
    for k in 0..alpha.len() {
        let (a, b) = (alpha.samples()[k], beta.samples()[k]);
        let (a1, a2) = (j.a1.samples()[k], j.a2.samples()[k]);
        let ai = a.inverse_pd()?;
        let ip = |x: &SymMat3<T>, y: &SymMat3<T>| inner_with_inverse(&ai, x, y);
        let g = ip(&a, &a1);
        let ba1 = ip(&b, &a1);
        let extra = a.scale(ip(&b, &a2) / c(3.0)) + a1.scale(ba1) - a.scale(c(4.0 / 9.0) * g * ba1);
        let v2 = a.det().cbrt().powi(2);
        out.push(base.samples()[k] + extra.scale(T::one() / v2));
    }
    SymField::new(alpha.grid().clone(), out)
}

/// Centered difference `(D(alpha + eps beta) - D(alpha - eps beta)) / 2 eps`.
pub fn fd_jacobian<T: Real>(alpha: &SymField<T>, beta: &SymField<T>, eps: T) -> Result<SymField<T>> {
    let plus = alpha.zip_map(beta, |a, b| *a + b.scale(eps))?;
    let minus = alpha.zip_map(beta, |a, b| *a - b.scale(eps))?;
    let dp = expanded_velocity(&plus)?;
    let dm = expanded_velocity(&minus)?;
    dp.zip_map(&dm, |p, m| (*p - *m).scale(T::one() / (eps + eps)))
}

/// `||fd_jacobian(eps) - linearize||_inf` for each `eps`.
pub fn richardson_errors<T: Real>(alpha: &SymField<T>, beta: &SymField<T>, eps: &[T]) -> Result<Vec<T>> {
    let lin = linearize(alpha, beta)?;
    eps.iter().map(|&e| fd_jacobian(alpha, beta, e)?.sup_distance(&lin)).collect()
}

/// `(xi^2 / V^2) (beta - <alpha, beta>_alpha alpha / 3)`.
pub fn principal_symbol<T: Real>(alpha: &SymMat3<T>, xi: T, beta: &SymMat3<T>) -> Result<SymMat3<T>> {
    let ai = alpha.inverse_pd()?;
    let v2 = alpha.det().cbrt().powi(2);
    let proj = (ai * *beta).trace() / T::lit(3.0);
    Ok((*beta - alpha.scale(proj)).scale(xi * xi / v2))
}

/// Smooth random symmetric direction with Fourier modes up to `modes`,
/// mode `m` damped by `1/m^2`.
pub fn random_direction(grid: &CircleGrid<f64>, modes: usize, seed: u64) -> SymField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = random_sym(&mut rng);
    let coeffs: Vec<(SymMat3<f64>, SymMat3<f64>)> =
        (0..modes).map(|_| (random_sym(&mut rng), random_sym(&mut rng))).collect();
    SymField::from_fn(grid, |x: f64| {
        coeffs.iter().enumerate().fold(base, |acc, (i, (c, s))| {
            let m = (i + 1) as f64;
            acc + (c.scale((m * x).cos()) + s.scale((m * x).sin())).scale(1.0 / (m * m))
        })
    })
}

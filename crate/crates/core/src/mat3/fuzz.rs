//! Seeded randomized checks of the 3x3 identities and inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{det_split, sos_certificate, split, trace_gap, Mat3, SymMat3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzReport {
    pub name: &'static str,
    pub trials: usize,
    /// Worst observed value of the suite's error metric.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl std::fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<22} trials={} worst={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.worst,
            self.tolerance
        )
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..=1.0)
}

pub fn random_mat3(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    Mat3 { m: std::array::from_fn(|_| std::array::from_fn(|_| uniform(rng))) }
}

pub fn random_sym(rng: &mut ChaCha8Rng) -> SymMat3<f64> {
    SymMat3::from_array(std::array::from_fn(|_| uniform(rng)))
}

/// Random symmetric trace-free matrix with unit Frobenius norm.
pub fn random_trace_free_unit(rng: &mut ChaCha8Rng) -> SymMat3<f64> {
    loop {
        let mut s = random_sym(rng);
        let m = s.trace() / 3.0;
        s.s11 -= m;
        s.s22 -= m;
        s.s33 = -(s.s11 + s.s22);
        let n = s.frobenius();
        if n > 1e-3 {
            let mut u = s.scale(1.0 / n);
            u.s33 = -(u.s11 + u.s22);
            return u;
        }
    }
}

/// Rotation matrix from a random unit quaternion.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    let (w, x, y, z) = loop {
        let q = [uniform(rng), uniform(rng), uniform(rng), uniform(rng)];
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            break (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        }
    };
    Mat3::new([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

fn report(name: &'static str, trials: usize, worst: f64, tolerance: f64) -> FuzzReport {
    FuzzReport { name, trials, worst, tolerance, passed: worst <= tolerance }
}

pub fn fuzz_det_split(rng: &mut ChaCha8Rng, trials: usize) -> FuzzReport {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let m = random_mat3(rng);
        let (l, r) = det_split(&m);
        worst = worst.max((l - r).abs() / (1.0 + l.abs()));
    }
    report("det-split", trials, worst, 1e-12)
}

/// Worst value of `-gap` (so a negative gap shows up as a positive error).
pub fn fuzz_trace_gap(rng: &mut ChaCha8Rng, trials: usize) -> FuzzReport {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let b = random_trace_free_unit(rng);
        let scale = rng.random_range(0.0..3.0);
        let mut p = random_sym(rng).scale(scale);
        let m = p.trace() / 3.0;
        p.s11 -= m;
        p.s22 -= m;
        p.s33 = -(p.s11 + p.s22);
        let a = SymMat3::from_mat3(&(b * b)) + p;
        match trace_gap(&a, &b) {
            Ok(g) => worst = worst.max(-g),
            Err(_) => worst = f64::INFINITY,
        }
    }
    report("trace-gap", trials, worst.max(-0.0), 1e-10)
}

pub fn fuzz_sos(rng: &mut ChaCha8Rng, trials: usize) -> FuzzReport {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (x1, x2, y1, y2) = (uniform(rng), uniform(rng), uniform(rng), uniform(rng));
        let x = Vec3::new(x1, x2, -(x1 + x2));
        let y = Vec3::new(y1, y2, -(y1 + y2));
        match sos_certificate(&x, &y) {
            Ok((d, s)) if s >= 0.0 => worst = worst.max((d - s).abs() / (1.0 + d.abs())),
            _ => worst = f64::INFINITY,
        }
    }
    report("sos-certificate", trials, worst, 1e-10)
}

pub fn fuzz_so3_equivariance(rng: &mut ChaCha8Rng, trials: usize) -> FuzzReport {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let p = random_rotation(rng);
        let v = Vec3::new(uniform(rng), uniform(rng), uniform(rng));
        let conj = p * v.skew() * p.transpose();
        let lhs = conj.axial();
        let rhs = p.mul_vec(&v);
        let err = (0..3).fold(0.0f64, |a, i| a.max((lhs[i] - rhs[i]).abs()));
        worst = worst.max(err);
    }
    report("so3-equivariance", trials, worst, 1e-12)
}

/// Matrix with full 53-bit mantissas and magnitudes spread over `2^-20 .. 2^20`.
pub fn random_wide_mat3(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    Mat3 {
        m: std::array::from_fn(|_| {
            std::array::from_fn(|_| {
                let mant = 1.0 + (rng.random::<u64>() >> 12) as f64 / (1u64 << 52) as f64;
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * mant * 2f64.powi(rng.random_range(-20..=20))
            })
        })
    }
}

/// Reconstruction error of `split` followed by `compose`, in units of
/// `eps * max(|M_ij|, |M_ji|)` for each off-diagonal pair.
pub fn fuzz_split_roundtrip(rng: &mut ChaCha8Rng, trials: usize) -> FuzzReport {
    let mut worst = 0.0f64;
    for t in 0..trials {
        let m = if t % 2 == 0 { random_mat3(rng) } else { random_wide_mat3(rng) };
        let (b, g) = split(&m);
        let r = super::compose(&b, &g);
        for i in 0..3 {
            for j in 0..3 {
                let scale = m.m[i][j].abs().max(m.m[j][i].abs()) * f64::EPSILON;
                let err = (r.m[i][j] - m.m[i][j]).abs();
                if err > 0.0 {
                    worst = worst.max(err / scale);
                }
            }
        }
    }
    report("split-reconstruct", trials, worst, 1.0)
}

/// Runs every suite from one seeded stream.
pub fn run_all(seed: u64, trials: usize) -> Vec<FuzzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        fuzz_det_split(&mut rng, trials),
        fuzz_trace_gap(&mut rng, trials),
        fuzz_sos(&mut rng, trials),
        fuzz_so3_equivariance(&mut rng, trials),
        fuzz_split_roundtrip(&mut rng, trials),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        for r in run_all(7, 2000) {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn rotations_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_rotation(&mut rng);
            assert!((p.transpose() * p - Mat3::identity()).norm_inf() < 1e-14);
            assert!((p.det() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        assert_eq!(run_all(11, 500), run_all(11, 500));
    }
}

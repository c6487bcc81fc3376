//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use hsflow::audit::{
    check_records, curvature_hat, principal_symbol, random_direction, richardson_errors,
    torsion_heat_residual, Auditor, DiagnosticsRecord, PropertyCheck,
};
use hsflow::circle::{DiffScheme, SymField};
use hsflow::flow::{
    advance, rhs_conservative, rhs_expanded, run, run_qv, stable_dt, FlowConfig, FlowState, QvState,
};
use hsflow::gauge::{convergence_report, limit_prediction, normalized_q};
use hsflow::io::Preset;
use hsflow::mat3::{fuzz, Mat3};
use hsflow::Result;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// States and records of a run sampled every `every`, plus the largest
/// pointwise decrease of `V` over any single time step.
struct Trajectory {
    states: Vec<FlowState<f64>>,
    records: Vec<DiagnosticsRecord>,
    v_drop_step: f64,
}

fn integrate(preset: &Preset, n: usize, t_end: f64, every: f64) -> Result<Trajectory> {
    let cfg = FlowConfig { n, t_end, output_every: every, ..FlowConfig::default() };
    let alpha0 = preset.sample(&cfg.grid::<f64>()?);
    let auditor = Auditor::new(&alpha0)?;
    let mut s = FlowState::new(&alpha0, 0.0)?;
    let mut vol = s.volume();
    let mut v_drop_step = f64::NEG_INFINITY;
    let mut states = vec![s.clone()];
    let mut records = vec![auditor.audit(&s)];
    let outputs = (t_end / every).round() as usize;
    for k in 1..=outputs {
        let target = k as f64 * every;
        while s.t() < target - 1e-12 {
            let dt = stable_dt(&s, &cfg).min(target - s.t());
            s = advance(&s, dt)?;
            let next = s.volume();
            for (a, b) in vol.samples().iter().zip(next.samples()) {
                v_drop_step = v_drop_step.max(a - b);
            }
            vol = next;
        }
        records.push(auditor.audit(&s));
        states.push(s.clone());
    }
    Ok(Trajectory { states, records, v_drop_step })
}

fn find<'a>(checks: &'a [PropertyCheck], name: &str) -> &'a PropertyCheck {
    checks.iter().find(|c| c.name == name).expect("known check")
}

fn fixed_point() -> Result<Verdict> {
    let start = Instant::now();
    let cfg = FlowConfig { n: 64, ..FlowConfig::default() };
    let alpha0 = Preset::Constant(Mat3::diag(1.0, 2.0, 3.0)).sample(&cfg.grid::<f64>()?);
    let mut s = FlowState::new(&alpha0, 0.0)?;
    let mut rhs_max = 0.0f64;
    for _ in 0..1000 {
        rhs_max = rhs_max.max(rhs_conservative(&s)?.sup_norm());
        s = advance(&s, stable_dt(&s, &cfg))?;
    }
    let drift = s.alpha().sup_distance(&alpha0)?;
    let took = start.elapsed();
    Ok(verdict(
        drift <= 1e-12 && rhs_max <= 1e-13 && took < Duration::from_secs(1),
        format!("|alpha - alpha0| = {drift:.2e}, |rhs| = {rhs_max:.2e}, {took:.2?}"),
    ))
}

fn conservation(cos: &Trajectory) -> Verdict {
    let drift = cos.records.iter().map(|r| r.cohom_drift_max).fold(0.0, f64::max);
    verdict(drift <= 1e-9, format!("max per-component drift of the integrals = {drift:.2e}"))
}

fn monotonicity(cos: &Trajectory) -> Verdict {
    let checks = check_records(&cos.records);
    let drop = find(&checks, "volume-monotone").worst;
    let excess = cos.records.iter().map(|r| r.v - 2.0 * PI).fold(f64::NEG_INFINITY, f64::max);
    let pointwise = cos.v_drop_step;
    verdict(
        drop <= 1e-10 && excess <= 1e-10 && pointwise <= 1e-10,
        format!("v drop = {drop:.2e}, v - 2pi = {excess:.2e}, pointwise V drop per step = {pointwise:.2e}"),
    )
}

fn riccati(runs: &[(&str, &Trajectory)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, tr) in runs {
        let c = check_records(&tr.records);
        let r = find(&c, "riccati-envelope");
        pass &= r.pass;
        parts.push(format!("{name} min slack = {:.2e}", r.worst));
    }
    verdict(pass, parts.join(", "))
}

fn max_principle(runs: &[(&str, &Trajectory)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, tr) in runs {
        let c = check_records(&tr.records);
        let (rise, sandwich) = (find(&c, "trq-max-principle"), find(&c, "eigen-sandwich"));
        pass &= rise.pass && sandwich.pass;
        parts.push(format!("{name} trQ rise = {:.2e}, sandwich excess = {:.2e}", rise.worst, sandwich.worst));
    }
    verdict(pass, parts.join("; "))
}

fn structure(skewed: &Trajectory, offdiag: &Trajectory) -> Verdict {
    let skew = skewed.records.iter().map(|r| r.skew_drift_max).fold(0.0, f64::max);
    let mut off = 0.0f64;
    for s in &offdiag.states {
        for a in s.alpha().samples() {
            off = off.max(a.m[0][1].abs()).max(a.m[1][2].abs()).max(a.m[1][0].abs()).max(a.m[2][1].abs());
        }
    }
    verdict(
        skew <= 1e-12 && off <= 1e-8,
        format!("skew drift = {skew:.2e}, max |alpha_12|, |alpha_23| = {off:.2e}"),
    )
}

fn convergence() -> Result<Verdict> {
    let start = Instant::now();
    let cfg = FlowConfig { n: 128, t_end: 50.0, output_every: 5.0, ..FlowConfig::default() };
    let alpha0 = Preset::Cosine { a: 0.5 }.sample(&cfg.grid::<f64>()?);
    let pred = limit_prediction(&alpha0)?;
    let out = run(&cfg, &alpha0)?;
    let last = out.trajectory.last().expect("at least one state");
    let (qhat, v) = normalized_q(last, 128)?;
    let rep = convergence_report(&qhat, &pred, v);
    let v_gap = (v - 2.0 * PI).abs();
    let curv = curvature_hat(&qhat, v)?.sup_norm();
    let took = start.elapsed();
    Ok(verdict(
        rep.dist_inf <= 1e-3
            && v_gap <= 1e-3
            && curv <= 1e-3
            && rep.q_prime_inf <= 1e-3
            && took <= Duration::from_secs(300),
        format!(
            "stopped at t = {:.2} (converged: {}), |Qhat - I| = {:.2e}, |v - 2pi| = {:.2e}, curvature = {:.2e}, |Qhat'| = {:.2e}, {:.1?}",
            out.summary.t_final, out.summary.converged, rep.dist_inf, v_gap, curv, rep.q_prime_inf, took
        ),
    ))
}

fn heat_residual_at(n: usize, scheme: DiffScheme) -> Result<f64> {
    let cfg = FlowConfig { n, scheme, ..FlowConfig::default() };
    let alpha0 = Preset::Cosine { a: 0.5 }.sample(&cfg.grid::<f64>()?);
    let dt = 1e-5;
    let mut s = FlowState::new(&alpha0, 0.0)?;
    for _ in 0..49_999 {
        s = advance(&s, dt)?;
    }
    let mid = advance(&s, dt)?;
    let next = advance(&mid, dt)?;
    Ok(torsion_heat_residual(&s, &mid, &next)?.sup_norm())
}

fn heat_identity() -> Result<Verdict> {
    let r: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| heat_residual_at(n, DiffScheme::Fd4))
        .collect::<Result<_>>()?;
    let spectral: Vec<f64> = [64, 128]
        .iter()
        .map(|&n| heat_residual_at(n, DiffScheme::Spectral))
        .collect::<Result<_>>()?;
    Ok(verdict(
        r[0] >= 4.0 * r[1] && r[2] <= 1e-6,
        format!(
            "fd4 residual N=64/128/256: {:.2e} / {:.2e} / {:.2e} (ratio {:.1}); spectral N=64/128: {:.2e} / {:.2e}",
            r[0],
            r[1],
            r[2],
            r[0] / r[1],
            spectral[0],
            spectral[1]
        ),
    ))
}

fn linearization() -> Result<Verdict> {
    let cfg = FlowConfig { n: 128, ..FlowConfig::default() };
    let grid = cfg.grid::<f64>()?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (seed, preset) in [(1, Preset::Cosine { a: 0.5 }), (2, Preset::Offdiag)] {
        let alpha: SymField<f64> = preset.sample(&grid).map(|a| a.split().0);
        let beta = random_direction(&grid, 3, seed);
        let e = richardson_errors(&alpha, &beta, &[1e-3, 1e-4])?;
        let mut sym = 0.0f64;
        for a in alpha.samples() {
            for xi in [1.0, 2.0, 3.0] {
                sym = sym.max(principal_symbol(a, xi, a)?.norm_inf());
            }
        }
        pass &= e[1] * 50.0 <= e[0] && sym <= 1e-14;
        parts.push(format!(
            "{}: fd error {:.2e} -> {:.2e} (ratio {:.1}), |sigma(alpha)| = {sym:.1e}",
            preset.name(),
            e[0],
            e[1],
            e[0] / e[1]
        ));
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn lemma_fuzz() -> Verdict {
    let start = Instant::now();
    let reports = fuzz::run_all(1, 100_000);
    let took = start.elapsed();
    let pass = reports.iter().all(|r| r.passed) && took < Duration::from_secs(30);
    let parts: Vec<String> = reports.iter().map(|r| format!("{} worst {:.1e}", r.name, r.worst)).collect();
    verdict(pass, format!("{}, {took:.1?}", parts.join(", ")))
}

fn cross_validation() -> Result<Verdict> {
    let cfg = FlowConfig { n: 128, ..FlowConfig::default() };
    let alpha0 = Preset::Cosine { a: 0.5 }.sample(&cfg.grid::<f64>()?);
    let mut s = FlowState::new(&alpha0, 0.0)?;
    let start = QvState { t: 0.0, q: s.q(), v: s.volume() };
    while s.t() < 1.0 {
        let dt = stable_dt(&s, &cfg).min(1.0 - s.t());
        s = advance(&s, dt)?;
    }
    let qv = run_qv(&cfg, start, 1.0)?;
    let dq = s.q().sup_distance(&qv.q)?;

    let cfg256 = FlowConfig { n: 256, ..FlowConfig::default() };
    let grid = cfg256.grid::<f64>()?;
    let mut forms = 0.0f64;
    for p in [Preset::Cosine { a: 0.5 }, Preset::Offdiag] {
        let st = FlowState::new(&p.sample(&grid), 0.0)?;
        forms = forms.max(rhs_conservative(&st)?.sup_distance(&rhs_expanded(&st)?)?);
    }
    Ok(verdict(
        dq <= 1e-6 && forms <= 1e-8,
        format!("|Q - Q_qv| at t = 1: {dq:.2e}; expanded vs conservative at N = 256: {forms:.2e}"),
    ))
}

fn report(id: usize, name: &str, v: Result<Verdict>) -> bool {
    match v {
        Ok(v) => {
            println!("{} [{id:>2}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
            v.pass
        }
        Err(e) => {
            println!("FAIL [{id:>2}] {name}: error: {e}");
            false
        }
    }
}

fn main() {
    let runs = (|| -> Result<_> {
        Ok((
            integrate(&Preset::Cosine { a: 0.5 }, 128, 10.0, 0.1)?,
            integrate(&Preset::Offdiag, 128, 10.0, 0.1)?,
            integrate(&Preset::Skewed, 128, 5.0, 0.1)?,
        ))
    })();
    let mut ok = true;
    ok &= report(1, "fixed-point exactness", fixed_point());
    match &runs {
        Ok((cos, off, skew)) => {
            ok &= report(2, "conservation", Ok(conservation(cos)));
            ok &= report(3, "monotonicity and volume bound", Ok(monotonicity(cos)));
            ok &= report(4, "Riccati envelope", Ok(riccati(&[("cosine", cos), ("offdiag", off)])));
            ok &= report(
                5,
                "maximum principle",
                Ok(max_principle(&[("cosine", cos), ("offdiag", off), ("skewed", skew)])),
            );
            ok &= report(6, "structure preservation", Ok(structure(skew, off)));
        }
        Err(e) => {
            for (id, name) in [
                (2, "conservation"),
                (3, "monotonicity and volume bound"),
                (4, "Riccati envelope"),
                (5, "maximum principle"),
                (6, "structure preservation"),
            ] {
                println!("FAIL [{id:>2}] {name}: run failed: {e}");
            }
            ok = false;
        }
    }
    ok &= report(7, "convergence to the predicted limit", convergence());
    ok &= report(8, "torsion heat identity", heat_identity());
    ok &= report(9, "linearization audit", linearization());
    ok &= report(10, "matrix lemma fuzz", Ok(lemma_fuzz()));
    ok &= report(11, "scheme cross-validation", cross_validation());
    if !ok {
        std::process::exit(1);
    }
}

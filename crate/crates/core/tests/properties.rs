use proptest::prelude::*;

use hsflow::audit::principal_symbol;
use hsflow::circle::{CircleGrid, Mat3Field, SymField};
use hsflow::flow::{advance, rhs_conservative, FlowConfig, FlowState};
use hsflow::io::{fmt_num, parse_config, InitialData, Preset, RunConfig};
use hsflow::mat3::{compose, det_split, split, Mat3, SymMat3};

fn entry() -> impl Strategy<Value = f64> {
    -1.0f64..1.0
}

fn mat3() -> impl Strategy<Value = Mat3<f64>> {
    proptest::array::uniform3(proptest::array::uniform3(entry())).prop_map(Mat3::new)
}

/// Symmetric positive-definite matrix `L L^T + 0.2 I`.
fn spd() -> impl Strategy<Value = SymMat3<f64>> {
    mat3().prop_map(|l| {
        let m = l * l.transpose();
        SymMat3::from_mat3(&m) + SymMat3::identity().scale(0.2)
    })
}

/// Smooth positive-definite field `c + eps (cos x A + sin 2x B)`.
fn smooth_field(n: usize) -> impl Strategy<Value = SymField<f64>> {
    (spd(), mat3(), mat3()).prop_map(move |(c, a, b)| {
        let g = CircleGrid::new(n).unwrap();
        let (a, b) = (SymMat3::from_mat3(&a), SymMat3::from_mat3(&b));
        SymField::from_fn(&g, |x: f64| c + (a.scale(x.cos()) + b.scale((2.0 * x).sin())).scale(0.05))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn split_reconstructs_within_one_ulp(m in mat3()) {
        let (b, g) = split(&m);
        let r = compose(&b, &g);
        for i in 0..3 {
            for j in 0..3 {
                let scale = m.m[i][j].abs().max(m.m[j][i].abs()) * f64::EPSILON;
                prop_assert!((r.m[i][j] - m.m[i][j]).abs() <= scale);
            }
        }
    }

    #[test]
    fn split_is_exact_on_dyadic_entries(k in proptest::array::uniform9(-(1i64 << 30)..(1i64 << 30))) {
        let m = Mat3::new(std::array::from_fn(|i| std::array::from_fn(|j| k[3 * i + j] as f64 / (1u64 << 30) as f64)));
        let (b, g) = split(&m);
        prop_assert_eq!(compose(&b, &g), m);
    }

    #[test]
    fn det_split_identity(m in mat3()) {
        let (lhs, rhs) = det_split(&m);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn symbol_annihilates_alpha(a in spd(), xi in 0.1f64..4.0) {
        prop_assert!(principal_symbol(&a, xi, &a).unwrap().norm_inf() <= 1e-13);
    }

    #[test]
    fn constant_fields_are_fixed(a in spd()) {
        let g = CircleGrid::new(32).unwrap();
        let s = FlowState::new(&Mat3Field::constant(&g, a.to_mat3()), 0.0).unwrap();
        prop_assert!(rhs_conservative(&s).unwrap().sup_norm() <= 1e-12);
    }

    #[test]
    fn velocity_has_zero_mean(beta in smooth_field(32)) {
        let g = beta.grid().clone();
        let s = FlowState::new(&beta.map(|b| b.to_mat3()), 0.0).unwrap();
        let mean = rhs_conservative(&s).unwrap().integrate_components();
        prop_assert!(mean.norm_inf() <= 1e-12, "{:?} on {:?}", mean, g);
    }

    #[test]
    fn one_step_keeps_skew_and_integrals(beta in smooth_field(32), w in proptest::array::uniform3(entry())) {
        let alpha = beta.map(|b| compose(b, &hsflow::mat3::Vec3::new(w[0], w[1], w[2])));
        let s0 = FlowState::new(&alpha, 0.0).unwrap();
        let s1 = advance(&s0, 1e-4).unwrap();
        prop_assert_eq!(s1.gamma(), s0.gamma());
        let drift = (s1.alpha().integrate_components() - alpha.integrate_components()).norm_inf();
        prop_assert!(drift <= 1e-13);
    }

    #[test]
    fn config_text_round_trips(
        n in (4usize..128).prop_map(|k| 2 * k),
        cfl in 0.01f64..1.0,
        t_end in 0.1f64..100.0,
        a in 0.0f64..0.9,
        preset in 0usize..4,
        filter in prop_oneof![Just(0u32), Just(16), Just(36)],
    ) {
        let p = match preset {
            0 => Preset::Cosine { a },
            1 => Preset::Skewed,
            2 => Preset::Offdiag,
            _ => Preset::Constant(Mat3::diag(1.0 + a, 2.0, 3.0)),
        };
        let cfg = RunConfig {
            flow: FlowConfig { n, cfl_safety: cfl, t_end, filter_order: filter, ..FlowConfig::default() },
            initial: InitialData::Preset(p),
            hat_nodes: None,
        };
        prop_assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
    }
}

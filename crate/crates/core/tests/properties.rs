use proptest::prelude::*;

use ssfinsler::zoo::{zoo, zoo_domain, FUNK_PROFILE};
use ssfinsler::{
    eval_jet, fit_q, metric_determinant, parse_expression, reduced_s, s_grid, sigma_bh, sigma_ht,
    spray_values, MetricSpec, QuadratureRule, Var, VolumeSpec,
};

fn rs_point() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..0.9, -0.99f64..0.99).prop_map(|(r, t)| (r, r * t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn euclidean_has_zero_s_curvature(n in 2usize..7, (r, s) in rs_point()) {
        let spec = MetricSpec::general("1", n, zoo_domain()).unwrap();
        for vol in [VolumeSpec::BusemannHausdorff, VolumeSpec::HolmesThompson, VolumeSpec::Constant] {
            let v = reduced_s(&spec, &vol, r, s, &QuadratureRule::new(64, true)).unwrap();
            prop_assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn finsler_norm_is_positively_homogeneous(
        lambda in 0.1f64..10.0,
        (r, s) in rs_point(),
        idx in 0usize..9,
    ) {
        let entry = &zoo(3).unwrap()[idx];
        let (x, y) = ssfinsler::geometry::point_from_rs(3, r, s);
        let f1 = entry.spec.finsler_norm(&x, &y).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let f2 = entry.spec.finsler_norm(&x, &scaled).unwrap();
        prop_assert!((f2 - lambda * f1).abs() <= 1e-13 * f2.abs().max(1.0));
    }

    #[test]
    fn determinant_is_positive_on_regular_zoo(idx in 0usize..9, n in 2usize..6, (r, s) in rs_point()) {
        let entry = &zoo(n).unwrap()[idx];
        prop_assert!(metric_determinant(&entry.spec, r, s).unwrap() > 0.0);
    }

    #[test]
    fn spray_p_is_odd_for_reversible_profiles((r, s) in rs_point()) {
        let spec = MetricSpec::general("sqrt(1+s^2) + r^2*s^2", 2, zoo_domain()).unwrap();
        let a = spray_values(&spec, r, s).unwrap();
        let b = spray_values(&spec, r, -s).unwrap();
        prop_assert!((a.p + b.p).abs() < 1e-13 * (1.0 + a.p.abs()));
        prop_assert!((a.q - b.q).abs() < 1e-13 * (1.0 + a.q.abs()));
    }

    #[test]
    fn quadrature_converged_at_default_nodes(idx in 0usize..9, n in 2usize..5, r in 0.2f64..0.9) {
        let entry = &zoo(n).unwrap()[idx];
        let coarse = QuadratureRule::new(64, false);
        let fine = QuadratureRule::new(128, false);
        for f in [sigma_bh, sigma_ht] {
            let a = f(&entry.spec, r, &coarse).unwrap();
            let b = f(&entry.spec, r, &fine).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * b.abs(), "{}: {a} vs {b}", entry.name);
        }
    }

    #[test]
    fn douglas_fit_is_stable_under_refinement(idx in 3usize..8, r in 0.2f64..0.9) {
        let entry = &zoo(2).unwrap()[idx];
        let a = fit_q(&entry.spec, r, &s_grid(r, 21)).unwrap();
        let b = fit_q(&entry.spec, r, &s_grid(r, 41)).unwrap();
        prop_assert!((a.c1 - b.c1).abs() <= 1e-9 * (1.0 + b.c1.abs()));
        prop_assert!((a.c2 - b.c2).abs() * r * r <= 1e-9 * (1.0 + b.c2.abs() * r * r));
    }

    #[test]
    fn jets_respect_algebraic_identities((r, s) in rs_point()) {
        let vars = [Var::R, Var::S];
        let lhs = parse_expression("exp(log(1+r^2+s^2)) * sin(r*s)^2 + cos(r*s)^2", &vars).unwrap();
        let rhs = parse_expression("(1+r^2+s^2) * sin(r*s)^2 + 1 - sin(r*s)^2", &vars).unwrap();
        let a = eval_jet(&lhs, r, s).unwrap().partials();
        let b = eval_jet(&rhs, r, s).unwrap().partials();
        for k in 0..10 {
            prop_assert!((a[k] - b[k]).abs() < 1e-12 * (1.0 + b[k].abs()), "{k}: {} vs {}", a[k], b[k]);
        }
    }
}

#[test]
fn funk_c_is_dimension_independent() {
    let rule = QuadratureRule::new(64, true);
    for n in 2..6 {
        let spec = MetricSpec::general(FUNK_PROFILE, n, zoo_domain()).unwrap();
        for (r, s) in [(0.3, 0.1), (0.7, -0.5), (0.85, 0.84)] {
            let v = reduced_s(&spec, &VolumeSpec::BusemannHausdorff, r, s, &rule).unwrap();
            let phi = spec.profile_jet(r, s).unwrap().value();
            assert!((v / ((n + 1) as f64 * phi) - 0.5).abs() < 1e-10);
        }
    }
}

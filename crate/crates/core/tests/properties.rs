use std::sync::{Arc, OnceLock};

use herzmorrey::{
    annulus_indicator, ball_indicator, check_log_holder, conjugate_exponent, herz_morrey_norm, herz_norm, integrate,
    luxemburg_norm, modular, power_sum_sides, ExponentFamily, ExponentFunction, Grid, HerzMorreyParams,
    SampledFunction, SmoothShape,
};
use proptest::prelude::*;

fn line() -> Arc<Grid> {
    static G: OnceLock<Arc<Grid>> = OnceLock::new();
    G.get_or_init(|| Grid::new(1, 8.0, 512).unwrap()).clone()
}

fn plane() -> Arc<Grid> {
    static G: OnceLock<Arc<Grid>> = OnceLock::new();
    G.get_or_init(|| Grid::new(2, 8.0, 64).unwrap()).clone()
}

fn family() -> impl Strategy<Value = ExponentFamily> {
    prop_oneof![
        (1.2..5.0f64).prop_map(|value| ExponentFamily::Constant { value }),
        (1.2..5.0f64, 1.2..5.0f64).prop_map(|(left, right)| ExponentFamily::PiecewiseConstant { left, right }),
        (1.5..3.0f64, -0.3..1.0f64).prop_map(|(base, amplitude)| ExponentFamily::DecayProfile { base, amplitude }),
        (1.5..3.0f64, -0.4..1.0f64, 0.5..4.0f64).prop_map(|(base, amplitude, width)| ExponentFamily::SmoothProfile {
            base,
            amplitude,
            width,
            shape: SmoothShape::Gaussian,
        }),
    ]
}

fn exponent(f: ExponentFamily, g: &Grid) -> ExponentFunction {
    ExponentFunction::new(f, g.dim(), g.half_width()).unwrap()
}

/// Sparse signed samples on the line grid.
fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![3 => Just(0.0), 2 => -3.0..3.0f64], 512)
}

fn sampled(v: Vec<f64>) -> SampledFunction {
    SampledFunction::new(line(), v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugation_is_an_involution(fam in family()) {
        let g = line();
        let q = exponent(fam, &g);
        let qq = conjugate_exponent(&conjugate_exponent(&q));
        for i in 0..g.len() {
            let x = g.coords(i);
            prop_assert!((qq.evaluate(&x) - q.evaluate(&x)).abs() <= 1e-10);
        }
    }

    #[test]
    fn conjugate_bounds_are_dual(fam in family()) {
        let q = exponent(fam, &line());
        let qc = conjugate_exponent(&q);
        prop_assert!((qc.q_plus() - q.q_minus() / (q.q_minus() - 1.0)).abs() <= 1e-10);
        prop_assert!((qc.q_minus() - q.q_plus() / (q.q_plus() - 1.0)).abs() <= 1e-10);
    }

    #[test]
    fn constant_exponents_are_log_holder_with_zero_constants(v in 1.1..6.0f64, dim in 1usize..=2) {
        let q = ExponentFunction::constant(v, dim, 8.0).unwrap();
        let r = check_log_holder(&q, 1000).unwrap();
        prop_assert_eq!(r.c_local, 0.0);
        prop_assert_eq!(r.c_decay, 0.0);
        prop_assert!(r.satisfied());
    }

    #[test]
    fn annuli_partition_the_truncated_shell(dim in 1usize..=2) {
        let g = if dim == 1 { line() } else { plane() };
        let mut cover = vec![0.0; g.len()];
        for k in g.k_min()..=g.k_max() {
            for (c, v) in cover.iter_mut().zip(annulus_indicator(&g, k).unwrap().values()) {
                *c += v;
            }
        }
        let lo = 4f64.powi(g.k_min() - 1);
        let hi = 4f64.powi(g.k_max());
        for (i, c) in cover.iter().enumerate() {
            let r2 = g.radius_sq(i);
            let expected = if lo < r2 && r2 <= hi { 1.0 } else { 0.0 };
            prop_assert_eq!(*c, expected);
        }
    }

    #[test]
    fn quadrature_is_linear(a in samples(), b in samples(), s in -5.0..5.0f64, t in -5.0..5.0f64) {
        let (f, g) = (sampled(a), sampled(b));
        let combo = f.scale(s).add(&g.scale(t)).unwrap();
        let lhs = integrate(&combo);
        let rhs = s * integrate(&f) + t * integrate(&g);
        let scale = s.abs() * integrate(&f.abs()) + t.abs() * integrate(&g.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn balls_are_nested(k in -5i32..3) {
        for g in [line(), plane()] {
            let Ok(small) = ball_indicator(&g, k) else { continue };
            let large = ball_indicator(&g, k + 1).unwrap();
            prop_assert!(small.values().iter().zip(large.values()).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn luxemburg_norm_is_homogeneous(fam in family(), a in samples()) {
        let q = exponent(fam, &line());
        let f = sampled(a);
        let n = luxemburg_norm(&f, &q).unwrap();
        for c in [0.1, 2.0, 10.0] {
            let nc = luxemburg_norm(&f.scale(c), &q).unwrap();
            prop_assert!((nc - c * n).abs() <= 1e-9 * c * n.max(1e-300), "{} vs {}", nc, c * n);
        }
    }

    #[test]
    fn luxemburg_norm_is_subadditive(fam in family(), a in samples(), b in samples()) {
        let q = exponent(fam, &line());
        let (f, g) = (sampled(a), sampled(b));
        let lhs = luxemburg_norm(&f.add(&g).unwrap(), &q).unwrap();
        let rhs = luxemburg_norm(&f, &q).unwrap() + luxemburg_norm(&g, &q).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn normalized_modular_is_one(fam in family(), a in samples()) {
        let q = exponent(fam, &line());
        let f = sampled(a);
        prop_assume!(!f.is_zero());
        let n = luxemburg_norm(&f, &q).unwrap();
        let rho = modular(&f, &q, n).unwrap();
        prop_assert!((rho - 1.0).abs() <= 1e-6, "{}", rho);
    }

    #[test]
    fn constant_exponent_norm_has_closed_form(q0 in 1.1..6.0f64, a in samples()) {
        let q = ExponentFunction::constant(q0, 1, 8.0).unwrap();
        let f = sampled(a);
        let oracle = integrate(&f.map(|v| v.abs().powf(q0))).powf(1.0 / q0);
        let n = luxemburg_norm(&f, &q).unwrap();
        prop_assert!((n - oracle).abs() <= 1e-9 * oracle.max(1e-300));
    }

    #[test]
    fn herz_morrey_at_lambda_zero_is_the_herz_norm(
        fam in family(),
        weights in prop::collection::vec(0.0..2.0f64, 9),
        alpha in -1.0..2.0f64,
        p in 0.5..4.0f64,
    ) {
        let g = line();
        let q = exponent(fam, &g);
        let mut f = SampledFunction::zeros(&g);
        for (k, w) in (g.k_min()..=g.k_max()).zip(&weights) {
            f = f.add(&annulus_indicator(&g, k).unwrap().scale(*w)).unwrap();
        }
        let params = HerzMorreyParams::new(alpha, 0.0, p, q.clone(), &g).unwrap();
        let hm = herz_morrey_norm(&f, &params).unwrap();
        let h = herz_norm(&f, alpha, p, &q).unwrap();
        prop_assert_eq!(hm.to_bits(), h.to_bits());
    }

    #[test]
    fn herz_morrey_is_nonincreasing_in_lambda(
        fam in family(),
        weights in prop::collection::vec(0.0..2.0f64, 4),
        alpha in -1.0..2.0f64,
        p in 0.5..4.0f64,
        l1 in 0.0..2.0f64,
        dl in 0.0..2.0f64,
    ) {
        let g = line();
        let q = exponent(fam, &g);
        let mut f = SampledFunction::zeros(&g);
        for (k, w) in (0..=3).zip(&weights) {
            f = f.add(&annulus_indicator(&g, k).unwrap().scale(*w)).unwrap();
        }
        let at = |lambda: f64| {
            let params = HerzMorreyParams::new(alpha, lambda, p, q.clone(), &g).unwrap();
            herz_morrey_norm(&f, &params).unwrap()
        };
        prop_assert!(at(l1 + dl) <= at(l1));
    }

    #[test]
    fn power_sums_are_subadditive(a in prop::collection::vec(0.0..100.0f64, 1..30), theta in 0.01..=1.0f64) {
        let (lhs, rhs) = power_sum_sides(&a, theta);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}

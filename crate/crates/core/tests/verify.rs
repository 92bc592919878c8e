use std::sync::Arc;

use herzmorrey::{
    admissible_window_3_1, admissible_window_3_2, annulus_indicator, decompose_e_terms, estimate_delta,
    verify_decomposition, verify_delta, verify_duality_bound, verify_hls, verify_holder, verify_lemma_2_3,
    verify_maximal_boundedness, verify_power_sums, verify_prop_2_4, verify_theorem_3_1, verify_theorem_3_2,
    DeltaWindow, ExponentFunction, Grid, HerzMorreyParams, InequalityReport, OperatorHandle, TargetSpace,
    VerifyContext,
};

fn q(s: &str, grid: &Grid) -> ExponentFunction {
    ExponentFunction::new(s.parse().unwrap(), grid.dim(), grid.half_width()).unwrap()
}

fn desk() -> VerifyContext {
    VerifyContext::new(Grid::new(1, 8.0, 4096).unwrap(), 42)
}

fn theorem_ctx() -> VerifyContext {
    VerifyContext::new(Grid::new(1, 32.0, 16384).unwrap(), 42)
}

fn assert_passed(r: &InequalityReport) {
    let failed: Vec<_> = r.failed_checks().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    assert!(r.passed, "{} failed: {failed:?}", r.statement_id);
}

#[test]
fn holder_equality_and_piecewise_bound() {
    let ctx = desk();
    let r = verify_holder(&ctx, &q("const:2", &ctx.grid), 20).unwrap();
    assert_passed(&r);
    assert!((r.cases[0].lhs - 2.0).abs() < 1e-12);
    assert!((r.cases[0].ratio - 1.0).abs() < 1e-9);
    assert_eq!(r.cases[1].lhs, 0.0);
    assert_eq!(r.cases[1].ratio, 0.0);

    let pw = q("piecewise:2:3", &ctx.grid);
    let r = verify_holder(&ctx, &pw, 40).unwrap();
    assert_passed(&r);
    assert!(r.cases.iter().all(|c| c.ratio <= 7.0 / 6.0));
}

#[test]
fn duality_witnesses_attain_the_norm_for_constant_exponents() {
    let ctx = desk();
    for s in ["const:2", "const:3"] {
        let r = verify_duality_bound(&ctx, &q(s, &ctx.grid), 10).unwrap();
        assert_passed(&r);
        assert!((r.cases[0].ratio - 1.0).abs() < 1e-9, "{s}");
    }
    let r = verify_duality_bound(&ctx, &q("decay", &ctx.grid), 20).unwrap();
    assert_passed(&r);
}

#[test]
fn delta_is_the_reciprocal_exponent_for_constants() {
    let ctx = desk();
    for q0 in [1.5, 2.0, 3.0, 4.0] {
        let e = estimate_delta(&ctx, &q(&format!("const:{q0}"), &ctx.grid), DeltaWindow::Delta2).unwrap();
        assert!((e.delta - 1.0 / q0).abs() < 1e-9, "{q0}: {}", e.delta);
        assert!(e.fit_residual < 1e-9);
        assert!(e.within_window);
    }
    let e = estimate_delta(&ctx, &q("const:2", &ctx.grid), DeltaWindow::Delta1).unwrap();
    assert!((e.delta - 0.5).abs() < 1e-9);
    let r = verify_delta(&ctx, &q("const:3", &ctx.grid)).unwrap();
    assert_passed(&r);
}

#[test]
fn delta_fit_for_decay_profile_is_close_to_the_window() {
    let ctx = desk();
    let e = estimate_delta(&ctx, &q("decay", &ctx.grid), DeltaWindow::Delta2).unwrap();
    assert!(e.delta > 0.0 && e.delta < 1.0);
    assert!(e.fit_residual < 0.05, "{}", e.fit_residual);
    assert!(e.effective() <= e.window_bound);
}

#[test]
fn lemma_2_3_product() {
    let ctx = desk();
    for s in ["const:2", "const:3"] {
        let r = verify_lemma_2_3(&ctx, &q(s, &ctx.grid), -3, 2).unwrap();
        assert_passed(&r);
    }
    let r = verify_lemma_2_3(&ctx, &q("decay", &ctx.grid), -3, 1).unwrap();
    assert_passed(&r);
}

#[test]
fn prop_2_4_constant_ratio() {
    let ctx = desk();
    let r = verify_prop_2_4(&ctx, &q("const:2", &ctx.grid), 0.25, -4, 2).unwrap();
    assert_passed(&r);
    for c in &r.cases {
        assert!((c.ratio - 2f64.powf(-0.25)).abs() < 1e-6, "{}", c.ratio);
    }
    let r = verify_prop_2_4(&ctx, &q("decay", &ctx.grid), 0.25, -4, 2).unwrap();
    assert_passed(&r);
    assert!(verify_prop_2_4(&ctx, &q("const:2", &ctx.grid), 0.5, -4, 2).is_err());
}

#[test]
fn hls_and_maximal_boundedness_are_finite() {
    let ctx = VerifyContext::new(Grid::new(1, 8.0, 1024).unwrap(), 42);
    let r = verify_hls(&ctx, &q("const:2", &ctx.grid), 0.25, 20).unwrap();
    assert_passed(&r);
    assert!(r.admissible);
    let r = verify_maximal_boundedness(&ctx, &q("decay", &ctx.grid), 20).unwrap();
    assert_passed(&r);
}

#[test]
fn hls_ratios_are_scale_invariant() {
    let ctx = VerifyContext::new(Grid::new(1, 8.0, 1024).unwrap(), 42);
    let q1 = q("const:2", &ctx.grid);
    let f = annulus_indicator(&ctx.grid, 0).unwrap();
    let ib = OperatorHandle::fractional_integral(0.25);
    let q2 = herzmorrey::sobolev_exponent(&q1, 0.25).unwrap();
    let ratio = |g: &herzmorrey::SampledFunction| {
        herzmorrey::luxemburg_norm(&ib.apply(g).unwrap(), &q2).unwrap() / herzmorrey::luxemburg_norm(g, &q1).unwrap()
    };
    let a = ratio(&f);
    let b = ratio(&f.scale(10.0));
    assert!((a - b).abs() <= 1e-9 * a);
}

#[test]
fn power_sums() {
    let r = verify_power_sums(&desk(), 1000).unwrap();
    assert_passed(&r);
    assert_eq!(r.cases.len(), 1100);
}

#[test]
fn theorem_3_1_windows_and_ratios() {
    let ctx = theorem_ctx();
    let q2 = q("const:2", &ctx.grid);
    let w = admissible_window_3_1(&ctx, &q2, 0.5).unwrap();
    assert!((w.lo - 0.0).abs() < 1e-9 && (w.hi - 1.0).abs() < 1e-9, "{w:?}");
    let params = HerzMorreyParams::new(w.midpoint(), 0.5, 1.0, q2.clone(), &ctx.grid).unwrap();
    let r = verify_theorem_3_1(&ctx, &OperatorHandle::maximal(), &params, 16).unwrap();
    assert_passed(&r);
    assert!(r.admissible && r.stable);

    let id = verify_theorem_3_1(&ctx, &OperatorHandle::identity(), &params, 8).unwrap();
    assert!(id.cases.iter().all(|c| (c.ratio - 1.0).abs() < 1e-12));

    let far = params.clone();
    let far = HerzMorreyParams {
        alpha: 0.5 + 1.0,
        ..far
    };
    let r = verify_theorem_3_1(&ctx, &OperatorHandle::maximal(), &far, 4).unwrap();
    assert!(!r.admissible);
    assert!(r
        .checks
        .iter()
        .filter(|c| c.name == "finite" || c.name == "stable")
        .all(|c| !c.asserted));
}

#[test]
fn theorem_3_2_reduces_to_theorem_3_1_at_beta_zero() {
    let ctx = theorem_ctx();
    let q2 = q("const:2", &ctx.grid);
    let w = admissible_window_3_2(&ctx, &q2, 0.25, 0.5).unwrap();
    assert!((w.lo - 0.25).abs() < 1e-9 && (w.hi - 1.0).abs() < 1e-9, "{w:?}");
    let alpha = 0.5;
    let m = OperatorHandle::maximal();
    let params = HerzMorreyParams::new(alpha, 0.5, 1.0, q2.clone(), &ctx.grid).unwrap();
    let r1 = verify_theorem_3_1(&ctx, &m, &params, 8).unwrap();
    let space = TargetSpace {
        alpha,
        lambda: 0.5,
        p1: 1.0,
        p2: 1.0,
    };
    let r2 = verify_theorem_3_2(&ctx, &m, &q2, &space, 8).unwrap();
    assert_eq!(r1.cases.len(), r2.cases.len());
    for (a, b) in r1.cases.iter().zip(&r2.cases) {
        assert_eq!(a.descriptor, b.descriptor);
        assert!((a.ratio - b.ratio).abs() <= 1e-9 * a.ratio.max(1.0));
    }
    let bad = TargetSpace {
        p1: 2.0,
        p2: 1.0,
        ..space
    };
    assert!(verify_theorem_3_2(&ctx, &m, &q2, &bad, 2).is_err());
}

#[test]
fn decomposition_bounds_the_norm() {
    let ctx = VerifyContext::new(Grid::new(1, 8.0, 2048).unwrap(), 42);
    let q2 = q("const:2", &ctx.grid);
    for p in [1.0, 2.0] {
        let params = HerzMorreyParams::new(0.5, 0.5, p, q2.clone(), &ctx.grid).unwrap();
        let r = verify_decomposition(&ctx, &OperatorHandle::maximal(), &params, 6).unwrap();
        assert_passed(&r);
    }
}

#[test]
fn identity_decomposition_has_only_the_near_term() {
    let grid: Arc<Grid> = Grid::new(1, 8.0, 2048).unwrap();
    let q2 = q("const:2", &grid);
    let params = HerzMorreyParams::new(0.5, 0.5, 1.0, q2, &grid).unwrap();
    let f = annulus_indicator(&grid, 0).unwrap();
    let e = decompose_e_terms(&OperatorHandle::identity(), &f, &params).unwrap();
    assert_eq!(e.e1, 0.0);
    assert_eq!(e.e3, 0.0);
    assert!((e.lhs - e.e2).abs() < 1e-12 * e.lhs);
    assert!(e.within_bound);
}

#[test]
fn reports_are_deterministic() {
    let ctx = VerifyContext::new(Grid::new(1, 8.0, 1024).unwrap(), 42);
    let qd = q("decay", &ctx.grid);
    let a = verify_holder(&ctx, &qd, 10).unwrap();
    let b = verify_holder(&ctx, &qd, 10).unwrap();
    assert_eq!(a.canonical(), b.canonical());
}

//! Modular, Luxemburg norm, L¹ norm, and the Herz / Herz–Morrey norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::exponent::ExponentFunction;
use crate::sampling::{Grid, SampledFunction};

/// Relative bracket width at which bisection stops.
pub const BISECTION_RTOL: f64 = 1e-10;
pub const BISECTION_MAX_ITER: usize = 200;

/// Estimated tails of the Herz inner sum above this fraction of the
/// computed sum are flagged.
pub const TAIL_WARNING_FRACTION: f64 = 1e-6;

/// Cached `(ln|f(x)|, q(x))` pairs over the support of a function, so
/// that each modular evaluation is one `exp` per support point.
struct Modular {
    terms: Vec<(f64, f64)>,
    cell_volume: f64,
}

impl Modular {
    fn build(f: &SampledFunction, q: &ExponentFunction, indices: Option<&[usize]>) -> Result<Self> {
        check_exponent(f.grid(), q)?;
        let grid = f.grid();
        let values = f.values();
        let term = |i: usize| {
            let v = values[i].abs();
            (v > 0.0).then(|| (v.ln(), q.evaluate(&grid.point(i)[..grid.dim()])))
        };
        let terms = match indices {
            Some(idx) => idx.iter().filter_map(|&i| term(i)).collect(),
            None => (0..values.len()).filter_map(term).collect(),
        };
        Ok(Self {
            terms,
            cell_volume: grid.cell_volume(),
        })
    }

    fn eval(&self, eta: f64) -> f64 {
        let ln_eta = eta.ln();
        self.terms
            .iter()
            .map(|&(ln_v, q)| (q * (ln_v - ln_eta)).exp())
            .sum::<f64>()
            * self.cell_volume
    }

    fn sup(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, &(ln_v, _)| m.max(ln_v.exp()))
    }

    fn solve(&self, half_width: f64, dim: usize, curve: Option<&mut ModularCurve>) -> f64 {
        let mut record = Vec::new();
        if self.terms.is_empty() {
            if let Some(c) = curve {
                c.bracket = (0.0, 0.0);
            }
            return 0.0;
        }
        let mut rho = |eta: f64| {
            let r = self.eval(eta);
            record.push((eta, r));
            r
        };
        let mut hi = (self.sup() * (2.0 * half_width).powi(dim as i32)).max(1.0);
        while rho(hi) > 1.0 {
            hi *= 2.0;
        }
        let mut lo = hi;
        loop {
            let r = rho(lo);
            if r == 1.0 {
                hi = lo;
                break;
            }
            if r > 1.0 {
                break;
            }
            hi = lo;
            lo *= 0.5;
        }
        let mut iter = 0;
        while hi - lo > BISECTION_RTOL * hi && iter < BISECTION_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if rho(mid) <= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            iter += 1;
        }
        if let Some(c) = curve {
            record.sort_by(|a, b| a.0.total_cmp(&b.0));
            c.evaluations = record;
            c.bracket = (lo, hi);
        }
        hi
    }
}

fn check_exponent(grid: &Grid, q: &ExponentFunction) -> Result<()> {
    if q.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "exponent of dimension {} on a grid of dimension {}",
            q.dim(),
            grid.dim()
        )));
    }
    if q.domain_radius() < grid.half_width() * (1.0 - 1e-12) {
        return Err(Error::GridMismatch(format!(
            "exponent certified on radius {} but the grid has half-width {}",
            q.domain_radius(),
            grid.half_width()
        )));
    }
    Ok(())
}

/// `(eta, rho_q(f/eta))` pairs visited while computing a Luxemburg norm,
/// sorted by `eta`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ModularCurve {
    pub evaluations: Vec<(f64, f64)>,
    pub bracket: (f64, f64),
}

/// `rho_q(f/eta) = ∫ (|f(x)|/eta)^q(x) dx`.
pub fn modular(f: &SampledFunction, q: &ExponentFunction, eta: f64) -> Result<f64> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::NonPositiveEta(eta));
    }
    Ok(Modular::build(f, q, None)?.eval(eta))
}

/// `inf{eta > 0 : rho_q(f/eta) <= 1}` by bracketing and bisection. The
/// returned value is the upper end of the final bracket, so the modular
/// there is at most one.
pub fn luxemburg_norm(f: &SampledFunction, q: &ExponentFunction) -> Result<f64> {
    let grid = f.grid();
    Ok(Modular::build(f, q, None)?.solve(grid.half_width(), grid.dim(), None))
}

pub fn luxemburg_norm_traced(f: &SampledFunction, q: &ExponentFunction) -> Result<(f64, ModularCurve)> {
    let grid = f.grid();
    let mut curve = ModularCurve::default();
    let norm = Modular::build(f, q, None)?.solve(grid.half_width(), grid.dim(), Some(&mut curve));
    Ok((norm, curve))
}

/// Luxemburg norm of `f` restricted to the listed grid indices.
pub fn luxemburg_norm_on(f: &SampledFunction, q: &ExponentFunction, indices: &[usize]) -> Result<f64> {
    let grid = f.grid();
    Ok(Modular::build(f, q, Some(indices))?.solve(grid.half_width(), grid.dim(), None))
}

pub fn l1_norm(f: &SampledFunction) -> f64 {
    f.values().iter().map(|v| v.abs()).sum::<f64>() * f.grid().cell_volume()
}

/// `‖f χ_k‖_{q(·)}` for `k = k_min..=k_max`.
pub fn annular_norms(
    f: &SampledFunction,
    q: &ExponentFunction,
    k_min: i32,
    k_max: i32,
    exec: Exec,
) -> Result<Vec<f64>> {
    let grid = f.grid();
    grid.check_k(k_min)?;
    grid.check_k(k_max)?;
    check_exponent(grid, q)?;
    let ks: Vec<i32> = (k_min..=k_max).collect();
    exec.map_slice(&ks, |&k| luxemburg_norm_on(f, q, grid.annulus_indices(k)?))
        .into_iter()
        .collect()
}

/// The tuple `(alpha, lambda, p, q, [k_min, k_max])` of a Herz–Morrey space.
#[derive(Debug, Clone)]
pub struct HerzMorreyParams {
    pub alpha: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: ExponentFunction,
    pub k_min: i32,
    pub k_max: i32,
}

impl HerzMorreyParams {
    /// Parameters spanning the full truncation range of `grid`.
    pub fn new(alpha: f64, lambda: f64, p: f64, q: ExponentFunction, grid: &Grid) -> Result<Self> {
        let params = Self {
            alpha,
            lambda,
            p,
            q,
            k_min: grid.k_min(),
            k_max: grid.k_max(),
        };
        params.validate(grid)?;
        Ok(params)
    }

    pub fn with_k_range(mut self, k_min: i32, k_max: i32) -> Self {
        self.k_min = k_min;
        self.k_max = k_max;
        self
    }

    pub fn with_q(mut self, q: ExponentFunction) -> Self {
        self.q = q;
        self
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::SpaceParameters(format!("p = {}", self.p)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::SpaceParameters(format!("lambda = {}", self.lambda)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::SpaceParameters(format!("alpha = {}", self.alpha)));
        }
        if self.k_min > self.k_max {
            return Err(Error::SpaceParameters(format!(
                "empty k range [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        grid.check_k(self.k_min)?;
        grid.check_k(self.k_max)?;
        check_exponent(grid, &self.q)
    }
}

/// Full breakdown of a Herz–Morrey norm evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerzMorreyEvaluation {
    pub value: f64,
    /// `‖f χ_k‖_{q(·)}` for `k = k_min..=k_max`.
    pub annular_norms: Vec<f64>,
    /// `2^{-k0 λ} (Σ_{k <= k0} 2^{kαp} ‖f χ_k‖^p)^{1/p}` per `k0`.
    pub k0_values: Vec<f64>,
    pub argmax_k0: i32,
    /// Geometric estimate of the neglected `k < k_min` part of the inner sum.
    pub tail_estimate: f64,
    pub tail_warning: bool,
    /// `f` does not vanish on `B_{k_min - 1}`, so the truncated supremum is
    /// only a lower bound.
    pub lower_bound_only: bool,
}

fn weight(k: i32, alpha: f64, p: f64) -> f64 {
    2f64.powf(k as f64 * alpha * p)
}

fn check_support(f: &SampledFunction, k_min: i32, k_max: i32) -> Result<bool> {
    let grid = f.grid();
    let outer = 4f64.powi(k_max);
    let inner = 4f64.powi(k_min - 1);
    let mut near_origin = false;
    for i in f.support() {
        let r2 = grid.radius_sq(i);
        if r2 > outer {
            return Err(Error::SupportOutsideGrid { k_max });
        }
        if r2 <= inner {
            near_origin = true;
        }
    }
    Ok(near_origin)
}

pub fn herz_morrey_evaluate(f: &SampledFunction, params: &HerzMorreyParams) -> Result<HerzMorreyEvaluation> {
    herz_morrey_evaluate_with(f, params, Exec::default())
}

pub fn herz_morrey_evaluate_with(
    f: &SampledFunction,
    params: &HerzMorreyParams,
    exec: Exec,
) -> Result<HerzMorreyEvaluation> {
    params.validate(f.grid())?;
    let lower_bound_only = check_support(f, params.k_min, params.k_max)?;
    let norms = annular_norms(f, &params.q, params.k_min, params.k_max, exec)?;
    Ok(assemble(norms, params, lower_bound_only))
}

/// Assembles the Herz–Morrey value from precomputed annular norms.
pub(crate) fn assemble(norms: Vec<f64>, params: &HerzMorreyParams, lower_bound_only: bool) -> HerzMorreyEvaluation {
    let HerzMorreyParams { alpha, lambda, p, .. } = *params;
    let terms: Vec<f64> = norms
        .iter()
        .enumerate()
        .map(|(idx, &nk)| weight(params.k_min + idx as i32, alpha, p) * nk.powf(p))
        .collect();
    let mut inner = 0.0;
    let mut k0_values = Vec::with_capacity(terms.len());
    for (idx, t) in terms.iter().enumerate() {
        inner += t;
        let k0 = params.k_min + idx as i32;
        k0_values.push(2f64.powf(-(k0 as f64) * lambda) * inner.powf(1.0 / p));
    }
    // For k0 > k_max the inner sum is frozen and 2^{-k0 λ} only shrinks, so
    // the supremum over all k0 >= k_min is attained inside the range.
    let (arg, value) =
        k0_values.iter().enumerate().fold(
            (0usize, f64::NEG_INFINITY),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        );

    let tail_estimate = match (terms.first(), terms.get(1)) {
        (Some(&0.0), _) => 0.0,
        (Some(&t0), Some(&t1)) if t1 > 0.0 && t0 < t1 => {
            let ratio = t0 / t1;
            t0 * ratio / (1.0 - ratio)
        }
        _ => f64::INFINITY,
    };
    let tail_warning = tail_estimate > TAIL_WARNING_FRACTION * inner;
    HerzMorreyEvaluation {
        value: value.max(0.0),
        annular_norms: norms,
        k0_values,
        argmax_k0: params.k_min + arg as i32,
        tail_estimate,
        tail_warning,
        lower_bound_only,
    }
}

/// `sup_{k0} 2^{-k0 λ} (Σ_{k=k_min}^{k0} 2^{kαp} ‖f χ_k‖^p)^{1/p}`.
pub fn herz_morrey_norm(f: &SampledFunction, params: &HerzMorreyParams) -> Result<f64> {
    Ok(herz_morrey_evaluate(f, params)?.value)
}

/// `(Σ_k 2^{kαp} ‖f χ_k‖^p)^{1/p}` over the grid's truncation range.
pub fn herz_norm(f: &SampledFunction, alpha: f64, p: f64, q: &ExponentFunction) -> Result<f64> {
    let params = HerzMorreyParams::new(alpha, 0.0, p, q.clone(), f.grid())?;
    herz_norm_with(f, &params)
}

/// Herz norm using the k-range, `alpha`, `p` and `q` of `params`; `lambda`
/// is ignored.
pub fn herz_norm_with(f: &SampledFunction, params: &HerzMorreyParams) -> Result<f64> {
    params.validate(f.grid())?;
    check_support(f, params.k_min, params.k_max)?;
    let norms = annular_norms(f, &params.q, params.k_min, params.k_max, Exec::default())?;
    let mut sum = 0.0;
    for (idx, nk) in norms.iter().enumerate() {
        sum += weight(params.k_min + idx as i32, params.alpha, params.p) * nk.powf(params.p);
    }
    Ok(sum.powf(1.0 / params.p))
}

/// Both sides of `(Σ a_i)^θ <= Σ a_i^θ` for nonnegative `a_i`, `θ ∈ (0, 1]`.
pub fn power_sum_sides(a: &[f64], theta: f64) -> (f64, f64) {
    let lhs = a.iter().sum::<f64>().powf(theta);
    let rhs = a.iter().map(|x| x.powf(theta)).sum();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ExponentFamily;
    use crate::sampling::{annulus_indicator, Grid};
    use std::sync::Arc;

    fn line() -> Arc<Grid> {
        Grid::new(1, 8.0, 4096).unwrap()
    }

    fn q_const(v: f64) -> ExponentFunction {
        ExponentFunction::constant(v, 1, 8.0).unwrap()
    }

    fn q_split() -> ExponentFunction {
        ExponentFunction::new(ExponentFamily::PiecewiseConstant { left: 2.0, right: 3.0 }, 1, 8.0).unwrap()
    }

    fn unit_interval(g: &Arc<Grid>) -> SampledFunction {
        SampledFunction::indicator(g, |x| x[0].abs() <= 1.0)
    }

    #[test]
    fn modular_examples() {
        let g = line();
        let f = unit_interval(&g);
        assert_eq!(modular(&f, &q_const(2.0), 1.0).unwrap(), 2.0);
        assert!((modular(&f, &q_const(2.0), 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(modular(&f, &q_split(), 1.0).unwrap(), 2.0);
        assert!(matches!(modular(&f, &q_const(2.0), 0.0), Err(Error::NonPositiveEta(_))));
    }

    #[test]
    fn luxemburg_examples() {
        let g = line();
        let f = unit_interval(&g);
        let n = luxemburg_norm(&f, &q_const(2.0)).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(luxemburg_norm(&SampledFunction::zeros(&g), &q_const(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn luxemburg_split_exponent_matches_scan_oracle() {
        // Oracle: dense scan of eta -> eta^-2 + eta^-3 - 1 for the sign change,
        // refined by repeated 1000x zoom.
        let g_fn = |eta: f64| eta.powi(-2) + eta.powi(-3) - 1.0;
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..4 {
            let step = (hi - lo) / 1000.0;
            let mut a = lo;
            while g_fn(a + step) > 0.0 {
                a += step;
            }
            lo = a;
            hi = a + step;
        }
        let oracle = 0.5 * (lo + hi);
        assert!((oracle - 1.324718).abs() < 1e-6);
        let g = line();
        let n = luxemburg_norm(&unit_interval(&g), &q_split()).unwrap();
        assert!((n - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn modular_curve_is_monotone() {
        let g = line();
        let f = SampledFunction::from_fn(&g, |x| (-x[0] * x[0]).exp()).unwrap();
        let (norm, curve) = luxemburg_norm_traced(&f, &q_split()).unwrap();
        assert!(curve.evaluations.windows(2).all(|w| w[0].1 >= w[1].1));
        assert_eq!(curve.bracket.1, norm);
        let rho = modular(&f, &q_split(), norm).unwrap();
        assert!(rho <= 1.0 && rho > 1.0 - 1e-6);
    }

    #[test]
    fn l1_examples() {
        let g = line();
        assert_eq!(l1_norm(&unit_interval(&g)), 2.0);
        assert_eq!(l1_norm(&annulus_indicator(&g, 0).unwrap()), 1.0);
        assert_eq!(l1_norm(&annulus_indicator(&g, 1).unwrap().scale(3.0)), 6.0);
    }

    #[test]
    fn herz_morrey_examples() {
        let g = line();
        let f = annulus_indicator(&g, 1).unwrap();
        let params = HerzMorreyParams::new(1.0, 0.5, 2.0, q_const(2.0), &g).unwrap();
        assert!((herz_morrey_norm(&f, &params).unwrap() - 2.0).abs() < 1e-9);
        let params = HerzMorreyParams::new(1.0, 0.0, 2.0, q_const(2.0), &g).unwrap();
        assert!((herz_morrey_norm(&f, &params).unwrap() - 8f64.sqrt()).abs() < 1e-9);
        assert!((herz_norm(&f, 1.0, 2.0, &q_const(2.0)).unwrap() - 8f64.sqrt()).abs() < 1e-9);
        let a0 = annulus_indicator(&g, 0).unwrap();
        assert!((herz_norm(&a0, 0.0, 1.0, &q_const(2.0)).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn herz_morrey_matches_exhaustive_k0_oracle() {
        let g = line();
        let f = annulus_indicator(&g, 0)
            .unwrap()
            .add(&annulus_indicator(&g, 1).unwrap())
            .unwrap();
        let q = q_const(2.0);
        let params = HerzMorreyParams::new(0.0, 0.25, 1.0, q.clone(), &g).unwrap();
        // term-by-term: ‖χ_{A_0}‖_2 = 1, ‖χ_{A_1}‖_2 = √2; extend k0 well past
        // the grid to confirm the in-range supremum
        let term = |k: i32| match k {
            0 => 1.0,
            1 => 2f64.sqrt(),
            _ => 0.0,
        };
        let mut best = 0.0f64;
        for k0 in -40..40 {
            let s: f64 = (-60..=k0).map(term).sum();
            best = best.max(2f64.powf(-0.25 * k0 as f64) * s);
        }
        let got = herz_morrey_norm(&f, &params).unwrap();
        assert!((got - best).abs() < 1e-9 * best, "{got} vs {best}");
        let herz = herz_norm(&f, 0.0, 1.0, &q).unwrap();
        assert!((herz - (1.0 + 2f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn lower_bound_and_support_flags() {
        let g = line();
        let core = SampledFunction::indicator(&g, |x| x[0].abs() < 2f64.powi(g.k_min() - 1));
        let params = HerzMorreyParams::new(0.0, 0.5, 1.0, q_const(2.0), &g).unwrap();
        let eval = herz_morrey_evaluate(&core, &params).unwrap();
        assert!(eval.lower_bound_only);
        let narrow = params.clone().with_k_range(-2, 1);
        let wide = SampledFunction::indicator(&g, |x| x[0].abs() <= 3.0);
        assert!(matches!(
            herz_morrey_norm(&wide, &narrow),
            Err(Error::SupportOutsideGrid { .. })
        ));
        let bad = params.clone().with_k_range(2, 1);
        assert!(herz_morrey_norm(&wide, &bad).is_err());
    }

    #[test]
    fn tail_warning_for_mass_at_k_min() {
        let g = line();
        let f = annulus_indicator(&g, g.k_min())
            .unwrap()
            .add(&annulus_indicator(&g, 2).unwrap())
            .unwrap();
        let params = HerzMorreyParams::new(-1.0, 0.5, 1.0, q_const(2.0), &g).unwrap();
        assert!(herz_morrey_evaluate(&f, &params).unwrap().tail_warning);
        let clean = annulus_indicator(&g, 1).unwrap();
        let eval = herz_morrey_evaluate(&clean, &params).unwrap();
        assert_eq!(eval.tail_estimate, 0.0);
        assert!(!eval.tail_warning);
    }

    #[test]
    fn rejects_mismatched_exponent() {
        let g = line();
        let q = ExponentFunction::constant(2.0, 1, 4.0).unwrap();
        assert!(matches!(
            luxemburg_norm(&unit_interval(&g), &q),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn power_sum_singleton_is_equality() {
        let (l, r) = power_sum_sides(&[3.7], 0.4);
        assert!((l - r).abs() < 1e-12);
        let (l, r) = power_sum_sides(&[1.0, 2.0, 3.0], 0.5);
        assert!(l <= r);
    }
}

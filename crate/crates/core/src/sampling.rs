//! Uniform cell grids on `[-R, R]^n`, midpoint quadrature, and the dyadic
//! balls `B_k = {|x| <= 2^k}` and annuli `A_k = B_k \ B_{k-1}`.
//!
//! Sets are classified by cell midpoint. The origin belongs to no annulus.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of grid points every annulus in the truncation range
/// must hold.
pub const RESOLUTION_GUARD: usize = 8;

/// Lowest annulus index used by default, when the resolution guard allows.
pub const DEFAULT_K_MIN: i32 = -6;

const NO_ANNULUS: i32 = i32::MIN;

/// Grid parameters as they appear in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "R")]
    pub half_width: f64,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<i32>,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64, m: usize) -> Self {
        Self {
            n,
            half_width,
            m,
            k_min: None,
            k_max: None,
        }
    }

    pub fn build(&self) -> Result<Arc<Grid>> {
        match (self.k_min, self.k_max) {
            (None, None) => Grid::new(self.n, self.half_width, self.m),
            (lo, hi) => {
                let base = Grid::new(self.n, self.half_width, self.m)?;
                Grid::with_k_range(
                    self.n,
                    self.half_width,
                    self.m,
                    lo.unwrap_or(base.k_min),
                    hi.unwrap_or(base.k_max),
                )
            }
        }
    }
}

/// A uniform grid of `m^n` cells covering `[-R, R]^n` exactly, together
/// with the annulus classification of every cell.
pub struct Grid {
    dim: usize,
    half_width: f64,
    m: usize,
    h: f64,
    k_min: i32,
    k_max: i32,
    annulus: Vec<i32>,
    members: Vec<Vec<usize>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("half_width", &self.half_width)
            .field("m", &self.m)
            .field("k_range", &(self.k_min, self.k_max))
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.half_width == other.half_width
            && self.m == other.m
            && self.k_min == other.k_min
            && self.k_max == other.k_max
    }
}

/// Annulus index of a point with squared radius `r2`: the `k` with
/// `4^(k-1) < r2 <= 4^k`.
fn dyadic_shell(r2: f64) -> Option<i32> {
    if r2 <= 0.0 {
        return None;
    }
    let mut k = (r2.log2() / 2.0).ceil() as i32;
    while r2 > 4f64.powi(k) {
        k += 1;
    }
    while r2 <= 4f64.powi(k - 1) {
        k -= 1;
    }
    Some(k)
}

impl Grid {
    /// Grid with the default truncation: `k_max = floor(log2 R)` and the
    /// lowest `k >= -6` whose annuli all pass the resolution guard.
    pub fn new(dim: usize, half_width: f64, m: usize) -> Result<Arc<Grid>> {
        let raw = Self::raw(dim, half_width, m)?;
        let k_max = half_width.log2().floor() as i32;
        let counts = raw.shell_counts(i32::MIN / 2, k_max);
        let mut k_min = k_max;
        while k_min > DEFAULT_K_MIN && counts.get(&(k_min - 1)).is_some_and(|&c| c >= RESOLUTION_GUARD) {
            k_min -= 1;
        }
        Ok(Arc::new(raw.finish(k_min, k_max)))
    }

    pub fn with_k_range(dim: usize, half_width: f64, m: usize, k_min: i32, k_max: i32) -> Result<Arc<Grid>> {
        let raw = Self::raw(dim, half_width, m)?;
        if k_min > k_max {
            return Err(Error::InvalidGrid(format!("empty k range [{k_min}, {k_max}]")));
        }
        if 2f64.powi(k_max) > half_width {
            return Err(Error::BallExceedsGrid { k: k_max, half_width });
        }
        let counts = raw.shell_counts(k_min, k_max);
        for k in k_min..=k_max {
            let points = counts.get(&k).copied().unwrap_or(0);
            if points < RESOLUTION_GUARD {
                return Err(Error::ResolutionGuard {
                    k,
                    points,
                    required: RESOLUTION_GUARD,
                });
            }
        }
        Ok(Arc::new(raw.finish(k_min, k_max)))
    }

    fn raw(dim: usize, half_width: f64, m: usize) -> Result<Grid> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half-width {half_width} must be positive")));
        }
        if m < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points per axis, got {m}")));
        }
        Ok(Grid {
            dim,
            half_width,
            m,
            h: 2.0 * half_width / m as f64,
            k_min: 0,
            k_max: 0,
            annulus: Vec::new(),
            members: Vec::new(),
        })
    }

    fn shell_counts(&self, k_lo: i32, k_hi: i32) -> std::collections::BTreeMap<i32, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for i in 0..self.len() {
            if let Some(k) = dyadic_shell(self.radius_sq(i)) {
                if k >= k_lo && k <= k_hi {
                    *counts.entry(k).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    fn finish(mut self, k_min: i32, k_max: i32) -> Grid {
        self.k_min = k_min;
        self.k_max = k_max;
        let len = self.len();
        let mut annulus = vec![NO_ANNULUS; len];
        let mut members = vec![Vec::new(); (k_max - k_min + 1) as usize];
        for (i, slot) in annulus.iter_mut().enumerate() {
            if let Some(k) = dyadic_shell(self.radius_sq(i)) {
                if k >= k_min && k <= k_max {
                    *slot = k;
                    members[(k - k_min) as usize].push(i);
                }
            }
        }
        self.annulus = annulus;
        self.members = members;
        self
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            n: self.dim,
            half_width: self.half_width,
            m: self.m,
            k_min: Some(self.k_min),
            k_max: Some(self.k_max),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per axis.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    /// Coordinate of cell `j` along one axis.
    pub fn axis_coord(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 0.5) * self.h
    }

    /// Midpoint of cell `i`; for `n = 1` the second entry is zero.
    pub fn point(&self, i: usize) -> [f64; 2] {
        if self.dim == 1 {
            [self.axis_coord(i), 0.0]
        } else {
            [self.axis_coord(i % self.m), self.axis_coord(i / self.m)]
        }
    }

    pub fn coords(&self, i: usize) -> Vec<f64> {
        self.point(i)[..self.dim].to_vec()
    }

    pub fn radius_sq(&self, i: usize) -> f64 {
        let p = self.point(i);
        p[0] * p[0] + p[1] * p[1]
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radius_sq(i).sqrt()
    }

    /// Annulus `k` holding cell `i`, if inside the truncation range.
    pub fn annulus_of(&self, i: usize) -> Option<i32> {
        match self.annulus[i] {
            NO_ANNULUS => None,
            k => Some(k),
        }
    }

    pub fn annulus_indices(&self, k: i32) -> Result<&[usize]> {
        self.check_k(k)?;
        Ok(&self.members[(k - self.k_min) as usize])
    }

    pub fn check_k(&self, k: i32) -> Result<()> {
        if k < self.k_min || k > self.k_max {
            return Err(Error::AnnulusOutOfRange {
                k,
                k_min: self.k_min,
                k_max: self.k_max,
            });
        }
        Ok(())
    }

    /// Smallest `k` whose ball `B_k` contains at least one grid point.
    pub fn ball_k_min(&self) -> i32 {
        let r_min = (0..self.len()).map(|i| self.radius_sq(i)).fold(f64::INFINITY, f64::min);
        dyadic_shell(r_min).unwrap_or(self.k_min)
    }

    /// Measure of the unit ball in `R^n`.
    pub fn unit_ball_volume(&self) -> f64 {
        unit_ball_volume(self.dim)
    }
}

pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => unreachable!("dimension checked at construction"),
    }
}

/// A function sampled at the cell midpoints of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every midpoint. Non-finite samples are an error.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i)[..grid.dim()])).collect();
        Self::new(grid.clone(), values)
    }

    pub fn indicator(grid: &Arc<Grid>, inside: impl Fn(&[f64]) -> bool) -> Self {
        let values = (0..grid.len())
            .map(|i| if inside(&grid.point(i)[..grid.dim()]) { 1.0 } else { 0.0 })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }
}

/// Midpoint quadrature `sum(values) * h^n`; exact for cellwise constants.
pub fn integrate(f: &SampledFunction) -> f64 {
    f.values.iter().sum::<f64>() * f.grid.cell_volume()
}

/// `f * chi_{A_k}`.
pub fn annulus_restrict(f: &SampledFunction, k: i32) -> Result<SampledFunction> {
    f.grid.check_k(k)?;
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| if f.grid.annulus[i] == k { v } else { 0.0 })
        .collect();
    Ok(SampledFunction::from_raw(f.grid.clone(), values))
}

/// Characteristic function of `B_k = {|x| <= 2^k}`.
pub fn ball_indicator(grid: &Arc<Grid>, k: i32) -> Result<SampledFunction> {
    if 2f64.powi(k) > grid.half_width() {
        return Err(Error::BallExceedsGrid {
            k,
            half_width: grid.half_width(),
        });
    }
    let r2 = 4f64.powi(k);
    let values: Vec<f64> = (0..grid.len())
        .map(|i| if grid.radius_sq(i) <= r2 { 1.0 } else { 0.0 })
        .collect();
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::BallBelowResolution { k });
    }
    Ok(SampledFunction::from_raw(grid.clone(), values))
}

/// Characteristic function of `A_k`.
pub fn annulus_indicator(grid: &Arc<Grid>, k: i32) -> Result<SampledFunction> {
    let mut values = vec![0.0; grid.len()];
    for &i in grid.annulus_indices(k)? {
        values[i] = 1.0;
    }
    Ok(SampledFunction::from_raw(grid.clone(), values))
}

/// Annulus index holding the whole support of `f`; `None` for the zero
/// function.
pub fn support_annulus(f: &SampledFunction) -> Result<Option<i32>> {
    let mut found: Option<i32> = None;
    for i in f.support() {
        let k = match f.grid.annulus_of(i) {
            Some(k) => k,
            None => {
                return Err(Error::SupportSpansAnnuli {
                    k: found.unwrap_or(f.grid.k_min()),
                })
            }
        };
        match found {
            None => found = Some(k),
            Some(j) if j != k => return Err(Error::SupportSpansAnnuli { k: j }),
            _ => {}
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Arc<Grid> {
        Grid::new(1, 8.0, 4096).unwrap()
    }

    #[test]
    fn grid_covers_box() {
        let g = line();
        assert_eq!(g.spacing(), 1.0 / 256.0);
        assert_eq!(g.axis_coord(0) - g.spacing() / 2.0, -8.0);
        assert_eq!(g.axis_coord(g.m() - 1) + g.spacing() / 2.0, 8.0);
        assert_eq!(g.k_max(), 3);
    }

    #[test]
    fn default_k_min_respects_resolution_guard() {
        let g = line();
        // A_{-6} has only 4 midpoints at h = 2^-8
        assert_eq!(g.k_min(), -5);
        for k in g.k_min()..=g.k_max() {
            assert!(g.annulus_indices(k).unwrap().len() >= RESOLUTION_GUARD);
        }
        assert!(matches!(
            Grid::with_k_range(1, 8.0, 4096, -6, 3),
            Err(Error::ResolutionGuard { k: -6, points: 4, .. })
        ));
        let fine = Grid::new(1, 8.0, 8192).unwrap();
        assert_eq!(fine.k_min(), -6);
    }

    #[test]
    fn integrate_examples() {
        let g = line();
        let f = SampledFunction::indicator(&g, |x| x[0].abs() <= 1.0);
        assert_eq!(integrate(&f), 2.0);
        assert_eq!(integrate(&SampledFunction::zeros(&g)), 0.0);
    }

    #[test]
    fn disc_area_converges_to_pi() {
        // Richardson extrapolation over m as an independent reference
        let area = |m: usize| {
            let g = Grid::new(2, 8.0, m).unwrap();
            integrate(&ball_indicator(&g, 0).unwrap())
        };
        let (a256, a512) = (area(256), area(512));
        let extrapolated = (4.0 * a512 - a256) / 3.0;
        assert!((extrapolated - std::f64::consts::PI).abs() < 0.02 * std::f64::consts::PI);
        assert!((a512 - std::f64::consts::PI).abs() < 0.02 * std::f64::consts::PI);
    }

    #[test]
    fn ball_examples() {
        let g = line();
        assert_eq!(integrate(&ball_indicator(&g, 0).unwrap()), 2.0);
        assert_eq!(integrate(&ball_indicator(&g, 2).unwrap()), 8.0);
        assert!(matches!(ball_indicator(&g, 4), Err(Error::BallExceedsGrid { .. })));
        assert!(matches!(
            ball_indicator(&g, -12),
            Err(Error::BallBelowResolution { .. })
        ));
    }

    #[test]
    fn annulus_restrict_examples() {
        let g = line();
        let b1 = ball_indicator(&g, 1).unwrap();
        assert_eq!(annulus_restrict(&b1, 1).unwrap(), annulus_indicator(&g, 1).unwrap());
        let a0 = annulus_indicator(&g, 0).unwrap();
        assert!(annulus_restrict(&a0, 2).unwrap().is_zero());
        assert!(annulus_restrict(&a0, 9).is_err());
        assert_eq!(integrate(&a0), 1.0);
    }

    #[test]
    fn nested_balls_and_disjoint_annuli() {
        let g = Grid::new(2, 8.0, 128).unwrap();
        for k in g.k_min()..g.k_max() {
            let small = ball_indicator(&g, k).unwrap();
            let big = ball_indicator(&g, k + 1).unwrap();
            assert!(small.values().iter().zip(big.values()).all(|(a, b)| a <= b));
            let ak = annulus_indicator(&g, k).unwrap();
            let ak1 = annulus_indicator(&g, k + 1).unwrap();
            assert!(ak.values().iter().zip(ak1.values()).all(|(a, b)| a * b == 0.0));
        }
    }

    #[test]
    fn support_annulus_detection() {
        let g = line();
        let a1 = annulus_indicator(&g, 1).unwrap().scale(3.0);
        assert_eq!(support_annulus(&a1).unwrap(), Some(1));
        assert_eq!(support_annulus(&SampledFunction::zeros(&g)).unwrap(), None);
        let two = a1.add(&annulus_indicator(&g, 0).unwrap()).unwrap();
        assert!(support_annulus(&two).is_err());
    }

    #[test]
    fn rejects_bad_samples() {
        let g = line();
        let mut v = vec![0.0; g.len()];
        v[7] = f64::NAN;
        assert!(matches!(
            SampledFunction::new(g.clone(), v),
            Err(Error::NonFinite { index: 7 })
        ));
        assert!(SampledFunction::new(g, vec![0.0; 3]).is_err());
    }
}

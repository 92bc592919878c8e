//! Ball averages over a geometric radius ladder.
//!
//! In one dimension the ball integral of a cellwise-constant function is
//! exact (piecewise-linear cumulative integral). In two dimensions each
//! grid row is integrated exactly along `x` and a 4-point Gauss–Legendre
//! rule handles the chord length across the row.

use std::collections::VecDeque;

use crate::exec::Exec;
use crate::quadrature::Rule;
use crate::sampling::{unit_ball_volume, Grid, SampledFunction};

use super::{Centering, Normalization};

/// Ladder density: `r_j = h * 2^{j/20}`, about 66 rungs per decade. The
/// ratio divides an octave evenly, so every dyadic radius `2^k >= h` is a
/// rung when `h` is a power of two, and refining `m -> 2m` nests ladders.
pub const RUNGS_PER_OCTAVE: u32 = 20;

/// Radii `h * 2^{j/20}` from the grid spacing up to the first rung at or
/// beyond `2 R sqrt(n)`.
pub fn radius_ladder(grid: &Grid) -> Vec<f64> {
    let h = grid.spacing();
    let top = 2.0 * grid.half_width() * (grid.dim() as f64).sqrt();
    let mut out = Vec::new();
    let mut j = 0u32;
    loop {
        let r = h * 2f64.powf(j as f64 / RUNGS_PER_OCTAVE as f64);
        out.push(r);
        if r >= top {
            break;
        }
        j += 1;
    }
    out
}

pub(super) fn ball_weight(r: f64, beta: f64, dim: usize, normalization: Normalization) -> f64 {
    let n = dim as f64;
    match normalization {
        Normalization::RadiusPower => r.powf(beta - n),
        Normalization::VolumeFraction => (unit_ball_volume(dim) * r.powi(dim as i32)).powf(beta / n - 1.0),
    }
}

/// Exact cumulative integral of a cellwise-constant row.
struct Row {
    prefix: Vec<f64>,
    left: f64,
    h: f64,
    /// Edges of the first and last nonzero cell.
    span: Option<(f64, f64)>,
}

impl Row {
    fn new(vals: &[f64], left: f64, h: f64) -> Self {
        let mut prefix = Vec::with_capacity(vals.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for v in vals {
            acc += v * h;
            prefix.push(acc);
        }
        let first = vals.iter().position(|&v| v != 0.0);
        let last = vals.iter().rposition(|&v| v != 0.0);
        let span = first
            .zip(last)
            .map(|(a, b)| (left + a as f64 * h, left + (b + 1) as f64 * h));
        Self { prefix, left, h, span }
    }

    fn cumulative(&self, t: f64) -> f64 {
        let m = self.prefix.len() - 1;
        let u = ((t - self.left) / self.h).clamp(0.0, m as f64);
        let c = (u.floor() as usize).min(m - 1);
        let cell = self.prefix[c + 1] - self.prefix[c];
        self.prefix[c] + (u - c as f64) * cell
    }

    fn interval(&self, a: f64, b: f64) -> f64 {
        self.cumulative(b) - self.cumulative(a)
    }

    fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }
}

pub(super) struct BallIntegrator {
    dim: usize,
    h: f64,
    half_width: f64,
    rows: Vec<Row>,
    rule: Rule,
    /// Bounding box of the support, in cell edges: `[lo_x, hi_x, lo_y, hi_y]`.
    support_box: Option<[f64; 4]>,
}

impl BallIntegrator {
    pub(super) fn new(f: &SampledFunction) -> Self {
        let grid = f.grid();
        let m = grid.m();
        let h = grid.spacing();
        let r = grid.half_width();
        let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        let rows: Vec<Row> = abs.chunks(m).map(|row| Row::new(row, -r, h)).collect();
        let mut support_box: Option<[f64; 4]> = None;
        for i in f.support() {
            let p = grid.point(i);
            let (x0, x1) = (p[0] - h / 2.0, p[0] + h / 2.0);
            let (y0, y1) = if grid.dim() == 1 {
                (0.0, 0.0)
            } else {
                (p[1] - h / 2.0, p[1] + h / 2.0)
            };
            support_box = Some(match support_box {
                None => [x0, x1, y0, y1],
                Some(b) => [b[0].min(x0), b[1].max(x1), b[2].min(y0), b[3].max(y1)],
            });
        }
        Self {
            dim: grid.dim(),
            h,
            half_width: r,
            rows,
            rule: Rule::new(4),
            support_box,
        }
    }

    /// Distance from `x` beyond which a ball around `x` holds the whole support.
    fn reach(&self, x: &[f64]) -> f64 {
        match self.support_box {
            None => 0.0,
            Some(b) => {
                let dx = (x[0] - b[0]).abs().max((x[0] - b[1]).abs());
                let dy = if self.dim == 1 {
                    0.0
                } else {
                    (x[1] - b[2]).abs().max((x[1] - b[3]).abs())
                };
                (dx * dx + dy * dy).sqrt()
            }
        }
    }

    /// Distance from `x` to the support bounding box.
    fn gap(&self, x: &[f64]) -> f64 {
        match self.support_box {
            None => f64::INFINITY,
            Some(b) => {
                let dx = (b[0] - x[0]).max(x[0] - b[1]).max(0.0);
                let dy = if self.dim == 1 {
                    0.0
                } else {
                    (b[2] - x[1]).max(x[1] - b[3]).max(0.0)
                };
                (dx * dx + dy * dy).sqrt()
            }
        }
    }

    /// `∫_{B(x, r)} |f|`.
    pub(super) fn integral(&self, x: &[f64], r: f64) -> f64 {
        if self.dim == 1 {
            return self.rows[0].interval(x[0] - r, x[0] + r);
        }
        let Some(b) = self.support_box else { return 0.0 };
        if self.gap(x) >= r {
            return 0.0;
        }
        let (cx, cy) = (x[0], x[1]);
        let m = self.rows.len();
        let lo = (cy - r).max(b[2]);
        let hi = (cy + r).min(b[3]);
        let first = (((lo + self.half_width) / self.h).floor().max(0.0) as usize).min(m - 1);
        let last = (((hi + self.half_width) / self.h).floor().max(0.0) as usize).min(m - 1);
        let mut acc = 0.0;
        for j in first..=last {
            let row = &self.rows[j];
            let Some((sx0, sx1)) = row.span else { continue };
            let y0 = (-self.half_width + j as f64 * self.h).max(lo).max(cy - r);
            let y1 = (-self.half_width + (j + 1) as f64 * self.h).min(hi).min(cy + r);
            if y1 <= y0 {
                continue;
            }
            let near = if cy < y0 {
                y0 - cy
            } else if cy > y1 {
                cy - y1
            } else {
                0.0
            };
            let far = (y0 - cy).abs().max((y1 - cy).abs());
            let widest = (r * r - near * near).max(0.0).sqrt();
            if cx + widest <= sx0 || cx - widest >= sx1 {
                continue;
            }
            let narrowest = (r * r - far * far).max(0.0).sqrt();
            if cx - narrowest <= sx0 && cx + narrowest >= sx1 {
                // every chord in the band covers the row's support
                acc += (y1 - y0) * row.total();
                continue;
            }
            acc += self
                .rule
                .points(y0, y1)
                .map(|(y, w)| {
                    let chord = (r * r - (y - cy) * (y - cy)).max(0.0).sqrt();
                    w * row.interval(cx - chord, cx + chord)
                })
                .sum::<f64>();
        }
        acc
    }

    fn centered(&self, x: &[f64], ladder: &[(f64, f64)]) -> f64 {
        if self.support_box.is_none() {
            return 0.0;
        }
        let reach = self.reach(x);
        let gap = self.gap(x);
        let mut best = 0.0f64;
        for &(r, w) in ladder {
            if r <= gap {
                continue;
            }
            best = best.max(self.integral(x, r) * w);
            // the ball now holds all of f; larger radii only shrink the average
            if r > reach {
                break;
            }
        }
        best
    }
}

fn weighted_ladder(grid: &Grid, beta: f64, normalization: Normalization) -> Vec<(f64, f64)> {
    radius_ladder(grid)
        .into_iter()
        .map(|r| (r, ball_weight(r, beta, grid.dim(), normalization)))
        .collect()
}

/// Largest integer offset `w >= 0` with `w * h < r`, or `None` if even the
/// zero offset fails.
fn strict_offset(r: f64, h: f64) -> Option<usize> {
    if r <= 0.0 {
        return None;
    }
    let t = r / h;
    let w = t.ceil() - 1.0;
    Some(w.max(0.0) as usize)
}

/// Sliding maximum over the window `[i - w, i + w]` clipped to the slice.
fn window_max(vals: &[f64], w: usize) -> Vec<f64> {
    let m = vals.len();
    let mut out = vec![0.0; m];
    let mut dq: VecDeque<usize> = VecDeque::new();
    for j in 0..m + w {
        if j < m {
            while dq.back().is_some_and(|&b| vals[b] <= vals[j]) {
                dq.pop_back();
            }
            dq.push_back(j);
        }
        if j >= w {
            let i = j - w;
            while dq.front().is_some_and(|&f| f + w < i) {
                dq.pop_front();
            }
            if i < m {
                out[i] = vals[*dq.front().unwrap()];
            }
        }
    }
    out
}

pub(super) fn field(
    f: &SampledFunction,
    beta: f64,
    normalization: Normalization,
    centering: Centering,
    exec: Exec,
) -> SampledFunction {
    let grid = f.grid().clone();
    if f.is_zero() {
        return SampledFunction::zeros(&grid);
    }
    let integ = BallIntegrator::new(f);
    let ladder = weighted_ladder(&grid, beta, normalization);
    let values = match centering {
        Centering::Centered => exec.map(grid.len(), |i| integ.centered(&grid.point(i)[..grid.dim()], &ladder)),
        Centering::UncenteredSampled => uncentered_field(&integ, &grid, &ladder, exec),
    };
    SampledFunction::from_raw(grid, values)
}

fn uncentered_field(integ: &BallIntegrator, grid: &Grid, ladder: &[(f64, f64)], exec: Exec) -> Vec<f64> {
    let m = grid.m();
    let h = grid.spacing();
    let mut best = vec![0.0f64; grid.len()];
    for &(r, w) in ladder {
        let avg = exec.map(grid.len(), |c| integ.integral(&grid.point(c)[..grid.dim()], r) * w);
        let Some(wx0) = strict_offset(r, h) else { continue };
        if grid.dim() == 1 {
            for (b, v) in best.iter_mut().zip(window_max(&avg, wx0)) {
                *b = b.max(v);
            }
            continue;
        }
        // centers (ix + a, iy + d) with (a^2 + d^2) h^2 < r^2
        for d in 0..=wx0.min(m - 1) {
            let rem = r * r - (d as f64 * h).powi(2);
            if rem <= 0.0 {
                break;
            }
            let wd = strict_offset(rem.sqrt(), h).unwrap_or(0);
            let rows: Vec<Vec<f64>> = exec.map(m, |row| window_max(&avg[row * m..(row + 1) * m], wd));
            let updated: Vec<Vec<f64>> = exec.map(m, |iy| {
                let mut out: Vec<f64> = best[iy * m..(iy + 1) * m].to_vec();
                for src in [iy.checked_sub(d), Some(iy + d).filter(|&v| v < m)]
                    .into_iter()
                    .flatten()
                {
                    for (o, v) in out.iter_mut().zip(&rows[src]) {
                        *o = o.max(*v);
                    }
                }
                out
            });
            for (iy, row) in updated.into_iter().enumerate() {
                best[iy * m..(iy + 1) * m].copy_from_slice(&row);
            }
        }
    }
    best
}

pub(super) fn at_point(
    f: &SampledFunction,
    x: &[f64],
    beta: f64,
    normalization: Normalization,
    centering: Centering,
) -> f64 {
    let grid = f.grid();
    if f.is_zero() {
        return 0.0;
    }
    let integ = BallIntegrator::new(f);
    let ladder = weighted_ladder(grid, beta, normalization);
    match centering {
        Centering::Centered => integ.centered(x, &ladder),
        Centering::UncenteredSampled => {
            let m = grid.m();
            let h = grid.spacing();
            let index_range = |v: f64, r: f64| {
                let lo = (((v - r + grid.half_width()) / h).floor().max(0.0) as usize).min(m - 1);
                let hi = (((v + r + grid.half_width()) / h).ceil().max(0.0) as usize).min(m - 1);
                lo..=hi
            };
            let mut best = 0.0f64;
            for &(r, w) in &ladder {
                let xs = index_range(x[0], r);
                let ys = if grid.dim() == 1 { 0..=0 } else { index_range(x[1], r) };
                for iy in ys {
                    for ix in xs.clone() {
                        let c = if grid.dim() == 1 {
                            vec![grid.axis_coord(ix)]
                        } else {
                            vec![grid.axis_coord(ix), grid.axis_coord(iy)]
                        };
                        let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                        if d2 < r * r {
                            best = best.max(integ.integral(&c, r) * w);
                        }
                    }
                }
            }
            best
        }
    }
}

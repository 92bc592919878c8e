//! Riesz potentials `I_β f(x) = ∫ f(y) |x - y|^{β - n} dy`.
//!
//! Samples are treated as cellwise constant and every cell contributes the
//! integral of the kernel over the cell. In one dimension those integrals
//! come from the antiderivative of `|u|^{β-1}`. In two dimensions cells
//! near the evaluation point, including the singular one, use the exact
//! corner antiderivative of `|u|^{β-2}` and the remaining cells a 4x4
//! Gauss–Legendre rule. Fields are assembled by FFT convolution.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::exec::Exec;
use crate::quadrature::Rule;
use crate::sampling::SampledFunction;

/// Cells whose center lies within this many spacings (sup-norm) of the
/// evaluation point are integrated exactly.
const NEAR: f64 = 6.0;

fn antiderivative(u: f64, beta: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(beta) / beta
    }
}

/// `∫_lo^hi |u|^{β-1} du`.
fn segment(lo: f64, hi: f64, beta: f64) -> f64 {
    antiderivative(hi, beta) - antiderivative(lo, beta)
}

fn adaptive(rule: &Rule, lo: f64, hi: f64, f: &dyn Fn(f64) -> f64, whole: f64, depth: u32) -> f64 {
    let mid = 0.5 * (lo + hi);
    let left = rule.integrate(lo, mid, f);
    let right = rule.integrate(mid, hi, f);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= 1e-15 * refined.abs() {
        return refined;
    }
    adaptive(rule, lo, mid, f, left, depth - 1) + adaptive(rule, mid, hi, f, right, depth - 1)
}

/// `∫_0^a ∫_0^b (s² + t²)^{(β-2)/2} dt ds` for `a, b >= 0`, in polar form.
fn corner(a: f64, b: f64, beta: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    let rule = Rule::new(10);
    let theta0 = (b / a).atan();
    let arm = |side: f64, upper: f64| {
        let g = move |t: f64| (side / t.cos()).powf(beta);
        let whole = rule.integrate(0.0, upper, g);
        adaptive(&rule, 0.0, upper, &g, whole, 30)
    };
    (arm(a, theta0) + arm(b, FRAC_PI_2 - theta0)) / beta
}

fn signed_corner(u: f64, v: f64, beta: f64) -> f64 {
    u.signum() * v.signum() * corner(u.abs(), v.abs(), beta)
}

/// Exact `∫∫ |u|^{β-2}` over `[x0, x1] × [y0, y1]`.
fn rect_exact(x0: f64, x1: f64, y0: f64, y1: f64, beta: f64) -> f64 {
    signed_corner(x1, y1, beta) - signed_corner(x0, y1, beta) - signed_corner(x1, y0, beta)
        + signed_corner(x0, y0, beta)
}

/// Tensor Gauss–Legendre `∫∫ |u|^{e}` over a rectangle away from the origin.
fn rect_gauss(rule: &Rule, x0: f64, x1: f64, y0: f64, y1: f64, e: f64) -> f64 {
    let mut acc = 0.0;
    for (u, wu) in rule.points(x0, x1) {
        for (v, wv) in rule.points(y0, y1) {
            acc += wu * wv * (u * u + v * v).powf(0.5 * e);
        }
    }
    acc
}

/// Kernel integral over the cell centered at offset `(u0, u1)` from the
/// evaluation point.
fn cell_weight_2d(rule: &Rule, u0: f64, u1: f64, h: f64, beta: f64) -> f64 {
    let (x0, x1, y0, y1) = (u0 - 0.5 * h, u0 + 0.5 * h, u1 - 0.5 * h, u1 + 0.5 * h);
    if u0.abs().max(u1.abs()) <= (NEAR + 0.5) * h {
        rect_exact(x0, x1, y0, y1, beta)
    } else {
        rect_gauss(rule, x0, x1, y0, y1, beta - 2.0)
    }
}

fn plan(len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
}

fn transpose(buf: &mut [Complex<f64>], l: usize) {
    for i in 0..l {
        for j in i + 1..l {
            buf.swap(i * l + j, j * l + i);
        }
    }
}

fn fft_2d(buf: &mut [Complex<f64>], l: usize, fft: &Arc<dyn Fft<f64>>, exec: Exec) {
    exec.for_each_chunk_mut(buf, l, |row| fft.process(row));
    transpose(buf, l);
    exec.for_each_chunk_mut(buf, l, |row| fft.process(row));
    transpose(buf, l);
}

/// Wraps offset `d` in `(-l, l)` into `[0, l)`.
fn wrap(d: isize, l: usize) -> usize {
    d.rem_euclid(l as isize) as usize
}

/// `out[i] = Σ_j values[j] kernel[|i - j|]`.
fn convolve_1d(values: &[f64], kernel: &[f64]) -> Vec<f64> {
    let m = values.len();
    let l = 2 * m;
    let (fwd, inv) = plan(l);
    let mut a: Vec<Complex<f64>> = vec![Complex::default(); l];
    for (slot, &v) in a.iter_mut().zip(values) {
        slot.re = v;
    }
    let mut k: Vec<Complex<f64>> = vec![Complex::default(); l];
    for d in -(m as isize - 1)..=(m as isize - 1) {
        k[wrap(d, l)].re = kernel[d.unsigned_abs()];
    }
    fwd.process(&mut a);
    fwd.process(&mut k);
    for (x, y) in a.iter_mut().zip(&k) {
        *x *= y;
    }
    inv.process(&mut a);
    a[..m].iter().map(|c| c.re / l as f64).collect()
}

/// Two-dimensional analogue of [`convolve_1d`]; `kernel[|dy| * m + |dx|]`.
fn convolve_2d(values: &[f64], m: usize, kernel: &[f64], exec: Exec) -> Vec<f64> {
    let l = 2 * m;
    let (fwd, inv) = plan(l);
    let mut a: Vec<Complex<f64>> = vec![Complex::default(); l * l];
    for iy in 0..m {
        for ix in 0..m {
            a[iy * l + ix].re = values[iy * m + ix];
        }
    }
    let mut k: Vec<Complex<f64>> = vec![Complex::default(); l * l];
    let span = m as isize - 1;
    for dy in -span..=span {
        for dx in -span..=span {
            k[wrap(dy, l) * l + wrap(dx, l)].re = kernel[dy.unsigned_abs() * m + dx.unsigned_abs()];
        }
    }
    fft_2d(&mut a, l, &fwd, exec);
    fft_2d(&mut k, l, &fwd, exec);
    for (x, y) in a.iter_mut().zip(&k) {
        *x *= y;
    }
    fft_2d(&mut a, l, &inv, exec);
    let scale = (l * l) as f64;
    let mut out = vec![0.0; m * m];
    for iy in 0..m {
        for ix in 0..m {
            out[iy * m + ix] = a[iy * l + ix].re / scale;
        }
    }
    out
}

pub(super) fn field(f: &SampledFunction, beta: f64, exec: Exec) -> SampledFunction {
    let grid = f.grid().clone();
    if f.is_zero() {
        return SampledFunction::zeros(&grid);
    }
    let m = grid.m();
    let h = grid.spacing();
    let values = if grid.dim() == 1 {
        let kernel: Vec<f64> = (0..m)
            .map(|d| segment((d as f64 - 0.5) * h, (d as f64 + 0.5) * h, beta))
            .collect();
        convolve_1d(f.values(), &kernel)
    } else {
        let rule = Rule::new(4);
        let kernel = exec.map(m * m, |idx| {
            cell_weight_2d(&rule, (idx % m) as f64 * h, (idx / m) as f64 * h, h, beta)
        });
        convolve_2d(f.values(), m, &kernel, exec)
    };
    SampledFunction::from_raw(grid, values)
}

/// Direct evaluation at an arbitrary point of the box.
pub(super) fn at_point(f: &SampledFunction, x: &[f64], beta: f64) -> f64 {
    let grid = f.grid();
    let h = grid.spacing();
    let rule = Rule::new(4);
    f.support()
        .map(|j| {
            let c = grid.point(j);
            let w = if grid.dim() == 1 {
                segment(c[0] - 0.5 * h - x[0], c[0] + 0.5 * h - x[0], beta)
            } else {
                cell_weight_2d(&rule, c[0] - x[0], c[1] - x[1], h, beta)
            };
            f.values()[j] * w
        })
        .sum()
}

/// `∫_a^b |u|^{-γ} du` for an interval not containing the origin.
fn power_segment(a: f64, b: f64, gamma: f64) -> f64 {
    let (lo, hi) = if a < 0.0 { (-b, -a) } else { (a, b) };
    if gamma == 1.0 {
        (hi / lo).ln()
    } else {
        (hi.powf(1.0 - gamma) - lo.powf(1.0 - gamma)) / (1.0 - gamma)
    }
}

/// `∫ |f(y)| |x - y|^{-γ} dy`, the kernel envelope of the off-support size
/// conditions. For `γ >= n` the integral diverges when `x` touches a
/// support cell, and `+inf` is returned.
pub fn kernel_potential_at(f: &SampledFunction, x: &[f64], gamma: f64) -> f64 {
    let grid = f.grid();
    let n = grid.dim() as f64;
    if gamma < n {
        return at_point(&f.abs(), x, n - gamma);
    }
    let h = grid.spacing();
    let rule = Rule::new(4);
    let mut acc = 0.0;
    for j in f.support() {
        let c = grid.point(j);
        let u: Vec<f64> = (0..grid.dim()).map(|a| c[a] - x[a]).collect();
        if u.iter().all(|v| v.abs() <= 0.5 * h) {
            return f64::INFINITY;
        }
        let w = if grid.dim() == 1 {
            power_segment(u[0] - 0.5 * h, u[0] + 0.5 * h, gamma)
        } else if u[0].abs().max(u[1].abs()) < 3.0 * h {
            let sub = 8;
            let s = h / sub as f64;
            let mut w = 0.0;
            for a in 0..sub {
                for b in 0..sub {
                    let x0 = u[0] - 0.5 * h + a as f64 * s;
                    let y0 = u[1] - 0.5 * h + b as f64 * s;
                    w += rect_gauss(&rule, x0, x0 + s, y0, y0 + s, -gamma);
                }
            }
            w
        } else {
            rect_gauss(
                &rule,
                u[0] - 0.5 * h,
                u[0] + 0.5 * h,
                u[1] - 0.5 * h,
                u[1] + 0.5 * h,
                -gamma,
            )
        };
        acc += f.values()[j].abs() * w;
    }
    acc
}

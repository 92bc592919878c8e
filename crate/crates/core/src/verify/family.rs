//! Random nonnegative test functions built from annulus indicators and
//! compactly supported bumps, each term living inside one annulus.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::sampling::{annulus_indicator, Grid, SampledFunction};

#[derive(Debug, Clone)]
pub struct TestFunction {
    pub f: SampledFunction,
    pub descriptor: String,
}

fn bump(grid: &Arc<Grid>, center: [f64; 2], width: f64, amp: f64) -> SampledFunction {
    SampledFunction::from_fn(grid, |x| {
        let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
        let t = 1.0 - d2 / (width * width);
        if t > 0.0 {
            amp * t * t
        } else {
            0.0
        }
    })
    .expect("bump samples are finite")
}

/// One term supported in `A_k`: a scaled indicator or a bump of radius at
/// most the distance from its center to the annulus boundary.
fn term(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, k: i32) -> (SampledFunction, String) {
    let amp = rng.gen_range(0.1..2.0);
    let indicator = |amp: f64| {
        let f = annulus_indicator(grid, k).expect("k inside the grid range").scale(amp);
        (f, format!("{amp:.6}*chi(A_{k})"))
    };
    if rng.gen_bool(0.5) {
        return indicator(amp);
    }
    let inner = 2f64.powi(k - 1);
    let rho = inner * rng.gen_range(1.25..1.75);
    let room = (rho - inner).min(2.0 * inner - rho);
    let width = room * rng.gen_range(0.5..1.0);
    let center = if grid.dim() == 1 {
        [if rng.gen_bool(0.5) { rho } else { -rho }, 0.0]
    } else {
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        [rho * theta.cos(), rho * theta.sin()]
    };
    let f = bump(grid, center, width, amp);
    if f.is_zero() {
        // bump narrower than the grid resolution
        return indicator(amp);
    }
    let at = if grid.dim() == 1 {
        format!("{:.6}", center[0])
    } else {
        format!("({:.6},{:.6})", center[0], center[1])
    };
    (f, format!("{amp:.6}*bump(A_{k},c={at},w={width:.6})"))
}

/// A sum of one to three terms in annuli drawn from `k_lo..=k_hi`.
pub fn random_member(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, k_lo: i32, k_hi: i32) -> TestFunction {
    let count = rng.gen_range(1..=3);
    let mut f = SampledFunction::zeros(grid);
    let mut parts = Vec::with_capacity(count);
    for _ in 0..count {
        let k = rng.gen_range(k_lo..=k_hi);
        let (t, d) = term(grid, rng, k);
        f = f.add(&t).expect("same grid");
        parts.push(d);
    }
    TestFunction {
        f,
        descriptor: parts.join("+"),
    }
}

/// A sum of one to three terms, all inside `A_k`.
pub fn single_annulus_member(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, k: i32) -> TestFunction {
    random_member(grid, rng, k, k)
}

pub fn random_family(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, count: usize, k_lo: i32, k_hi: i32) -> Vec<TestFunction> {
    (0..count).map(|_| random_member(grid, rng, k_lo, k_hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::support_annulus;
    use rand::SeedableRng;

    #[test]
    fn members_are_nonnegative_and_nonzero() {
        for dim in [1, 2] {
            let m = if dim == 1 { 4096 } else { 128 };
            let g = Grid::new(dim, 8.0, m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for t in random_family(&g, &mut rng, 20, g.k_min(), g.k_max()) {
                assert!(!t.f.is_zero(), "{}", t.descriptor);
                assert!(t.f.values().iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn single_annulus_members_stay_in_their_annulus() {
        let g = Grid::new(1, 8.0, 4096).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in g.k_min()..=g.k_max() {
            let t = single_annulus_member(&g, &mut rng, k);
            assert_eq!(support_annulus(&t.f).unwrap(), Some(k), "{}", t.descriptor);
        }
    }

    #[test]
    fn same_seed_same_family() {
        let g = Grid::new(1, 8.0, 1024).unwrap();
        let a = random_family(&g, &mut ChaCha8Rng::seed_from_u64(11), 5, -2, 2);
        let b = random_family(&g, &mut ChaCha8Rng::seed_from_u64(11), 5, -2, 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.descriptor, y.descriptor);
            assert_eq!(x.f, y.f);
        }
    }
}

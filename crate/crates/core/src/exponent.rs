//! Variable exponents q(·) on a centered box, their conjugates, and the
//! log-Hölder regularity checks.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default threshold for the log-Hölder satisfied flags.
pub const DEFAULT_C_MAX: f64 = 50.0;

/// Smallest pair budget accepted by [`check_log_holder`].
pub const MIN_PAIR_BUDGET: usize = 1000;

const PAIR_SEED: u64 = 0x1_0960_1d3e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothShape {
    /// `base + amplitude * exp(-(|x|/width)^2)`
    Gaussian,
    /// `base + amplitude * |x|/width`
    Ramp,
}

/// Closed-form exponent families. Every family is radial or split along
/// the first coordinate, so its extrema over the box are known exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "kebab-case")]
pub enum ExponentFamily {
    Constant {
        value: f64,
    },
    /// `left` on `x_1 < 0`, `right` on `x_1 >= 0`.
    PiecewiseConstant {
        left: f64,
        right: f64,
    },
    SmoothProfile {
        base: f64,
        amplitude: f64,
        width: f64,
        shape: SmoothShape,
    },
    /// `base + amplitude / ln(e + |x|)`
    DecayProfile {
        base: f64,
        amplitude: f64,
    },
}

impl ExponentFamily {
    fn radial(&self, r: f64) -> f64 {
        match *self {
            ExponentFamily::Constant { value } => value,
            ExponentFamily::PiecewiseConstant { .. } => unreachable!("not radial"),
            ExponentFamily::SmoothProfile {
                base,
                amplitude,
                width,
                shape,
            } => match shape {
                SmoothShape::Gaussian => base + amplitude * (-(r / width).powi(2)).exp(),
                SmoothShape::Ramp => base + amplitude * r / width,
            },
            ExponentFamily::DecayProfile { base, amplitude } => base + amplitude / (E + r).ln(),
        }
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        match *self {
            ExponentFamily::PiecewiseConstant { left, right } => {
                if x[0] < 0.0 {
                    left
                } else {
                    right
                }
            }
            _ => self.radial(euclid(x)),
        }
    }

    /// Exact extrema over the box `[-radius, radius]^dim`. Radial families
    /// are monotone in `|x|`, so the extremes sit at the origin and at a
    /// corner.
    fn extremes(&self, dim: usize, radius: f64) -> (f64, f64) {
        match *self {
            ExponentFamily::Constant { value } => (value, value),
            ExponentFamily::PiecewiseConstant { left, right } => (left.min(right), left.max(right)),
            _ => {
                let a = self.radial(0.0);
                let b = self.radial(radius * (dim as f64).sqrt());
                (a.min(b), a.max(b))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Descriptor(msg.to_string()));
        let all_finite = |xs: &[f64]| xs.iter().all(|v| v.is_finite());
        match *self {
            ExponentFamily::Constant { value } if !all_finite(&[value]) => bad("non-finite constant"),
            ExponentFamily::PiecewiseConstant { left, right } if !all_finite(&[left, right]) => bad("non-finite piece"),
            ExponentFamily::SmoothProfile {
                base, amplitude, width, ..
            } => {
                if !all_finite(&[base, amplitude, width]) || width <= 0.0 {
                    bad("smooth profile needs finite base/amplitude and width > 0")
                } else {
                    Ok(())
                }
            }
            ExponentFamily::DecayProfile { base, amplitude } if !all_finite(&[base, amplitude]) => {
                bad("non-finite decay parameters")
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for ExponentFamily {
    type Err = Error;

    /// Compact forms: `const:Q`, `piecewise:L:R`, `decay[:BASE:AMP]`,
    /// `bump:BASE:AMP:WIDTH`, `ramp:BASE:SLOPE`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let nums: Vec<f64> = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Descriptor(format!("bad number {p:?} in exponent {s:?}")))
            })
            .collect::<Result<_>>()?;
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Descriptor(format!(
                    "exponent {s:?}: expected {n} parameters, got {}",
                    nums.len()
                )))
            }
        };
        let family = match head {
            "const" | "constant" => {
                arity(1)?;
                ExponentFamily::Constant { value: nums[0] }
            }
            "piecewise" => {
                arity(2)?;
                ExponentFamily::PiecewiseConstant {
                    left: nums[0],
                    right: nums[1],
                }
            }
            "decay" if nums.is_empty() => ExponentFamily::DecayProfile {
                base: 2.0,
                amplitude: 1.0,
            },
            "decay" => {
                arity(2)?;
                ExponentFamily::DecayProfile {
                    base: nums[0],
                    amplitude: nums[1],
                }
            }
            "bump" => {
                arity(3)?;
                ExponentFamily::SmoothProfile {
                    base: nums[0],
                    amplitude: nums[1],
                    width: nums[2],
                    shape: SmoothShape::Gaussian,
                }
            }
            "ramp" => {
                arity(2)?;
                ExponentFamily::SmoothProfile {
                    base: nums[0],
                    amplitude: nums[1],
                    width: 1.0,
                    shape: SmoothShape::Ramp,
                }
            }
            other => return Err(Error::Descriptor(format!("unknown exponent family {other:?}"))),
        };
        family.validate()?;
        Ok(family)
    }
}

/// Serialized exponent descriptor: `{kind, parameters, domain_radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentDescriptor {
    #[serde(flatten)]
    pub family: ExponentFamily,
    pub domain_radius: f64,
}

#[derive(Debug)]
enum Expr {
    Family(ExponentFamily),
    Conjugate(Arc<Expr>),
    /// `1/q_2 = 1/q_1 - beta/n`
    Sobolev {
        source: Arc<Expr>,
        beta_over_n: f64,
    },
}

impl Expr {
    fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Family(f) => f.evaluate(x),
            Expr::Conjugate(inner) => conjugate_value(inner.evaluate(x)),
            Expr::Sobolev { source, beta_over_n } => sobolev_value(source.evaluate(x), *beta_over_n),
        }
    }
}

fn conjugate_value(q: f64) -> f64 {
    q / (q - 1.0)
}

fn sobolev_value(q1: f64, beta_over_n: f64) -> f64 {
    1.0 / (1.0 / q1 - beta_over_n)
}

fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Which closed form, or derived form, an exponent came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentKind {
    Constant,
    PiecewiseConstant,
    SmoothProfile,
    DecayProfile,
    Conjugate,
    Sobolev,
}

/// A variable exponent in the class 𝒫 on the working box
/// `[-domain_radius, domain_radius]^dim`.
///
/// Immutable and cheap to clone; `q_minus`/`q_plus` are exact extrema of
/// the closed form over the box.
#[derive(Debug, Clone)]
pub struct ExponentFunction {
    expr: Arc<Expr>,
    dim: usize,
    domain_radius: f64,
    q_minus: f64,
    q_plus: f64,
}

impl ExponentFunction {
    pub fn new(family: ExponentFamily, dim: usize, domain_radius: f64) -> Result<Self> {
        family.validate()?;
        if !(dim == 1 || dim == 2) {
            return Err(Error::Descriptor(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(domain_radius > 0.0 && domain_radius.is_finite()) {
            return Err(Error::Descriptor(format!(
                "domain radius must be positive, got {domain_radius}"
            )));
        }
        let (q_minus, q_plus) = family.extremes(dim, domain_radius);
        Self::checked(Arc::new(Expr::Family(family)), dim, domain_radius, q_minus, q_plus)
    }

    pub fn from_descriptor(desc: &ExponentDescriptor, dim: usize) -> Result<Self> {
        Self::new(desc.family.clone(), dim, desc.domain_radius)
    }

    pub fn constant(value: f64, dim: usize, domain_radius: f64) -> Result<Self> {
        Self::new(ExponentFamily::Constant { value }, dim, domain_radius)
    }

    fn checked(expr: Arc<Expr>, dim: usize, domain_radius: f64, q_minus: f64, q_plus: f64) -> Result<Self> {
        if !(q_minus > 1.0 && q_plus.is_finite() && q_minus <= q_plus) {
            return Err(Error::ExponentNotInP { q_minus, q_plus });
        }
        Ok(Self {
            expr,
            dim,
            domain_radius,
            q_minus,
            q_plus,
        })
    }

    /// Same closed form, certified on a different working box.
    pub fn with_domain_radius(&self, domain_radius: f64) -> Result<Self> {
        let expr = self.expr.clone();
        let (lo, hi) = bounds_of(&expr, self.dim, domain_radius);
        Self::checked(expr, self.dim, domain_radius, lo, hi)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.expr.evaluate(x)
    }

    pub fn q_minus(&self) -> f64 {
        self.q_minus
    }

    pub fn q_plus(&self) -> f64 {
        self.q_plus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn is_constant(&self) -> bool {
        self.q_minus == self.q_plus
    }

    pub fn kind(&self) -> ExponentKind {
        match &*self.expr {
            Expr::Family(ExponentFamily::Constant { .. }) => ExponentKind::Constant,
            Expr::Family(ExponentFamily::PiecewiseConstant { .. }) => ExponentKind::PiecewiseConstant,
            Expr::Family(ExponentFamily::SmoothProfile { .. }) => ExponentKind::SmoothProfile,
            Expr::Family(ExponentFamily::DecayProfile { .. }) => ExponentKind::DecayProfile,
            Expr::Conjugate(_) => ExponentKind::Conjugate,
            Expr::Sobolev { .. } => ExponentKind::Sobolev,
        }
    }

    /// `r_q = 1 + 1/q_- - 1/q_+`, the generalized Hölder constant.
    pub fn holder_constant(&self) -> f64 {
        1.0 + 1.0 / self.q_minus - 1.0 / self.q_plus
    }

    pub fn conjugate(&self) -> ExponentFunction {
        conjugate_exponent(self)
    }
}

impl fmt::Display for ExponentFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} exponent on [-{r}, {r}]^{} (q- = {}, q+ = {})",
            self.kind(),
            self.dim,
            self.q_minus,
            self.q_plus,
            r = self.domain_radius
        )
    }
}

fn bounds_of(expr: &Expr, dim: usize, radius: f64) -> (f64, f64) {
    match expr {
        Expr::Family(f) => f.extremes(dim, radius),
        // t -> t/(t-1) is decreasing on (1, inf)
        Expr::Conjugate(inner) => {
            let (lo, hi) = bounds_of(inner, dim, radius);
            (conjugate_value(hi), conjugate_value(lo))
        }
        // t -> 1/(1/t - c) is increasing while 1/t > c
        Expr::Sobolev { source, beta_over_n } => {
            let (lo, hi) = bounds_of(source, dim, radius);
            (sobolev_value(lo, *beta_over_n), sobolev_value(hi, *beta_over_n))
        }
    }
}

pub fn make_exponent(desc: &ExponentDescriptor, dim: usize) -> Result<ExponentFunction> {
    ExponentFunction::from_descriptor(desc, dim)
}

/// Pointwise `q'(x) = q(x)/(q(x) - 1)`, with `(q')_- = (q_+)'` and
/// `(q')_+ = (q_-)'`.
pub fn conjugate_exponent(q: &ExponentFunction) -> ExponentFunction {
    ExponentFunction {
        expr: Arc::new(Expr::Conjugate(q.expr.clone())),
        dim: q.dim,
        domain_radius: q.domain_radius,
        q_minus: conjugate_value(q.q_plus),
        q_plus: conjugate_value(q.q_minus),
    }
}

/// Sobolev target exponent `1/q_2 = 1/q_1 - beta/n`. `beta = 0` returns an
/// exponent equal to `q_1` pointwise.
pub fn sobolev_exponent(q1: &ExponentFunction, beta: f64) -> Result<ExponentFunction> {
    let n = q1.dim as f64;
    let limit = n / q1.q_plus;
    if !(beta >= 0.0 && beta < limit) {
        return Err(Error::BetaOutOfRange { beta, limit });
    }
    let beta_over_n = beta / n;
    let expr = Arc::new(Expr::Sobolev {
        source: q1.expr.clone(),
        beta_over_n,
    });
    ExponentFunction::checked(
        expr,
        q1.dim,
        q1.domain_radius,
        sobolev_value(q1.q_minus, beta_over_n),
        sobolev_value(q1.q_plus, beta_over_n),
    )
}

/// Empirical constants for the local and decay log-Hölder
/// conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogHolderReport {
    pub c_local: f64,
    pub c_decay: f64,
    pub c_max: f64,
    pub local_satisfied: bool,
    pub decay_satisfied: bool,
    pub local_pairs: usize,
    pub decay_pairs: usize,
}

impl LogHolderReport {
    pub fn satisfied(&self) -> bool {
        self.local_satisfied && self.decay_satisfied
    }
}

pub fn check_log_holder(q: &ExponentFunction, pair_budget: usize) -> Result<LogHolderReport> {
    check_log_holder_with(q, pair_budget, DEFAULT_C_MAX)
}

/// Samples pairs in the working box, stratified by distance decade for
/// the local condition and by `|x|` decade for the decay condition, and
/// reports the smallest constants consistent with every sampled pair.
pub fn check_log_holder_with(q: &ExponentFunction, pair_budget: usize, c_max: f64) -> Result<LogHolderReport> {
    if pair_budget < MIN_PAIR_BUDGET {
        return Err(Error::Degenerate {
            needed: MIN_PAIR_BUDGET,
            got: pair_budget,
        });
    }
    let dim = q.dim;
    let radius = q.domain_radius;
    let corner_radius = radius * (dim as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED ^ pair_budget as u64);

    let local_budget = pair_budget / 2;
    let decay_budget = pair_budget - local_budget;

    let in_box = |p: &[f64]| p.iter().all(|v| v.abs() <= radius);
    let random_point =
        |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect() };
    let random_direction = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        if dim == 1 {
            vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }]
        } else {
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![t.cos(), t.sin()]
        }
    };

    // local: |q(x) - q(y)| * (-ln|x - y|) for 0 < |x - y| <= 1/2.
    let decades: Vec<(f64, f64)> = (-9..0).map(|d| (10f64.powi(d), (10f64.powi(d + 1)).min(0.5))).collect();
    let mut c_local = 0.0f64;
    let mut local_pairs = 0usize;
    let per_decade = (local_budget / decades.len()).max(1);
    for &(lo, hi) in &decades {
        let mut drawn = 0;
        let mut attempts = 0;
        while drawn < per_decade && attempts < per_decade * 20 {
            attempts += 1;
            let x = random_point(&mut rng);
            let dist = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
            let dir = random_direction(&mut rng);
            let mut y: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + dist * d).collect();
            if !in_box(&y) {
                y = x.iter().zip(&dir).map(|(a, d)| a - dist * d).collect();
                if !in_box(&y) {
                    continue;
                }
            }
            let sep = euclid(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
            if sep == 0.0 || sep > 0.5 {
                continue;
            }
            let diff = (q.evaluate(&x) - q.evaluate(&y)).abs();
            c_local = c_local.max(diff * -sep.ln());
            drawn += 1;
        }
        local_pairs += drawn;
    }

    // decay: |q(x) - q(y)| * ln(e + |x|) for |y| >= |x|.
    let mut c_decay = 0.0f64;
    let mut decay_pairs = 0usize;
    let mut consider = |x: &[f64], y: &[f64]| {
        let (x, y) = if euclid(y) >= euclid(x) { (x, y) } else { (y, x) };
        let diff = (q.evaluate(x) - q.evaluate(y)).abs();
        c_decay = c_decay.max(diff * (E + euclid(x)).ln());
    };
    // anchors: origin paired with corners and axis endpoints
    let origin = vec![0.0; dim];
    let mut anchors = vec![vec![radius; dim], vec![-radius; dim]];
    for axis in 0..dim {
        let mut e = vec![0.0; dim];
        e[axis] = radius;
        anchors.push(e.clone());
        e[axis] = -radius;
        anchors.push(e);
    }
    for a in &anchors {
        consider(&origin, a);
        decay_pairs += 1;
    }
    let r_lo: f64 = 1e-4;
    let r_hi = corner_radius;
    let n_decades = ((r_hi / r_lo).log10().ceil() as usize).max(1);
    let per_decade = (decay_budget.saturating_sub(decay_pairs) / n_decades).max(1);
    for d in 0..n_decades {
        let lo = r_lo * 10f64.powi(d as i32);
        let hi = (lo * 10.0).min(r_hi);
        let mut drawn = 0;
        let mut attempts = 0;
        while drawn < per_decade && attempts < per_decade * 20 {
            attempts += 1;
            let r = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
            let dir = random_direction(&mut rng);
            let x: Vec<f64> = dir.iter().map(|d| r * d).collect();
            if !in_box(&x) {
                continue;
            }
            let y = random_point(&mut rng);
            consider(&x, &y);
            drawn += 1;
        }
        decay_pairs += drawn;
    }

    if local_pairs + decay_pairs < 2 {
        return Err(Error::Degenerate {
            needed: 2,
            got: local_pairs + decay_pairs,
        });
    }
    Ok(LogHolderReport {
        c_local,
        c_decay,
        c_max,
        local_satisfied: c_local <= c_max,
        decay_satisfied: c_decay <= c_max,
        local_pairs,
        decay_pairs,
    })
}

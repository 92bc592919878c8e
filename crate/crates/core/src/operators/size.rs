//! Empirical constants for the pointwise size conditions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::norms::l1_norm;
use crate::sampling::{support_annulus, SampledFunction};

use super::riesz::kernel_potential_at;
use super::OperatorHandle;

/// The size conditions an operator may satisfy for `f` supported in `A_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SizeCondition {
    /// `|Tf(x)| <= C ∫ |x - y|^{-n} |f(y)| dy` off the support.
    #[serde(rename = "1.1")]
    Kernel,
    /// `|Tf(x)| <= C |x|^{-n} ‖f‖_1` for `|x| >= 2^{k+1}`.
    #[serde(rename = "size-1")]
    Size1,
    /// `|Tf(x)| <= C 2^{-kn} ‖f‖_1` for `|x| <= 2^{k-2}`.
    #[serde(rename = "size-2")]
    Size2,
    /// `|Tf(x)| <= C |x|^{β-n} ‖f‖_1` for `|x| >= 2^{k+1}`.
    #[serde(rename = "equ-5")]
    Equ5,
    /// `|Tf(x)| <= C 2^{k(β-n)} ‖f‖_1` for `|x| <= 2^{k-2}`.
    #[serde(rename = "equ-6")]
    Equ6,
    /// `|Tf(x)| <= C ∫ |x - y|^{β-n} |f(y)| dy` off the support.
    #[serde(rename = "equ-12")]
    Equ12,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zone {
    Outer,
    Inner,
    OffSupport,
}

impl SizeCondition {
    pub const ALL: [SizeCondition; 6] = [
        SizeCondition::Kernel,
        SizeCondition::Size1,
        SizeCondition::Size2,
        SizeCondition::Equ5,
        SizeCondition::Equ6,
        SizeCondition::Equ12,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SizeCondition::Kernel => "(1.1)",
            SizeCondition::Size1 => "(Size-1)",
            SizeCondition::Size2 => "(Size-2)",
            SizeCondition::Equ5 => "(equ.5)",
            SizeCondition::Equ6 => "(equ.6)",
            SizeCondition::Equ12 => "(equ.12)",
        }
    }

    fn zone(self) -> Zone {
        match self {
            SizeCondition::Size1 | SizeCondition::Equ5 => Zone::Outer,
            SizeCondition::Size2 | SizeCondition::Equ6 => Zone::Inner,
            SizeCondition::Kernel | SizeCondition::Equ12 => Zone::OffSupport,
        }
    }

    /// Order of the envelope: the conditions for `T_β` scale with `β`.
    fn order(self, beta: f64) -> f64 {
        match self {
            SizeCondition::Kernel | SizeCondition::Size1 | SizeCondition::Size2 => 0.0,
            _ => beta,
        }
    }
}

impl fmt::Display for SizeCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SizeCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .to_ascii_lowercase()
            .replace('.', "-");
        match key.as_str() {
            "1-1" | "kernel" => Ok(SizeCondition::Kernel),
            "size-1" | "size1" => Ok(SizeCondition::Size1),
            "size-2" | "size2" => Ok(SizeCondition::Size2),
            "equ-5" | "equ5" => Ok(SizeCondition::Equ5),
            "equ-6" | "equ6" => Ok(SizeCondition::Equ6),
            "equ-12" | "equ12" => Ok(SizeCondition::Equ12),
            _ => Err(Error::Descriptor(format!("unknown size condition '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeConditionReport {
    pub condition: SizeCondition,
    pub k: i32,
    /// Largest ratio `|Tf(x)| / envelope(x)` over the zone.
    pub c_estimate: f64,
    pub worst_point: Vec<f64>,
    pub zone_points: usize,
}

/// Smallest `C` for which `condition` holds at every grid point of its
/// zone, for `f` supported in `A_k`.
pub fn estimate_size_constant(
    t: &OperatorHandle,
    f: &SampledFunction,
    k: i32,
    condition: SizeCondition,
) -> Result<SizeConditionReport> {
    let grid = f.grid();
    grid.check_k(k)?;
    if let Some(j) = support_annulus(f)? {
        if j != k {
            return Err(Error::SupportSpansAnnuli { k });
        }
    }
    let n = grid.dim() as f64;
    let zone: Vec<usize> = match condition.zone() {
        Zone::Outer => {
            let r2 = 4f64.powi(k + 1);
            (0..grid.len()).filter(|&i| grid.radius_sq(i) >= r2).collect()
        }
        Zone::Inner => {
            if k - 2 < grid.k_min() {
                Vec::new()
            } else {
                let r2 = 4f64.powi(k - 2);
                (0..grid.len()).filter(|&i| grid.radius_sq(i) <= r2).collect()
            }
        }
        Zone::OffSupport => (0..grid.len()).filter(|&i| f.values()[i] == 0.0).collect(),
    };
    if zone.is_empty() {
        return Err(Error::EmptyZone {
            condition: condition.label().to_string(),
        });
    }

    let worst_of = |ratios: &[f64]| {
        let mut best = (0.0f64, zone[0]);
        for (&i, &r) in zone.iter().zip(ratios) {
            if r > best.0 {
                best = (r, i);
            }
        }
        best
    };
    let report = |c: f64, i: usize| SizeConditionReport {
        condition,
        k,
        c_estimate: c,
        worst_point: grid.coords(i),
        zone_points: zone.len(),
    };

    if f.is_zero() {
        return Ok(report(0.0, zone[0]));
    }
    let tf = t.apply(f)?;
    let l1 = l1_norm(f);
    let beta = condition.order(t.beta());
    let ratios: Vec<f64> = Exec::default().map_slice(&zone, |&i| {
        let value = tf.values()[i].abs();
        let envelope = match condition.zone() {
            Zone::Outer => grid.radius(i).powf(beta - n) * l1,
            Zone::Inner => 2f64.powf(k as f64 * (beta - n)) * l1,
            Zone::OffSupport => kernel_potential_at(f, &grid.coords(i), n - beta),
        };
        if value == 0.0 {
            0.0
        } else {
            value / envelope
        }
    });
    let (c, i) = worst_of(&ratios);
    Ok(report(c, i))
}

//! Sublinear operators: Hardy–Littlewood maximal, fractional maximal,
//! fractional integral, plus user-supplied operators, and the
//! size-condition estimators.

mod maximal;
mod riesz;
mod size;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::exponent::ExponentFunction;
use crate::sampling::SampledFunction;

pub use maximal::{radius_ladder, RUNGS_PER_OCTAVE};
pub use riesz::kernel_potential_at;
pub use size::{estimate_size_constant, SizeCondition, SizeConditionReport};

/// Ball normalization of a maximal-type operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `r^{β-n}`
    RadiusPower,
    /// `|B(x, r)|^{β/n - 1}`
    VolumeFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// Balls centered at the evaluation point.
    Centered,
    /// Balls of the radius ladder centered at grid points within distance
    /// `r` of the evaluation point.
    UncenteredSampled,
}

type OperatorFn = dyn Fn(&SampledFunction) -> Result<SampledFunction> + Send + Sync;

/// A user-supplied operator: a field-to-field map plus the size
/// conditions it claims to satisfy.
#[derive(Clone)]
pub struct CustomOperator {
    apply: Arc<OperatorFn>,
    pub claimed: Vec<SizeCondition>,
}

#[derive(Clone)]
pub enum OperatorKind {
    Maximal,
    FractionalMaximal,
    FractionalIntegral,
    Identity,
    Custom(CustomOperator),
}

impl fmt::Debug for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Maximal => write!(f, "Maximal"),
            OperatorKind::FractionalMaximal => write!(f, "FractionalMaximal"),
            OperatorKind::FractionalIntegral => write!(f, "FractionalIntegral"),
            OperatorKind::Identity => write!(f, "Identity"),
            OperatorKind::Custom(c) => write!(f, "Custom(claims {:?})", c.claimed),
        }
    }
}

/// A named sublinear operator with its order `beta` and ball conventions.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    name: String,
    kind: OperatorKind,
    beta: f64,
    normalization: Normalization,
    centering: Centering,
}

/// Serializable summary of a handle, used in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSummary {
    pub name: String,
    pub beta: f64,
    pub normalization: Normalization,
    pub centering: Centering,
}

impl OperatorHandle {
    /// `Mf(x) = sup_r r^{-n} ∫_{B(x,r)} |f|`.
    pub fn maximal() -> Self {
        Self {
            name: "maximal".into(),
            kind: OperatorKind::Maximal,
            beta: 0.0,
            normalization: Normalization::RadiusPower,
            centering: Centering::Centered,
        }
    }

    /// `M_β f(x) = sup_B |B|^{β/n - 1} ∫_B |f|`.
    pub fn fractional_maximal(beta: f64) -> Self {
        Self {
            name: "fractional-maximal".into(),
            kind: OperatorKind::FractionalMaximal,
            beta,
            normalization: Normalization::VolumeFraction,
            centering: Centering::Centered,
        }
    }

    /// `I_β f(x) = ∫ f(y) |x - y|^{β - n} dy`.
    pub fn fractional_integral(beta: f64) -> Self {
        Self {
            name: "fractional-integral".into(),
            kind: OperatorKind::FractionalIntegral,
            beta,
            normalization: Normalization::RadiusPower,
            centering: Centering::Centered,
        }
    }

    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            kind: OperatorKind::Identity,
            beta: 0.0,
            normalization: Normalization::RadiusPower,
            centering: Centering::Centered,
        }
    }

    pub fn custom<F>(name: impl Into<String>, beta: f64, claimed: Vec<SizeCondition>, apply: F) -> Self
    where
        F: Fn(&SampledFunction) -> Result<SampledFunction> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: OperatorKind::Custom(CustomOperator {
                apply: Arc::new(apply),
                claimed,
            }),
            beta,
            normalization: Normalization::RadiusPower,
            centering: Centering::Centered,
        }
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn with_centering(mut self, centering: Centering) -> Self {
        self.centering = centering;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn summary(&self) -> OperatorSummary {
        OperatorSummary {
            name: self.name.clone(),
            beta: self.beta,
            normalization: self.normalization,
            centering: self.centering,
        }
    }

    /// Checks `beta < n / (q_1)_+` for use with source exponent `q1`.
    pub fn check_source_exponent(&self, q1: &ExponentFunction) -> Result<()> {
        let limit = q1.dim() as f64 / q1.q_plus();
        if self.beta > 0.0 && self.beta >= limit {
            return Err(Error::BetaOutOfRange { beta: self.beta, limit });
        }
        Ok(())
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.apply_with(f, Exec::default())
    }

    pub fn apply_with(&self, f: &SampledFunction, exec: Exec) -> Result<SampledFunction> {
        match &self.kind {
            OperatorKind::Maximal | OperatorKind::FractionalMaximal => {
                self.check_beta(f.grid().dim())?;
                Ok(maximal::field(f, self.beta, self.normalization, self.centering, exec))
            }
            OperatorKind::FractionalIntegral => {
                self.check_beta(f.grid().dim())?;
                Ok(riesz::field(f, self.beta, exec))
            }
            OperatorKind::Identity => Ok(f.clone()),
            OperatorKind::Custom(c) => {
                let out = (c.apply)(f)?;
                f.same_grid(&out)?;
                Ok(out)
            }
        }
    }

    /// Value of the operator at an arbitrary point of the box. Custom
    /// operators fall back to the grid cell containing `x`.
    pub fn evaluate_at(&self, f: &SampledFunction, x: &[f64]) -> Result<f64> {
        let grid = f.grid();
        if x.len() != grid.dim() || x.iter().any(|v| !v.is_finite() || v.abs() > grid.half_width()) {
            return Err(Error::Operator {
                name: self.name.clone(),
                reason: format!("point {x:?} outside the grid box"),
            });
        }
        match &self.kind {
            OperatorKind::Maximal | OperatorKind::FractionalMaximal => {
                self.check_beta(grid.dim())?;
                Ok(maximal::at_point(f, x, self.beta, self.normalization, self.centering))
            }
            OperatorKind::FractionalIntegral => {
                self.check_beta(grid.dim())?;
                Ok(riesz::at_point(f, x, self.beta))
            }
            _ => {
                let field = self.apply(f)?;
                let h = grid.spacing();
                let m = grid.m();
                let cell = |v: f64| (((v + grid.half_width()) / h).floor() as usize).min(m - 1);
                let idx = if grid.dim() == 1 {
                    cell(x[0])
                } else {
                    cell(x[1]) * m + cell(x[0])
                };
                Ok(field.values()[idx])
            }
        }
    }

    fn check_beta(&self, dim: usize) -> Result<()> {
        let n = dim as f64;
        let ok = match self.kind {
            OperatorKind::Maximal => self.beta == 0.0,
            OperatorKind::FractionalMaximal => self.beta > 0.0 && self.beta < n,
            OperatorKind::FractionalIntegral => self.beta > 0.0 && self.beta < n,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BetaOutOfRange {
                beta: self.beta,
                limit: n,
            })
        }
    }
}

/// Hardy–Littlewood maximal function; `handle.beta` must be zero.
pub fn maximal(f: &SampledFunction, handle: &OperatorHandle) -> Result<SampledFunction> {
    if handle.beta != 0.0 {
        return Err(Error::BetaOutOfRange {
            beta: handle.beta,
            limit: 0.0,
        });
    }
    Ok(maximal::field(
        f,
        0.0,
        handle.normalization,
        handle.centering,
        Exec::default(),
    ))
}

/// Fractional maximal function; requires `0 < handle.beta < n`.
pub fn fractional_maximal(f: &SampledFunction, handle: &OperatorHandle) -> Result<SampledFunction> {
    let n = f.grid().dim() as f64;
    if !(handle.beta > 0.0 && handle.beta < n) {
        return Err(Error::BetaOutOfRange {
            beta: handle.beta,
            limit: n,
        });
    }
    Ok(maximal::field(
        f,
        handle.beta,
        handle.normalization,
        handle.centering,
        Exec::default(),
    ))
}

/// Riesz potential `I_β f`; requires `0 < beta < n`.
pub fn fractional_integral(f: &SampledFunction, beta: f64) -> Result<SampledFunction> {
    OperatorHandle::fractional_integral(beta).apply(f)
}

/// Named operators available to configuration files and the CLI.
#[derive(Clone, Default)]
pub struct OperatorRegistry {
    custom: BTreeMap<String, OperatorHandle>,
}

impl OperatorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, handle: OperatorHandle) {
        self.custom.insert(handle.name.clone(), handle);
    }

    /// Resolves `name` with order `beta`. Built-in names: `maximal`,
    /// `fmaximal`, `ibeta`, `identity`.
    pub fn resolve(&self, name: &str, beta: f64) -> Result<OperatorHandle> {
        match name {
            "maximal" | "M" => Ok(OperatorHandle::maximal()),
            "fmaximal" | "fractional-maximal" | "M_beta" => Ok(OperatorHandle::fractional_maximal(beta)),
            "ibeta" | "fractional-integral" | "I_beta" => Ok(OperatorHandle::fractional_integral(beta)),
            "identity" => Ok(OperatorHandle::identity()),
            other => self.custom.get(other).cloned().ok_or_else(|| Error::Operator {
                name: other.to_string(),
                reason: "not registered".into(),
            }),
        }
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["maximal", "fmaximal", "ibeta", "identity"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        names.extend(self.custom.keys().cloned());
        names
    }
}

//! Numerical checks of the lemmas, propositions and boundedness theorems.
//!
//! Every check produces an [`InequalityReport`]: a list of cases of the
//! form `lhs <= C * rhs`, the largest observed ratio as the estimate of
//! `C`, a stability flag, and the named checks that decide pass or fail.
//! Random inputs come from a seeded generator and every case list is
//! assembled in a fixed order, so reports are reproducible bit for bit.

mod family;
mod lemmas;
mod theorems;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::exec::Exec;
use crate::sampling::Grid;

pub use family::{random_family, random_member, single_annulus_member, TestFunction};
pub use lemmas::{
    estimate_delta, estimate_delta_on, verify_delta, verify_duality_bound, verify_hls, verify_holder, verify_lemma_2_3,
    verify_maximal_boundedness, verify_power_sums, verify_prop_2_4, DeltaEstimate, DeltaWindow,
};
pub use theorems::{
    admissible_window_3_1, admissible_window_3_2, decompose_e_terms, verify_decomposition, verify_theorem_3_1,
    verify_theorem_3_2, AlphaWindow, ETerms, TargetSpace,
};

/// Relative change below which an estimated constant counts as stable.
pub const STABILITY_TOLERANCE: f64 = 0.25;

/// Grid, seed and execution strategy shared by a batch of checks.
#[derive(Debug, Clone)]
pub struct VerifyContext {
    pub grid: Arc<Grid>,
    pub seed: u64,
    pub exec: Exec,
}

impl VerifyContext {
    pub fn new(grid: Arc<Grid>, seed: u64) -> Self {
        Self {
            grid,
            seed,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Independent stream per purpose, derived from the context seed.
    pub(crate) fn rng(&self, purpose: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(purpose.as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// One instance `lhs <= C * rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub descriptor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl Case {
    pub fn new(descriptor: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            descriptor: descriptor.into(),
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
        }
    }
}

/// `lhs / rhs` with `0 / 0 = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `|b - a| / a`, with `0` when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Unasserted checks are informational and do not affect `passed`.
    pub asserted: bool,
    pub detail: String,
}

/// Run information excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generated_unix_ms: u128,
    pub elapsed_ms: f64,
    pub parallel: bool,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub statement_id: String,
    pub params: BTreeMap<String, Value>,
    pub cases: Vec<Case>,
    /// Largest `ratio` over the cases.
    pub c_estimate: f64,
    pub stable: bool,
    pub admissible: bool,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub metadata: Metadata,
}

impl InequalityReport {
    /// JSON of everything except `metadata`, for run-to-run comparison.
    pub fn canonical(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut value {
            map.remove("metadata");
        }
        value.to_string()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.asserted && !c.passed)
    }
}

pub(crate) struct ReportBuilder {
    statement_id: String,
    params: BTreeMap<String, Value>,
    cases: Vec<Case>,
    stable: bool,
    admissible: bool,
    checks: Vec<Check>,
    started: Instant,
    exec: Exec,
}

impl ReportBuilder {
    pub(crate) fn new(statement_id: &str, exec: Exec) -> Self {
        Self {
            statement_id: statement_id.to_string(),
            params: BTreeMap::new(),
            cases: Vec::new(),
            stable: true,
            admissible: true,
            checks: Vec::new(),
            started: Instant::now(),
            exec,
        }
    }

    pub(crate) fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params
            .insert(key.to_string(), serde_json::to_value(value).expect("param serializes"));
        self
    }

    pub(crate) fn cases(&mut self, cases: impl IntoIterator<Item = Case>) -> &mut Self {
        self.cases.extend(cases);
        self
    }

    pub(crate) fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> &mut Self {
        self.push_check(name, passed, true, detail)
    }

    pub(crate) fn note(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> &mut Self {
        self.push_check(name, passed, false, detail)
    }

    fn push_check(&mut self, name: &str, passed: bool, asserted: bool, detail: impl Into<String>) -> &mut Self {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            asserted,
            detail: detail.into(),
        });
        self
    }

    pub(crate) fn stable(&mut self, stable: bool) -> &mut Self {
        self.stable = stable;
        self
    }

    pub(crate) fn admissible(&mut self, admissible: bool) -> &mut Self {
        self.admissible = admissible;
        self
    }

    pub(crate) fn finish(&mut self) -> InequalityReport {
        let c_estimate = max_ratio(&self.cases);
        let passed = self.checks.iter().all(|c| !c.asserted || c.passed);
        InequalityReport {
            statement_id: self.statement_id.clone(),
            params: std::mem::take(&mut self.params),
            cases: std::mem::take(&mut self.cases),
            c_estimate,
            stable: self.stable,
            admissible: self.admissible,
            checks: std::mem::take(&mut self.checks),
            passed,
            metadata: Metadata {
                generated_unix_ms: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or(0),
                elapsed_ms: self.started.elapsed().as_secs_f64() * 1e3,
                parallel: self.exec.is_parallel(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }
}

pub(crate) fn max_ratio(cases: &[Case]) -> f64 {
    cases.iter().map(|c| c.ratio).fold(0.0, f64::max)
}

/// Stability of a trial-count sweep: the estimate over the first half of
/// the cases against the estimate over all of them.
pub(crate) fn trial_doubling(cases: &[Case]) -> (f64, f64, bool) {
    let half = max_ratio(&cases[..cases.len() / 2]);
    let full = max_ratio(cases);
    (half, full, relative_change(half, full) < STABILITY_TOLERANCE)
}

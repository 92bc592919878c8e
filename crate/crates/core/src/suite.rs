//! Batch configuration for the verification harness and report output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::exponent::{ExponentDescriptor, ExponentFamily, ExponentFunction};
use crate::norms::HerzMorreyParams;
use crate::operators::{estimate_size_constant, OperatorHandle, OperatorRegistry, SizeCondition};
use crate::sampling::{annulus_indicator, Grid, GridSpec};
use crate::verify::{
    admissible_window_3_1, admissible_window_3_2, verify_decomposition, verify_delta, verify_duality_bound, verify_hls,
    verify_holder, verify_lemma_2_3, verify_maximal_boundedness, verify_power_sums, verify_prop_2_4,
    verify_theorem_3_1, verify_theorem_3_2, Case, InequalityReport, ReportBuilder, TargetSpace, VerifyContext,
};

/// Sequences drawn by the power-sum check.
const POWER_SUM_TRIALS: usize = 1000;

/// Relative change allowed for size constants under `m -> 2m`.
pub const REFINEMENT_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    /// Compact form such as `const:2` or `decay`, certified on the grid box.
    Compact(String),
    Descriptor(ExponentDescriptor),
}

impl ExponentSpec {
    pub fn resolve(&self, grid: &Grid) -> Result<ExponentFunction> {
        match self {
            ExponentSpec::Compact(s) => {
                ExponentFunction::new(s.parse::<ExponentFamily>()?, grid.dim(), grid.half_width())
            }
            ExponentSpec::Descriptor(d) => ExponentFunction::from_descriptor(d, grid.dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub name: String,
    #[serde(default)]
    pub beta: f64,
}

/// Herz–Morrey indices. `alpha = None` selects the midpoint of the
/// admissible window; `p2` defaults to `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(default)]
    pub alpha: Option<f64>,
    pub lambda: f64,
    pub p: f64,
    #[serde(default)]
    pub p2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Lemmas,
    Theorem31,
    Theorem32,
    Size,
    Decomposition,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 5] = [
        SuiteKind::Lemmas,
        SuiteKind::Theorem31,
        SuiteKind::Theorem32,
        SuiteKind::Size,
        SuiteKind::Decomposition,
    ];
}

impl std::str::FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
            .map_err(|_| Error::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub csv: bool,
}

fn default_true() -> bool {
    true
}

fn default_trials() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub grid: GridSpec,
    pub exponents: Vec<ExponentSpec>,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default)]
    pub spaces: Vec<SpaceSpec>,
    pub suites: Vec<SuiteKind>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn spaces(&self) -> Vec<SpaceSpec> {
        if self.spaces.is_empty() {
            vec![SpaceSpec {
                alpha: None,
                lambda: 0.5,
                p: 1.0,
                p2: None,
            }]
        } else {
            self.spaces.clone()
        }
    }

    fn handles(&self, registry: &OperatorRegistry) -> Result<Vec<OperatorHandle>> {
        self.operators
            .iter()
            .map(|o| registry.resolve(&o.name, o.beta))
            .collect()
    }
}

/// Operators of order zero, defaulting to `M`.
fn order_zero(ops: &[OperatorHandle]) -> Vec<OperatorHandle> {
    let v: Vec<_> = ops.iter().filter(|t| t.beta() == 0.0).cloned().collect();
    if v.is_empty() {
        vec![OperatorHandle::maximal()]
    } else {
        v
    }
}

/// Operators of positive order, defaulting to `I_{1/4}`.
fn fractional(ops: &[OperatorHandle]) -> Vec<OperatorHandle> {
    let v: Vec<_> = ops.iter().filter(|t| t.beta() > 0.0).cloned().collect();
    if v.is_empty() {
        vec![OperatorHandle::fractional_integral(0.25)]
    } else {
        v
    }
}

fn lemma_suite(
    ctx: &VerifyContext,
    q: &ExponentFunction,
    betas: &[f64],
    trials: usize,
    out: &mut Vec<InequalityReport>,
) -> Result<()> {
    let k_lo = ctx.grid.k_min().max(ctx.grid.ball_k_min());
    let k_hi = ctx.grid.k_max();
    out.push(verify_holder(ctx, q, trials)?);
    out.push(verify_duality_bound(ctx, q, trials)?);
    out.push(verify_delta(ctx, q)?);
    out.push(verify_lemma_2_3(ctx, q, k_lo, k_hi)?);
    for &beta in betas {
        out.push(verify_prop_2_4(ctx, q, beta, k_lo, k_hi)?);
        out.push(verify_hls(ctx, q, beta, trials)?);
    }
    out.push(verify_maximal_boundedness(ctx, q, trials)?);
    Ok(())
}

/// Size constants on `χ_{A_k}`, `k = k_min + 3`, with their change under
/// grid refinement.
pub fn size_report(ctx: &VerifyContext, t: &OperatorHandle) -> Result<InequalityReport> {
    let conditions: &[SizeCondition] = if t.beta() == 0.0 {
        &[SizeCondition::Kernel, SizeCondition::Size1, SizeCondition::Size2]
    } else {
        &[SizeCondition::Equ5, SizeCondition::Equ6, SizeCondition::Equ12]
    };
    let spec = ctx.grid.spec();
    let fine = GridSpec {
        m: spec.m * 2,
        k_min: Some(ctx.grid.k_min()),
        k_max: Some(ctx.grid.k_max()),
        ..spec
    }
    .build()?;
    let k = ctx.grid.k_min() + 3;
    let chi = annulus_indicator(&ctx.grid, k)?;
    let chi_fine = annulus_indicator(&fine, k)?;
    let mut b = ReportBuilder::new("SizeConditions", ctx.exec);
    b.param("operator", t.summary())
        .param("k", k)
        .param("m_refined", fine.m());
    let mut cases = Vec::new();
    let mut stable = true;
    for &c in conditions {
        let coarse = estimate_size_constant(t, &chi, k, c)?;
        let refined = estimate_size_constant(t, &chi_fine, k, c)?;
        let change = crate::verify::relative_change(coarse.c_estimate, refined.c_estimate);
        stable &= change < REFINEMENT_TOLERANCE;
        b.check(
            c.label(),
            coarse.c_estimate.is_finite(),
            format!(
                "C = {:.6} (m = {}), {:.6} (m = {}), worst point {:?}",
                coarse.c_estimate,
                ctx.grid.m(),
                refined.c_estimate,
                fine.m(),
                coarse.worst_point
            ),
        );
        b.check(
            &format!("{} refinement", c.label()),
            change < REFINEMENT_TOLERANCE,
            format!("relative change {change:.4}"),
        );
        cases.push(Case::new(c.label(), coarse.c_estimate, 1.0));
    }
    b.stable(stable);
    Ok(b.cases(cases).finish())
}

/// Runs every selected suite. Reports come back in a fixed order: suite,
/// then exponent, then space, then operator.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<InequalityReport>> {
    run_suite_with(config, &OperatorRegistry::new(), Exec::default())
}

pub fn run_suite_with(config: &SuiteConfig, registry: &OperatorRegistry, exec: Exec) -> Result<Vec<InequalityReport>> {
    if config.exponents.is_empty() && config.suites.iter().any(|s| *s != SuiteKind::Size) {
        return Err(Error::Config("no exponents given".into()));
    }
    let grid = config.grid.build()?;
    let ctx = VerifyContext::new(grid.clone(), config.seed).with_exec(exec);
    let exponents: Vec<ExponentFunction> = config
        .exponents
        .iter()
        .map(|e| e.resolve(&grid))
        .collect::<Result<_>>()?;
    let ops = config.handles(registry)?;
    let trials = config.trials;
    let mut out = Vec::new();
    for suite in &config.suites {
        match suite {
            SuiteKind::Lemmas => {
                out.push(verify_power_sums(&ctx, POWER_SUM_TRIALS)?);
                let mut betas: Vec<f64> = fractional(&ops).iter().map(|t| t.beta()).collect();
                betas.sort_by(f64::total_cmp);
                betas.dedup();
                for q in &exponents {
                    lemma_suite(&ctx, q, &betas, trials, &mut out)?;
                }
            }
            SuiteKind::Theorem31 => {
                for q in &exponents {
                    for s in config.spaces() {
                        let alpha = match s.alpha {
                            Some(a) => a,
                            None => admissible_window_3_1(&ctx, q, s.lambda)?.midpoint(),
                        };
                        let params = HerzMorreyParams::new(alpha, s.lambda, s.p, q.clone(), &grid)?;
                        for t in order_zero(&ops) {
                            out.push(verify_theorem_3_1(&ctx, &t, &params, trials)?);
                        }
                    }
                }
            }
            SuiteKind::Theorem32 => {
                for q in &exponents {
                    for s in config.spaces() {
                        for t in fractional(&ops) {
                            let alpha = match s.alpha {
                                Some(a) => a,
                                None => admissible_window_3_2(&ctx, q, t.beta(), s.lambda)?.midpoint(),
                            };
                            let space = TargetSpace {
                                alpha,
                                lambda: s.lambda,
                                p1: s.p,
                                p2: s.p2.unwrap_or(s.p),
                            };
                            out.push(verify_theorem_3_2(&ctx, &t, q, &space, trials)?);
                        }
                    }
                }
            }
            SuiteKind::Size => {
                let ops = if ops.is_empty() {
                    vec![OperatorHandle::maximal(), OperatorHandle::fractional_integral(0.25)]
                } else {
                    ops.clone()
                };
                for t in &ops {
                    out.push(size_report(&ctx, t)?);
                }
            }
            SuiteKind::Decomposition => {
                for q in &exponents {
                    for s in config.spaces() {
                        let alpha = match s.alpha {
                            Some(a) => a,
                            None => admissible_window_3_1(&ctx, q, s.lambda)?.midpoint(),
                        };
                        let params = HerzMorreyParams::new(alpha, s.lambda, s.p, q.clone(), &grid)?;
                        for t in order_zero(&ops) {
                            out.push(verify_decomposition(&ctx, &t, &params, trials.min(10))?);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// File name of the `idx`-th report.
pub fn report_file_name(idx: usize, report: &InequalityReport) -> String {
    let id: String = report
        .statement_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{idx:03}_{id}.json")
}

/// CSV of every case, header `statement_id,case,lhs,rhs,ratio`.
pub fn cases_csv(reports: &[InequalityReport]) -> String {
    let mut s = String::from("statement_id,case,lhs,rhs,ratio\n");
    for r in reports {
        for (i, c) in r.cases.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{:e},{:e},{:e}\n",
                r.statement_id, i, c.lhs, c.rhs, c.ratio
            ));
        }
    }
    s
}

/// Writes one JSON document per report and, if requested, `cases.csv`.
pub fn write_reports(reports: &[InequalityReport], dir: &Path, csv: bool) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(reports.len() + 1);
    for (idx, r) in reports.iter().enumerate() {
        let path = dir.join(report_file_name(idx, r));
        let mut file = fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut file, r)?;
        file.write_all(b"\n")?;
        written.push(path);
    }
    if csv {
        let path = dir.join("cases.csv");
        fs::write(&path, cases_csv(reports))?;
        written.push(path);
    }
    Ok(written)
}

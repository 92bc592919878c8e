//! Variable-exponent Lebesgue, Herz and Herz–Morrey norms on uniform
//! grids, the maximal, fractional maximal and fractional integral
//! operators, and a harness that checks the boundedness inequalities of
//! these operators numerically.
//!
//! Hot loops run on rayon when the default `parallel` feature is enabled;
//! see [`Exec`].

pub mod error;
pub mod exec;
pub mod exponent;
pub mod norms;
pub mod operators;
mod quadrature;
pub mod sampling;
pub mod suite;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use exponent::{
    check_log_holder, check_log_holder_with, conjugate_exponent, make_exponent, sobolev_exponent, ExponentDescriptor,
    ExponentFamily, ExponentFunction, ExponentKind, LogHolderReport, SmoothShape,
};
pub use norms::{
    annular_norms, herz_morrey_evaluate, herz_morrey_evaluate_with, herz_morrey_norm, herz_norm, herz_norm_with,
    l1_norm, luxemburg_norm, luxemburg_norm_on, luxemburg_norm_traced, modular, power_sum_sides, HerzMorreyEvaluation,
    HerzMorreyParams, ModularCurve,
};
pub use operators::{
    estimate_size_constant, fractional_integral, fractional_maximal, kernel_potential_at, maximal, radius_ladder,
    Centering, Normalization, OperatorHandle, OperatorKind, OperatorRegistry, OperatorSummary, SizeCondition,
    SizeConditionReport,
};
pub use sampling::{
    annulus_indicator, annulus_restrict, ball_indicator, integrate, support_annulus, unit_ball_volume, Grid, GridSpec,
    SampledFunction,
};
pub use suite::{run_suite, run_suite_with, write_reports, SuiteConfig, SuiteKind};
pub use verify::{
    admissible_window_3_1, admissible_window_3_2, decompose_e_terms, estimate_delta, estimate_delta_on,
    verify_decomposition, verify_delta, verify_duality_bound, verify_hls, verify_holder, verify_lemma_2_3,
    verify_maximal_boundedness, verify_power_sums, verify_prop_2_4, verify_theorem_3_1, verify_theorem_3_2,
    AlphaWindow, Case, Check, DeltaEstimate, DeltaWindow, ETerms, InequalityReport, TargetSpace, VerifyContext,
};

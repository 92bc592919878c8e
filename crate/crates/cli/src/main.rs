//! Command-line front-end: norms, operator values and verification suites.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use herzmorrey::suite::{ExponentSpec, OperatorSpec, OutputSpec, SpaceSpec};
use herzmorrey::{
    annulus_indicator, ball_indicator, herz_morrey_norm, herz_norm, luxemburg_norm_traced, run_suite, write_reports,
    Error, ExponentFamily, ExponentFunction, Grid, GridSpec, HerzMorreyParams, OperatorRegistry, SampledFunction,
    SuiteConfig, SuiteKind,
};

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "herzmorrey",
    version,
    about = "Variable-exponent Herz-Morrey norms and operator bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Luxemburg, Herz or Herz-Morrey norm of a function
    Norm(NormArgs),
    /// Operator values at points, or the full field as CSV
    Operator(OperatorArgs),
    /// Run verification suites and write JSON/CSV reports
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Dimension, 1 or 2
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Half-width R of the box [-R, R]^n
    #[arg(long, default_value_t = 8.0)]
    radius: f64,
    /// Cells per axis; defaults to 4096 in 1D and 512 in 2D
    #[arg(long)]
    m: Option<usize>,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        let m = self.m.unwrap_or(if self.dim == 2 { 512 } else { 4096 });
        GridSpec::new(self.dim, self.radius, m)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Lq,
    Herz,
    HerzMorrey,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long, value_enum, default_value = "lq")]
    space: Space,
    /// Exponent, e.g. const:2, piecewise:2:3, decay, bump:2:1:1, ramp:2:0.1
    #[arg(long, default_value = "const:2")]
    q: String,
    /// Function: indicator:A:B, annulus:K, ball:K, bump[:C[:W]], zero
    #[arg(long)]
    f: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Write the modular evaluations (eta, rho) of the Luxemburg solve as CSV
    #[arg(long)]
    dump: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct OperatorArgs {
    /// maximal, fmaximal, ibeta or identity
    name: String,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long)]
    f: String,
    /// Evaluation point, `x` or `x,y`; repeatable
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<String>,
    /// Write the field on the grid as CSV
    #[arg(long)]
    dump: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// lemmas, theorem31, theorem32, size, decomposition or all; repeatable
    #[arg(long)]
    suite: Vec<String>,
    /// Exponent; repeatable
    #[arg(long)]
    q: Vec<String>,
    /// Operator as NAME or NAME:BETA; repeatable
    #[arg(long)]
    operator: Vec<String>,
    /// Omit to use the midpoint of the admissible window
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON suite configuration; flags given alongside override its output and seed
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

enum Failure {
    Lib(Error),
    Usage(String),
    Assertion(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn parse_num(s: &str, what: &str) -> Result<f64, Failure> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("bad number {s:?} in {what}")))
}

fn parse_function(spec: &str, grid: &Arc<Grid>) -> Result<SampledFunction, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums =
        |from: usize| -> Result<Vec<f64>, Failure> { parts[from..].iter().map(|p| parse_num(p, spec)).collect() };
    let int = |s: &str| -> Result<i32, Failure> {
        s.trim()
            .parse()
            .map_err(|_| usage(format!("bad index {s:?} in {spec}")))
    };
    match (parts[0], parts.len()) {
        ("zero", 1) => Ok(SampledFunction::zeros(grid)),
        ("indicator", 3) => {
            let v = nums(1)?;
            let (a, b) = (v[0], v[1]);
            Ok(SampledFunction::indicator(grid, |x| {
                x.iter().all(|&t| a <= t && t <= b)
            }))
        }
        ("annulus", 2) => Ok(annulus_indicator(grid, int(parts[1])?)?),
        ("ball", 2) => Ok(ball_indicator(grid, int(parts[1])?)?),
        ("bump", 1..=3) => {
            let v = nums(1)?;
            let c = v.first().copied().unwrap_or(0.0);
            let w = v.get(1).copied().unwrap_or(1.0);
            if w.is_nan() || w <= 0.0 {
                return Err(usage(format!("bump width must be positive in {spec}")));
            }
            Ok(SampledFunction::from_fn(grid, |x| {
                let d2 = (x[0] - c).powi(2) + x[1..].iter().map(|t| t * t).sum::<f64>();
                let t = 1.0 - d2 / (w * w);
                if t > 0.0 {
                    t * t
                } else {
                    0.0
                }
            })?)
        }
        _ => Err(usage(format!(
            "unknown function {spec:?}; expected indicator:A:B, annulus:K, ball:K, bump[:C[:W]] or zero"
        ))),
    }
}

fn parse_exponent(s: &str, grid: &Grid) -> Result<ExponentFunction, Failure> {
    let family: ExponentFamily = s.parse()?;
    Ok(ExponentFunction::new(family, grid.dim(), grid.half_width())?)
}

fn cmd_norm(args: NormArgs) -> Result<(), Failure> {
    let grid = args.grid.spec().build()?;
    let q = parse_exponent(&args.q, &grid)?;
    let f = parse_function(&args.f, &grid)?;
    let value = match args.space {
        Space::Lq => {
            let (norm, curve) = luxemburg_norm_traced(&f, &q)?;
            if let Some(path) = &args.dump {
                let mut csv = String::from("eta,modular\n");
                for (eta, rho) in &curve.evaluations {
                    let _ = writeln!(csv, "{eta:e},{rho:e}");
                }
                fs::write(path, csv).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            norm
        }
        Space::Herz => herz_norm(&f, args.alpha, args.p, &q)?,
        Space::HerzMorrey => {
            let params = HerzMorreyParams::new(args.alpha, args.lambda, args.p, q, &grid)?;
            herz_morrey_norm(&f, &params)?
        }
    };
    println!("{}", fmt6(value));
    Ok(())
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>, Failure> {
    let x: Vec<f64> = s.split(',').map(|t| parse_num(t, s)).collect::<Result<_, _>>()?;
    if x.len() != dim {
        return Err(usage(format!(
            "point {s:?} has {} coordinates, the grid has dimension {dim}",
            x.len()
        )));
    }
    Ok(x)
}

fn cmd_operator(args: OperatorArgs) -> Result<(), Failure> {
    let grid = args.grid.spec().build()?;
    let f = parse_function(&args.f, &grid)?;
    let t = OperatorRegistry::new().resolve(&args.name, args.beta)?;
    if args.at.is_empty() && args.dump.is_none() {
        return Err(usage("give at least one --at point or --dump"));
    }
    let single = args.at.len() == 1;
    for s in &args.at {
        let x = parse_point(s, grid.dim())?;
        let v = t.evaluate_at(&f, &x)?;
        if single {
            println!("{}", fmt6(v));
        } else {
            println!("{s}\t{}", fmt6(v));
        }
    }
    if let Some(path) = &args.dump {
        let field = t.apply(&f)?;
        let mut csv = String::from(if grid.dim() == 1 { "x,f,Tf\n" } else { "x,y,f,Tf\n" });
        for (i, (fv, tv)) in f.values().iter().zip(field.values()).enumerate() {
            for c in grid.coords(i) {
                let _ = write!(csv, "{c:e},");
            }
            let _ = writeln!(csv, "{fv:e},{tv:e}");
        }
        fs::write(path, csv).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn parse_operator(s: &str) -> Result<OperatorSpec, Failure> {
    match s.split_once(':') {
        Some((name, beta)) => Ok(OperatorSpec {
            name: name.to_string(),
            beta: parse_num(beta, s)?,
        }),
        None => Ok(OperatorSpec {
            name: s.to_string(),
            beta: 0.0,
        }),
    }
}

fn config_from_flags(args: &VerifyArgs) -> Result<SuiteConfig, Failure> {
    let mut suites = Vec::new();
    for s in &args.suite {
        if s == "all" {
            suites.extend(SuiteKind::ALL);
        } else {
            suites.push(s.parse::<SuiteKind>()?);
        }
    }
    if suites.is_empty() {
        return Err(usage("give --suite or --config"));
    }
    let exponents = if args.q.is_empty() {
        vec![ExponentSpec::Compact("const:2".into())]
    } else {
        args.q.iter().map(|s| ExponentSpec::Compact(s.clone())).collect()
    };
    Ok(SuiteConfig {
        grid: args.grid.spec(),
        exponents,
        operators: args
            .operator
            .iter()
            .map(|s| parse_operator(s))
            .collect::<Result<_, _>>()?,
        spaces: vec![SpaceSpec {
            alpha: args.alpha,
            lambda: args.lambda,
            p: args.p,
            p2: args.p2,
        }],
        suites,
        trials: args.trials,
        seed: args.seed.unwrap_or(42),
        output: OutputSpec { dir: None, csv: true },
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => SuiteConfig::load(path)?,
        None => config_from_flags(&args)?,
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output.dir = Some(out.clone());
    }
    let reports = run_suite(&config)?;
    let dir = config
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("herzmorrey-reports"));
    write_reports(&reports, &dir, config.output.csv).map_err(|e| usage(format!("{}: {e}", dir.display())))?;

    println!(
        "{:<28} {:>12} {:>7} {:>10}  result",
        "statement", "c_estimate", "stable", "admissible"
    );
    let mut failed = 0;
    for r in &reports {
        println!(
            "{:<28} {:>12} {:>7} {:>10}  {}",
            r.statement_id,
            fmt6(r.c_estimate),
            r.stable,
            r.admissible,
            if r.passed { "PASS" } else { "FAIL" }
        );
        for c in r.failed_checks() {
            println!("    failed {}: {}", c.name, c.detail);
        }
        if !r.passed {
            failed += 1;
        }
    }
    println!("reports written to {}", dir.display());
    if failed > 0 {
        Err(Failure::Assertion(failed))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Norm(a) => cmd_norm(a),
        Command::Operator(a) => cmd_operator(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(n)) => {
            eprintln!("error: {n} report(s) failed asserted checks");
            ExitCode::from(EXIT_ASSERTION)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_hypothesis_violation() {
                EXIT_HYPOTHESIS
            } else {
                EXIT_CONFIG
            })
        }
    }
}

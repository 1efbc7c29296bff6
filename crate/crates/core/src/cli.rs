//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::decoding::FailurePolicy;
use crate::encoding::{exponent_plan, SchemeParams};
use crate::error::{Error, Result};
use crate::io::{load, random_matrix, save};
use crate::matrix::{conservative_bound, Matrix};
use crate::numeric::{EvaluationPoints, PointKind};
use crate::scalar::ScalarKind;
use crate::sim::{
    reference_product, run_job, scheme_id, sweep_stragglers, write_sweep_csv, BaseChoice, CostModel, DelayDistribution,
    JobOptions, StragglerMode, StragglerModel, StragglerSweep, SweepRow,
};

#[derive(Parser, Debug)]
#[command(
    name = "coded-matmul",
    version,
    about = "Straggler-tolerant coded matrix multiplication"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a random integer matrix in the CDM1 binary format.
    GenMatrix(GenMatrixArgs),
    /// Print the exponent tables and useful-index map as CSV.
    PlanDump(PlanArgs),
    /// Encode, simulate the workers and decode once.
    Run(RunArgs),
    /// Decoding error as the entry bound grows.
    SweepError(SweepErrorArgs),
    /// Latency of the p'=1 and p'=p schemes as stragglers are added.
    SweepStragglers(SweepStragglersArgs),
}

#[derive(Args, Debug)]
pub struct GenMatrixArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    /// Largest entry magnitude.
    #[arg(long, default_value_t = 50)]
    pub bound: u32,
    /// Draw from [-bound, bound] instead of [0, bound].
    #[arg(long)]
    pub signed: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long = "p-prime", default_value_t = 1)]
    pub p_prime: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PointsArg {
    Real,
    Unit,
    Integer,
}

impl From<PointsArg> for PointKind {
    fn from(p: PointsArg) -> Self {
        match p {
            PointsArg::Real => PointKind::Real,
            PointsArg::Unit => PointKind::Unit,
            PointsArg::Integer => PointKind::Integer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Float,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CostArg {
    Synthetic,
    Measured,
}

/// `auto`, a plain integer, or a power written `2^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseArg(pub BaseChoice);

impl FromStr for BaseArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(BaseArg(BaseChoice::Auto));
        }
        let value = match s.strip_prefix("2^") {
            Some(exp) => {
                let e: u32 = exp.parse().map_err(|e| format!("bad exponent in {s:?}: {e}"))?;
                1u64.checked_shl(e)
                    .filter(|_| e < 64)
                    .ok_or_else(|| format!("2^{e} does not fit 64 bits"))?
            }
            None => s.parse().map_err(|e| format!("bad base {s:?}: {e}"))?,
        };
        Ok(BaseArg(BaseChoice::Fixed(value)))
    }
}

/// `none`, `S` / `twice:S`, `crash:S`, `exp:MEAN_MS`, `uniform:LO_MS:HI_MS`.
#[derive(Clone, Debug, PartialEq)]
pub struct StragglerArg(pub StragglerMode);

impl FromStr for StragglerArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let count = |t: &str| t.parse::<usize>().map_err(|e| format!("bad count {t:?}: {e}"));
        let mode = match parts.as_slice() {
            ["none"] => StragglerMode::None,
            [c] => StragglerMode::ComputeTwice(count(c)?),
            ["twice", c] => StragglerMode::ComputeTwice(count(c)?),
            ["crash", c] => StragglerMode::Crash(count(c)?),
            ["exp", mean] => StragglerMode::RandomDelay(DelayDistribution::Exponential { mean_ms: num(mean)? }),
            ["uniform", lo, hi] => StragglerMode::RandomDelay(DelayDistribution::Uniform {
                lo_ms: num(lo)?,
                hi_ms: num(hi)?,
            }),
            _ => return Err(format!("unrecognized straggler spec {s:?}")),
        };
        Ok(StragglerArg(mode))
    }
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long = "p-prime", default_value_t = 1)]
    pub p_prime: usize,
    /// Number of workers K.
    #[arg(long, default_value_t = 10)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = PointsArg::Real)]
    pub points: PointsArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Float)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Side length of generated square matrices.
    #[arg(long, default_value_t = 400)]
    pub size: usize,
    /// Generate entries in [-bound, bound] instead of [0, bound].
    #[arg(long)]
    pub signed: bool,
    #[arg(long = "a-file")]
    pub a_file: Option<PathBuf>,
    #[arg(long = "b-file")]
    pub b_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CostArg::Synthetic)]
    pub cost: CostArg,
    /// Synthetic task time in milliseconds.
    #[arg(long = "task-ms", default_value_t = 1.0)]
    pub task_ms: f64,
    /// Accept a base below 2L with a warning.
    #[arg(long = "unsafe-base")]
    pub unsafe_base: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "auto")]
    pub s: BaseArg,
    /// Entry bound of generated matrices.
    #[arg(long, default_value_t = 50)]
    pub bound: u32,
    #[arg(long, default_value = "none")]
    pub stragglers: StragglerArg,
    /// Decode from these worker ids instead of the earliest completions.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
pub struct SweepErrorArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Entry bounds to sweep.
    #[arg(long, value_delimiter = ',', default_value = "100,200,500,1000,2000")]
    pub bound: Vec<u32>,
    /// One base for all bounds, or one per bound.
    #[arg(long, value_delimiter = ',', default_value = "2^28,2^30,2^32,2^34,2^36")]
    pub s: Vec<BaseArg>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
}

#[derive(Args, Debug)]
pub struct SweepStragglersArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "auto")]
    pub s: BaseArg,
    #[arg(long, default_value_t = 50)]
    pub bound: u32,
    /// Straggler counts to visit; defaults to 0..K-1.
    #[arg(long, value_delimiter = ',')]
    pub stragglers: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
}

/// Everything a single experiment needs, resolved from flags.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub p_prime: usize,
    pub workers: usize,
    pub base: BaseChoice,
    pub point_kind: PointKind,
    pub scalar: ScalarKind,
    pub straggler: StragglerMode,
    pub cost: CostModel,
    pub trials: usize,
    pub seed: u64,
    pub source: MatrixSource,
    pub unsafe_base: bool,
}

#[derive(Clone, Debug)]
pub enum MatrixSource {
    Files { a: PathBuf, b: PathBuf },
    Generated { size: usize, bound: u32, signed: bool },
}

impl MatrixSource {
    /// `A` from `seed`, `B` from `seed + 1` when generated.
    pub fn load(&self, seed: u64) -> Result<(Matrix<i64>, Matrix<i64>)> {
        match self {
            MatrixSource::Files { a, b } => Ok((load(a)?, load(b)?)),
            MatrixSource::Generated { size, bound, signed } => Ok((
                random_matrix(*size, *size, *bound, *signed, seed),
                random_matrix(*size, *size, *bound, *signed, seed.wrapping_add(1)),
            )),
        }
    }
}

impl ExperimentConfig {
    fn from_common(
        c: &CommonArgs,
        base: BaseChoice,
        bound: u32,
        straggler: StragglerMode,
        trials: usize,
    ) -> Result<Self> {
        let scalar = match (c.mode, c.points) {
            (ModeArg::Exact, PointsArg::Integer) => ScalarKind::ExactRational,
            (ModeArg::Exact, other) => {
                return Err(Error::InvalidParams(format!(
                    "exact mode needs integer points, not {other:?}"
                )))
            }
            (ModeArg::Float, PointsArg::Unit) => ScalarKind::FloatComplex,
            (ModeArg::Float, _) => ScalarKind::FloatReal,
        };
        let source = match (&c.a_file, &c.b_file) {
            (Some(a), Some(b)) => MatrixSource::Files {
                a: a.clone(),
                b: b.clone(),
            },
            (None, None) => MatrixSource::Generated {
                size: c.size,
                bound,
                signed: c.signed,
            },
            _ => return Err(Error::InvalidParams("--a-file and --b-file go together".into())),
        };
        let cost = match c.cost {
            CostArg::Synthetic => CostModel::synthetic(c.task_ms),
            CostArg::Measured => CostModel::Measured,
        };
        Ok(Self {
            m: c.m,
            n: c.n,
            p: c.p,
            p_prime: c.p_prime,
            workers: c.workers,
            base,
            point_kind: c.points.into(),
            scalar,
            straggler,
            cost,
            trials,
            seed: c.seed,
            source,
            unsafe_base: c.unsafe_base,
        })
    }

    /// Scheme parameters for `A`, `B`, with `L` from the conservative bound.
    pub fn params_for(&self, a: &Matrix<i64>, b: &Matrix<i64>, base: BaseChoice) -> Result<SchemeParams> {
        let bound = conservative_bound(a, b)?;
        let s = base.resolve(bound)?;
        if self.unsafe_base {
            SchemeParams::new_unchecked_base(self.m, self.n, self.p, self.p_prime, s, bound)
        } else {
            SchemeParams::new(self.m, self.n, self.p, self.p_prime, s, bound)
        }
    }

    /// Checks that need no matrix data.
    pub fn validate(&self) -> Result<()> {
        // Base and bound are placeholders; only the shape is checked here.
        let shape = SchemeParams::new(self.m, self.n, self.p, self.p_prime, 2, 1)?;
        if self.workers < shape.tau() {
            return Err(Error::InsufficientWorkers {
                tau: shape.tau(),
                got: self.workers,
            });
        }
        Ok(())
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| Error::File {
                path: p.clone(),
                source,
            })?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(io::stdout().lock()),
    })
}

pub fn cmd_gen_matrix(args: &GenMatrixArgs) -> Result<Matrix<i64>> {
    let m = random_matrix(args.rows, args.cols, args.bound, args.signed, args.seed);
    save(&m, &args.out)?;
    Ok(m)
}

pub fn cmd_plan_dump(args: &PlanArgs) -> Result<()> {
    let params = SchemeParams::new(args.m, args.n, args.p, args.p_prime, 2, 1)?;
    exponent_plan(&params)?.write_csv(output(&args.out)?)
}

/// Outcome of one `run`.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub row: SweepRow,
    pub digit_margin: f64,
    pub exact_match: Option<bool>,
    pub summary_line: String,
}

pub fn run_experiment(config: &ExperimentConfig, subset: Option<Vec<usize>>) -> Result<RunSummary> {
    config.validate()?;
    let (a, b) = config.source.load(config.seed)?;
    let params = config.params_for(&a, &b, config.base)?;
    let points = EvaluationPoints::generate(config.point_kind, config.workers)?;
    let model = StragglerModel {
        mode: config.straggler.clone(),
        seed: config.seed,
    };
    let options = JobOptions {
        subset,
        ..JobOptions::default()
    };
    let (report, latency) = run_job(&a, &b, &params, &points, &model, config.cost, config.scalar, &options)?;
    let stragglers = match config.straggler {
        StragglerMode::ComputeTwice(c) | StragglerMode::Crash(c) => c,
        _ => 0,
    };
    Ok(RunSummary {
        row: SweepRow {
            scheme: scheme_id(params.p_prime),
            m: params.m,
            n: params.n,
            p: params.p,
            p_prime: params.p_prime,
            workers: config.workers,
            tau: params.tau(),
            stragglers,
            trial: 0,
            seed: config.seed,
            latency_ms: latency.computation_latency_ms,
            decode_ms: latency.decode_ms,
            rel_error: report.rel_error,
            condition_estimate: report.condition_estimate,
        },
        digit_margin: report.digit_margin,
        exact_match: report.exact_match,
        summary_line: report.summary_line(),
    })
}

pub fn cmd_run(args: &RunArgs) -> Result<RunSummary> {
    let config = ExperimentConfig::from_common(&args.common, args.s.0, args.bound, args.stragglers.0.clone(), 1)?;
    let summary = run_experiment(&config, args.subset.clone())?;
    let r = &summary.row;
    eprintln!(
        "tau={} latency_ms={} decode_ms={} rel_error={} digit_margin={} exact_match={}",
        r.tau,
        r.latency_ms,
        r.decode_ms,
        r.rel_error.map_or_else(|| "NA".into(), |e| e.to_string()),
        summary.digit_margin,
        summary.exact_match.map_or_else(|| "NA".into(), |e| e.to_string()),
    );
    eprintln!("{}", summary.summary_line);
    write_sweep_csv(std::slice::from_ref(r), output(&args.common.out)?)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub entry_bound: u32,
    pub s: u64,
    pub rel_error: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub product_bound: u64,
    pub exact_match: bool,
    pub failed_entries: usize,
    pub digit_margin: f64,
    pub condition_estimate: f64,
}

pub const ERROR_SWEEP_HEADER: [&str; 10] = [
    "bound",
    "s",
    "rel_error",
    "trial",
    "seed",
    "L",
    "exact_match",
    "failed_entries",
    "digit_margin",
    "condition_estimate",
];

/// One row per (bound, trial). `bases` has one entry for all bounds or one
/// per bound. Entries that cannot be decoded are zero-filled and counted.
pub fn sweep_error(config: &ExperimentConfig, bounds: &[u32], bases: &[BaseChoice]) -> Result<Vec<ErrorRow>> {
    if bounds.is_empty() {
        return Err(Error::InvalidParams("bound list is empty".into()));
    }
    if bases.len() != 1 && bases.len() != bounds.len() {
        return Err(Error::InvalidParams(format!(
            "{} bases for {} bounds",
            bases.len(),
            bounds.len()
        )));
    }
    config.validate()?;
    let points = EvaluationPoints::generate(config.point_kind, config.workers)?;
    let options = JobOptions {
        on_failure: FailurePolicy::ZeroFill,
        ..JobOptions::default()
    };
    let model = StragglerModel {
        mode: config.straggler.clone(),
        seed: config.seed,
    };
    let mut rows = Vec::new();
    for (idx, &entry_bound) in bounds.iter().enumerate() {
        let base = if bases.len() == 1 { bases[0] } else { bases[idx] };
        for trial in 0..config.trials {
            let seed = config.seed.wrapping_add(trial as u64);
            let source = match &config.source {
                MatrixSource::Generated { size, signed, .. } => MatrixSource::Generated {
                    size: *size,
                    bound: entry_bound,
                    signed: *signed,
                },
                files => files.clone(),
            };
            let (a, b) = source.load(seed)?;
            let params = config.params_for(&a, &b, base)?;
            let (report, _) = run_job(&a, &b, &params, &points, &model, config.cost, config.scalar, &options)?;
            rows.push(ErrorRow {
                entry_bound,
                s: params.s,
                rel_error: report.rel_error,
                trial,
                seed,
                product_bound: params.bound,
                exact_match: report.exact_match.unwrap_or(false),
                failed_entries: report.failures.len(),
                digit_margin: report.digit_margin,
                condition_estimate: report.condition_estimate,
            });
        }
    }
    Ok(rows)
}

pub fn write_error_csv<W: Write>(rows: &[ErrorRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ERROR_SWEEP_HEADER)?;
    for r in rows {
        out.write_record([
            r.entry_bound.to_string(),
            r.s.to_string(),
            r.rel_error.map_or_else(String::new, |e| e.to_string()),
            r.trial.to_string(),
            r.seed.to_string(),
            r.product_bound.to_string(),
            r.exact_match.to_string(),
            r.failed_entries.to_string(),
            r.digit_margin.to_string(),
            r.condition_estimate.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_sweep_error(args: &SweepErrorArgs) -> Result<Vec<ErrorRow>> {
    let config = ExperimentConfig::from_common(&args.common, BaseChoice::Auto, 0, StragglerMode::None, args.trials)?;
    let bases: Vec<BaseChoice> = args.s.iter().map(|b| b.0).collect();
    let rows = sweep_error(&config, &args.bound, &bases)?;
    write_error_csv(&rows, output(&args.common.out)?)?;
    Ok(rows)
}

pub fn cmd_sweep_stragglers(args: &SweepStragglersArgs) -> Result<Vec<SweepRow>> {
    let config = ExperimentConfig::from_common(&args.common, args.s.0, args.bound, StragglerMode::None, args.trials)?;
    let (a, b) = config.source.load(config.seed)?;
    // Reference product must fit i64 before any job runs.
    reference_product(&a, &b)?;
    let sweep = StragglerSweep {
        m: config.m,
        n: config.n,
        p: config.p,
        workers: config.workers,
        base: config.base,
        point_kind: config.point_kind,
        scalar: config.scalar,
        cost: config.cost,
        straggler_counts: args.stragglers.clone(),
        trials: config.trials,
        seed: config.seed,
    };
    let rows = sweep_stragglers(&sweep, &a, &b)?;
    write_sweep_csv(&rows, output(&args.common.out)?)?;
    Ok(rows)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenMatrix(args) => cmd_gen_matrix(args).map(drop),
        Command::PlanDump(args) => cmd_plan_dump(args),
        Command::Run(args) => cmd_run(args).map(drop),
        Command::SweepError(args) => cmd_sweep_error(args).map(drop),
        Command::SweepStragglers(args) => cmd_sweep_stragglers(args).map(drop),
    }
}

//! Master/worker simulation with straggler injection.
//!
//! Every worker runs on its own thread and reports `(worker_id, product,
//! duration)` over a channel. The master decodes as soon as `τ` products are
//! in; later messages are dropped. Under [`CostModel::Synthetic`] completion
//! order and latency come from virtual task times, so a job is fully
//! determined by its inputs and seed regardless of thread scheduling.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::decoding::{decode, DecodeField, DecodeOptions, DecodeReport, FailurePolicy, WorkerResult};
use crate::encoding::{encode_all, exponent_plan, DigitLayout, ExponentPlan, SchemeParams, SharePair};
use crate::error::{Error, Result};
use crate::matrix::{conservative_bound, Matrix};
use crate::numeric::{EvaluationPoints, PointKind};
use crate::scalar::{Lift, Scalar, ScalarKind};

#[derive(Clone, Debug, PartialEq)]
pub enum DelayDistribution {
    Exponential { mean_ms: f64 },
    Uniform { lo_ms: f64, hi_ms: f64 },
}

impl DelayDistribution {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            DelayDistribution::Exponential { mean_ms } => {
                if mean_ms <= 0.0 {
                    0.0
                } else {
                    Exp::new(1.0 / mean_ms).expect("positive rate").sample(rng)
                }
            }
            DelayDistribution::Uniform { lo_ms, hi_ms } => {
                if hi_ms > lo_ms {
                    rng.gen_range(lo_ms..hi_ms)
                } else {
                    lo_ms
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StragglerMode {
    None,
    /// `S` workers chosen uniformly at random do their work twice.
    ComputeTwice(usize),
    /// Every worker gets an extra delay drawn from the distribution.
    RandomDelay(DelayDistribution),
    /// `S` workers chosen uniformly at random never return a result.
    Crash(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StragglerModel {
    pub mode: StragglerMode,
    pub seed: u64,
}

impl StragglerModel {
    pub fn none() -> Self {
        Self {
            mode: StragglerMode::None,
            seed: 0,
        }
    }

    pub fn compute_twice(count: usize, seed: u64) -> Self {
        Self {
            mode: StragglerMode::ComputeTwice(count),
            seed,
        }
    }

    /// Workers singled out by `ComputeTwice` or `Crash`, sorted.
    pub fn selected(&self, workers: usize) -> Result<Vec<usize>> {
        let count = match self.mode {
            StragglerMode::ComputeTwice(c) | StragglerMode::Crash(c) => c,
            _ => return Ok(Vec::new()),
        };
        if count > workers {
            return Err(Error::InvalidParams(format!(
                "{count} stragglers requested from {workers} workers"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut ids = sample(&mut rng, workers, count).into_vec();
        ids.sort_unstable();
        Ok(ids)
    }

    /// Extra delay per worker, in milliseconds.
    pub fn delays_ms(&self, workers: usize) -> Vec<f64> {
        match &self.mode {
            StragglerMode::RandomDelay(dist) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_de1a);
                (0..workers).map(|_| dist.sample(&mut rng)).collect()
            }
            _ => vec![0.0; workers],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CostModel {
    /// Wall-clock time of the real multiplications.
    Measured,
    /// Every task takes `task_ms` (doubled for compute-twice stragglers);
    /// decoding is charged `decode_ms`.
    Synthetic { task_ms: f64, decode_ms: f64 },
}

impl CostModel {
    pub fn synthetic(task_ms: f64) -> Self {
        CostModel::Synthetic {
            task_ms,
            decode_ms: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatencyReport {
    /// From dispatch until the `τ`-th completion, excluding decoding.
    pub computation_latency_ms: f64,
    /// Decode time charged by the cost model.
    pub decode_ms: f64,
    /// Measured wall time of the decode, whatever the cost model.
    pub decode_wall: Duration,
    /// Task time of every worker that reported, by worker id.
    pub per_worker_ms: Vec<(usize, f64)>,
    pub straggler_ids: Vec<usize>,
    pub failed_ids: Vec<usize>,
    pub tau_used: usize,
}

impl LatencyReport {
    pub fn total_ms(&self) -> f64 {
        self.computation_latency_ms + self.decode_ms
    }
}

/// `share_aᵀ · share_b`.
pub fn worker_task<T: Scalar>(share_a: &Matrix<T>, share_b: &Matrix<T>) -> Result<Matrix<T>> {
    share_a.transpose_mul(share_b)
}

#[derive(Clone, Debug)]
pub struct JobOptions {
    pub subset: Option<Vec<usize>>,
    pub on_failure: FailurePolicy,
    pub guard_band: f64,
    /// Compare against the exact product and fill `rel_error`.
    pub check_reference: bool,
}

impl Default for JobOptions {
    fn default() -> Self {
        Self {
            subset: None,
            on_failure: FailurePolicy::Abort,
            guard_band: crate::decoding::DEFAULT_GUARD_BAND,
            check_reference: true,
        }
    }
}

/// Exact `AᵀB`, checked to fit `i64`.
pub fn reference_product(a: &Matrix<i64>, b: &Matrix<i64>) -> Result<Matrix<i64>> {
    let wide = a.transpose_mul_i128(b)?;
    let data = wide
        .as_slice()
        .iter()
        .map(|&v| i64::try_from(v).map_err(|_| Error::Overflow("AᵀB entry exceeds i64".into())))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_vec(wide.rows(), wide.cols(), data)
}

/// Encode, dispatch to `K` workers, decode after `τ` completions.
#[allow(clippy::too_many_arguments)]
pub fn run_job(
    a: &Matrix<i64>,
    b: &Matrix<i64>,
    params: &SchemeParams,
    points: &EvaluationPoints,
    straggler: &StragglerModel,
    cost: CostModel,
    scalar: ScalarKind,
    options: &JobOptions,
) -> Result<(DecodeReport, LatencyReport)> {
    let plan = exponent_plan(params)?;
    let job = Job {
        a,
        b,
        params,
        plan: &plan,
        straggler,
        cost,
        options,
    };
    match (scalar, points) {
        (ScalarKind::FloatReal, EvaluationPoints::Real(z)) => job.run::<f64, f64>(z.clone(), DigitLayout::Centered),
        (ScalarKind::FloatReal, EvaluationPoints::Integer(z)) => {
            job.run::<f64, f64>(z.iter().map(|&v| v as f64).collect(), DigitLayout::Centered)
        }
        (ScalarKind::FloatComplex, pts) => job.run::<Complex64, Complex64>(pts.as_complex(), DigitLayout::Centered),
        (ScalarKind::ExactRational, EvaluationPoints::Integer(z)) => {
            job.run::<BigInt, BigRational>(z.iter().map(|&v| BigInt::from(v)).collect(), DigitLayout::Shifted)
        }
        (kind, pts) => Err(Error::InvalidParams(format!(
            "{kind:?} arithmetic cannot use {:?} evaluation points",
            pts.kind()
        ))),
    }
}

struct Job<'a> {
    a: &'a Matrix<i64>,
    b: &'a Matrix<i64>,
    params: &'a SchemeParams,
    plan: &'a ExponentPlan,
    straggler: &'a StragglerModel,
    cost: CostModel,
    options: &'a JobOptions,
}

enum Message<S> {
    Done {
        worker_id: usize,
        product: Result<Matrix<S>>,
        elapsed: Duration,
    },
    Crashed {
        worker_id: usize,
    },
}

impl Job<'_> {
    fn run<S, F>(&self, points: Vec<S>, layout: DigitLayout) -> Result<(DecodeReport, LatencyReport)>
    where
        S: Scalar + Lift<F>,
        F: DecodeField,
    {
        let k = points.len();
        let tau = self.params.tau();
        let shares = encode_all(self.a, self.b, self.params, self.plan, &points, layout)?;
        let selected = self.straggler.selected(k)?;
        let crashed: BTreeSet<usize> = match self.straggler.mode {
            StragglerMode::Crash(_) => selected.iter().copied().collect(),
            _ => BTreeSet::new(),
        };
        let twice: BTreeSet<usize> = match self.straggler.mode {
            StragglerMode::ComputeTwice(_) => selected.iter().copied().collect(),
            _ => BTreeSet::new(),
        };
        let delays = self.straggler.delays_ms(k);
        let measured = matches!(self.cost, CostModel::Measured);

        let (tx, rx) = mpsc::channel::<Message<S>>();
        for share in shares {
            let tx = tx.clone();
            let id = share.worker_id;
            let crash = crashed.contains(&id);
            let repeats = if measured && twice.contains(&id) { 2 } else { 1 };
            let sleep = if measured {
                Duration::from_secs_f64(delays[id] / 1000.0)
            } else {
                Duration::ZERO
            };
            thread::spawn(move || worker_main(share, crash, repeats, sleep, tx));
        }
        drop(tx);
        let dispatched = Instant::now();

        let mut arrivals: Vec<(f64, WorkerResult<S>)> = Vec::with_capacity(k);
        let mut failed = Vec::new();
        let mut per_worker_ms = Vec::new();
        let mut latency_ms = 0.0;
        let succeeded = |arr: &Vec<(f64, WorkerResult<S>)>| arr.len();
        for msg in rx.iter() {
            match msg {
                Message::Crashed { worker_id } => failed.push(worker_id),
                Message::Done {
                    worker_id,
                    product,
                    elapsed,
                } => match product {
                    Err(e) => {
                        log::warn!("worker {worker_id} failed: {e}");
                        failed.push(worker_id);
                    }
                    Ok(product) => {
                        let task_ms = match self.cost {
                            CostModel::Measured => elapsed.as_secs_f64() * 1000.0,
                            CostModel::Synthetic { task_ms, .. } => {
                                let factor = if twice.contains(&worker_id) { 2.0 } else { 1.0 };
                                task_ms * factor + delays[worker_id]
                            }
                        };
                        per_worker_ms.push((worker_id, task_ms));
                        if measured && succeeded(&arrivals) < tau {
                            latency_ms = dispatched.elapsed().as_secs_f64() * 1000.0;
                        }
                        arrivals.push((
                            task_ms,
                            WorkerResult {
                                worker_id,
                                point: points[worker_id].clone(),
                                product,
                                compute_duration: elapsed,
                            },
                        ));
                    }
                },
            }
            // Measured jobs stop listening at the τ-th arrival; synthetic jobs
            // need every report to order completions by virtual time.
            if measured && succeeded(&arrivals) == tau {
                break;
            }
        }
        drop(rx);

        if !measured {
            arrivals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.worker_id.cmp(&y.1.worker_id)));
        }
        per_worker_ms.sort_by_key(|&(id, _)| id);
        failed.sort_unstable();
        if arrivals.len() < tau {
            return Err(Error::JobFailed {
                tau,
                succeeded: arrivals.len(),
                failed,
            });
        }
        if !measured {
            latency_ms = arrivals[tau - 1].0;
        }
        let results: Vec<WorkerResult<S>> = arrivals.into_iter().map(|(_, r)| r).collect();

        let reference = if self.options.check_reference {
            Some(reference_product(self.a, self.b)?)
        } else {
            None
        };
        let decode_options = DecodeOptions {
            layout,
            guard_band: self.options.guard_band,
            on_failure: self.options.on_failure,
            subset: self.options.subset.clone(),
            reference: reference.as_ref(),
        };
        let started = Instant::now();
        let report = decode::<S, F>(&results, self.params, self.plan, &decode_options)?;
        let decode_wall = started.elapsed();
        let decode_ms = match self.cost {
            CostModel::Measured => decode_wall.as_secs_f64() * 1000.0,
            CostModel::Synthetic { decode_ms, .. } => decode_ms,
        };
        let straggler_ids = match self.straggler.mode {
            StragglerMode::ComputeTwice(_) | StragglerMode::Crash(_) => selected,
            _ => Vec::new(),
        };
        Ok((
            report,
            LatencyReport {
                computation_latency_ms: latency_ms,
                decode_ms,
                decode_wall,
                per_worker_ms,
                straggler_ids,
                failed_ids: failed,
                tau_used: tau,
            },
        ))
    }
}

fn worker_main<S: Scalar>(
    share: SharePair<S>,
    crash: bool,
    repeats: usize,
    sleep: Duration,
    tx: mpsc::Sender<Message<S>>,
) {
    let worker_id = share.worker_id;
    if crash {
        let _ = tx.send(Message::Crashed { worker_id });
        return;
    }
    let start = Instant::now();
    let mut product = worker_task(&share.a, &share.b);
    for _ in 1..repeats {
        product = worker_task(&share.a, &share.b);
    }
    if !sleep.is_zero() {
        thread::sleep(sleep);
    }
    // The master may have stopped listening; late results are discarded.
    let _ = tx.send(Message::Done {
        worker_id,
        product,
        elapsed: start.elapsed(),
    });
}

/// Base `s`: explicit, or the smallest power of two `>= 2L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseChoice {
    Auto,
    Fixed(u64),
}

impl BaseChoice {
    pub fn resolve(self, bound: u64) -> Result<u64> {
        match self {
            BaseChoice::Auto => SchemeParams::auto_base(bound),
            BaseChoice::Fixed(s) => Ok(s),
        }
    }
}

/// Parameters of a straggler sweep over both ends of the tradeoff.
#[derive(Clone, Debug)]
pub struct StragglerSweep {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub workers: usize,
    pub base: BaseChoice,
    pub point_kind: PointKind,
    pub scalar: ScalarKind,
    pub cost: CostModel,
    /// Straggler counts to visit; defaults to `0..K`.
    pub straggler_counts: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub scheme: String,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub p_prime: usize,
    pub workers: usize,
    pub tau: usize,
    pub stragglers: usize,
    pub trial: usize,
    pub seed: u64,
    pub latency_ms: f64,
    pub decode_ms: f64,
    pub rel_error: Option<f64>,
    pub condition_estimate: f64,
}

pub const SWEEP_HEADER: [&str; 14] = [
    "scheme",
    "m",
    "n",
    "p",
    "p_prime",
    "K",
    "tau",
    "S",
    "trial",
    "seed",
    "latency_ms",
    "decode_ms",
    "rel_error",
    "condition_estimate",
];

pub fn scheme_id(p_prime: usize) -> String {
    format!("pprime{p_prime}")
}

/// One row per (scheme, S, trial); schemes are `p' = 1` and `p' = p` on the
/// same matrices and points.
pub fn sweep_stragglers(config: &StragglerSweep, a: &Matrix<i64>, b: &Matrix<i64>) -> Result<Vec<SweepRow>> {
    let bound = conservative_bound(a, b)?;
    let s = config.base.resolve(bound)?;
    let mut schemes = vec![1];
    if config.p > 1 {
        schemes.push(config.p);
    }
    let params: Vec<SchemeParams> = schemes
        .iter()
        .map(|&pp| SchemeParams::new(config.m, config.n, config.p, pp, s, bound))
        .collect::<Result<_>>()?;
    for prm in &params {
        if config.workers < prm.tau() {
            return Err(Error::InsufficientWorkers {
                tau: prm.tau(),
                got: config.workers,
            });
        }
    }
    let points = EvaluationPoints::generate(config.point_kind, config.workers)?;
    let counts = config
        .straggler_counts
        .clone()
        .unwrap_or_else(|| (0..config.workers).collect());
    let options = JobOptions::default();
    let mut rows = Vec::new();
    for prm in &params {
        for &count in &counts {
            for trial in 0..config.trials {
                let seed = config.seed.wrapping_add(trial as u64);
                let model = StragglerModel::compute_twice(count, seed);
                let (report, latency) = run_job(a, b, prm, &points, &model, config.cost, config.scalar, &options)?;
                rows.push(SweepRow {
                    scheme: scheme_id(prm.p_prime),
                    m: prm.m,
                    n: prm.n,
                    p: prm.p,
                    p_prime: prm.p_prime,
                    workers: config.workers,
                    tau: prm.tau(),
                    stragglers: count,
                    trial,
                    seed,
                    latency_ms: latency.computation_latency_ms,
                    decode_ms: latency.decode_ms,
                    rel_error: report.rel_error,
                    condition_estimate: report.condition_estimate,
                });
            }
        }
    }
    Ok(rows)
}

fn opt_float(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for r in rows {
        out.write_record([
            r.scheme.clone(),
            r.m.to_string(),
            r.n.to_string(),
            r.p.to_string(),
            r.p_prime.to_string(),
            r.workers.to_string(),
            r.tau.to_string(),
            r.stragglers.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.latency_ms.to_string(),
            r.decode_ms.to_string(),
            opt_float(r.rel_error),
            r.condition_estimate.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

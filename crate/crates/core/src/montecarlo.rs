//! Monte Carlo estimate of how often an evaluator ranks a pair of
//! classifiers against their true utility yield.
//!
//! One trial:
//! 1. draw a "true" utility matrix from the prior;
//! 2. draw one perturbed copy of it per error level;
//! 3. draw a class-0 frequency uniformly and two confusion matrices with
//!    that frequency and independent rate-sampled TPR/TNR;
//! 4. take the signed difference of their true yields;
//! 5. take the signed score difference under every metric and every
//!    perturbed matrix;
//! 6. count a misranking when the two signs are strictly opposite.
//!
//! Trials are split into fixed-size chunks, chunk `k` drawing from substream
//! `k` of the master seed. Counts are integers summed across chunks, so the
//! report is bitwise identical for any number of worker threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compliance::{witness_with_rng, DEFAULT_MAX_DRAWS};
use crate::error::{Error, Result};
use crate::metrics::{registry, MetricDescriptor};
use crate::sampling::{
    perturb_utility, sample_confusion_unchecked, sample_frequency, sample_true_utility, substream,
    ErrorModel, UtilityPrior,
};
use crate::utility::UtilityMatrix;

pub const DEFAULT_PAIRS: u64 = 1_000_000;
pub const MIN_PAIRS: u64 = 10_000;
pub const DEFAULT_CHUNK_SIZE: u64 = 10_000;
pub const DEFAULT_SIGMA_GRID: [f64; 7] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub prior: UtilityPrior,
    /// Error levels for the noisy-utility evaluator.
    pub sigmas: Vec<f64>,
    pub metrics: Vec<MetricDescriptor>,
    pub pairs: u64,
    pub seed: u64,
    pub chunk_size: u64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            prior: UtilityPrior::Uniform,
            sigmas: DEFAULT_SIGMA_GRID.to_vec(),
            metrics: registry(),
            pairs: DEFAULT_PAIRS,
            seed: 0,
            chunk_size: DEFAULT_CHUNK_SIZE,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        if self.pairs < MIN_PAIRS {
            return Err(Error::InvalidConfig(format!(
                "at least {MIN_PAIRS} pairs per estimate are required, got {}",
                self.pairs
            )));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidConfig("chunk size must be positive".into()));
        }
        for &s in &self.sigmas {
            ErrorModel::new(s)?;
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("worker count must be positive".into()));
        }
        Ok(())
    }
}

/// Misranking statistics of one evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatorResult {
    pub evaluator: String,
    /// Error level, for the noisy-utility evaluator.
    pub sigma: Option<f64>,
    pub pairs: u64,
    pub misranked: u64,
    /// Pairs where either signed difference was exactly zero.
    pub ties: u64,
    /// Pairs the evaluator could not score.
    pub undefined: u64,
    pub fraction: f64,
    /// Binomial standard error `√(p(1-p)/n)`.
    pub std_error: f64,
}

impl EvaluatorResult {
    fn new(evaluator: String, sigma: Option<f64>, pairs: u64, c: Tally) -> Self {
        let p = c.misranked as f64 / pairs as f64;
        Self {
            evaluator,
            sigma,
            pairs,
            misranked: c.misranked,
            ties: c.ties,
            undefined: c.undefined,
            fraction: p,
            std_error: (p * (1.0 - p) / pairs as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub prior: UtilityPrior,
    pub pairs: u64,
    pub metrics: Vec<EvaluatorResult>,
    pub noisy_utility: Vec<EvaluatorResult>,
}

impl ExperimentReport {
    pub fn metric(&self, name: &str) -> Option<&EvaluatorResult> {
        self.metrics.iter().find(|m| m.evaluator == name)
    }

    pub fn noisy(&self, sigma: f64) -> Option<&EvaluatorResult> {
        self.noisy_utility
            .iter()
            .find(|m| m.sigma.is_some_and(|s| (s - sigma).abs() < 1e-12))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    misranked: u64,
    ties: u64,
    undefined: u64,
}

impl Tally {
    #[inline]
    fn record(&mut self, true_diff: f64, diff: Option<f64>) {
        match diff {
            None => self.undefined += 1,
            Some(d) if d == 0.0 || true_diff == 0.0 => self.ties += 1,
            Some(d) if d * true_diff < 0.0 => self.misranked += 1,
            Some(_) => {}
        }
    }

    fn add(&mut self, other: &Tally) {
        self.misranked += other.misranked;
        self.ties += other.ties;
        self.undefined += other.undefined;
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ChunkTally {
    metrics: Vec<Tally>,
    noisy: Vec<Tally>,
}

impl ChunkTally {
    fn zeros(metrics: usize, noisy: usize) -> Self {
        Self {
            metrics: vec![Tally::default(); metrics],
            noisy: vec![Tally::default(); noisy],
        }
    }

    fn merge(mut self, other: ChunkTally) -> Self {
        for (a, b) in self.metrics.iter_mut().zip(&other.metrics) {
            a.add(b);
        }
        for (a, b) in self.noisy.iter_mut().zip(&other.noisy) {
            a.add(b);
        }
        self
    }
}

fn run_chunk<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    trials: u64,
    rng: &mut R,
) -> Result<ChunkTally> {
    let mut tally = ChunkTally::zeros(cfg.metrics.len(), cfg.sigmas.len());
    let mut noisy: Vec<UtilityMatrix> = Vec::with_capacity(cfg.sigmas.len());
    for _ in 0..trials {
        let truth = sample_true_utility(&cfg.prior, rng)?;
        noisy.clear();
        for &s in &cfg.sigmas {
            noisy.push(perturb_utility(&truth, s, rng)?);
        }
        let f0 = sample_frequency(rng);
        let first = sample_confusion_unchecked(f0, rng);
        let second = sample_confusion_unchecked(f0, rng);
        let true_diff = truth.yield_unchecked(&second) - truth.yield_unchecked(&first);

        for (t, m) in tally.metrics.iter_mut().zip(&cfg.metrics) {
            let diff = match (m.score(&first), m.score(&second)) {
                (Ok(a), Ok(b)) => Some(b - a),
                _ => None,
            };
            t.record(true_diff, diff);
        }
        for (t, u) in tally.noisy.iter_mut().zip(&noisy) {
            t.record(
                true_diff,
                Some(u.yield_unchecked(&second) - u.yield_unchecked(&first)),
            );
        }
    }
    Ok(tally)
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs the pairwise misranking experiment.
pub fn run_pairwise_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let chunks = cfg.pairs.div_ceil(cfg.chunk_size);
    let total = in_pool(cfg.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|k| {
                let trials = cfg.chunk_size.min(cfg.pairs - k * cfg.chunk_size);
                let mut rng = substream(cfg.seed, k);
                run_chunk(cfg, trials, &mut rng)
            })
            .try_reduce(
                || ChunkTally::zeros(cfg.metrics.len(), cfg.sigmas.len()),
                |a, b| Ok(a.merge(b)),
            )
    })??;

    let metrics = cfg
        .metrics
        .iter()
        .zip(&total.metrics)
        .map(|(m, t)| EvaluatorResult::new(m.name.clone(), None, cfg.pairs, *t))
        .collect();
    let noisy_utility = cfg
        .sigmas
        .iter()
        .zip(&total.noisy)
        .map(|(&s, t)| EvaluatorResult::new("noisy_utility".into(), Some(s), cfg.pairs, *t))
        .collect();
    Ok(ExperimentReport {
        seed: cfg.seed,
        prior: cfg.prior,
        pairs: cfg.pairs,
        metrics,
        noisy_utility,
    })
}

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn fit(points: &[(f64, f64)]) -> Option<Self> {
        let n = points.len() as f64;
        if points.len() < 2 {
            return None;
        }
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_res: f64 = points
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
        Some(Self {
            slope,
            intercept,
            r_squared,
        })
    }
}

/// Misranking fraction of the noisy-utility evaluator as a function of the
/// error level, with the metrics as horizontal reference lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub curve: Vec<EvaluatorResult>,
    pub references: Vec<EvaluatorResult>,
    pub fit: Option<LinearFit>,
    /// Smallest grid level at which the noisy evaluator is no better than
    /// accuracy, if any.
    pub accuracy_crossing: Option<f64>,
}

impl SweepReport {
    /// Largest drop between consecutive levels, in units of the combined
    /// standard error; `≤ k` means non-decreasing within `k` standard errors.
    pub fn max_decrease_in_std_errors(&self) -> f64 {
        self.curve
            .windows(2)
            .map(|w| {
                let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
                let drop = w[0].fraction - w[1].fraction;
                if drop <= 0.0 {
                    0.0
                } else if se == 0.0 {
                    f64::INFINITY
                } else {
                    drop / se
                }
            })
            .fold(0.0, f64::max)
    }
}

impl SweepReport {
    /// Summarizes the noisy-utility curve of an experiment already run.
    pub fn from_experiment(report: &ExperimentReport) -> Self {
        let mut curve = report.noisy_utility.clone();
        curve.sort_by(|a, b| a.sigma.unwrap_or(0.0).total_cmp(&b.sigma.unwrap_or(0.0)));
        let points: Vec<(f64, f64)> = curve
            .iter()
            .map(|r| (r.sigma.unwrap_or(0.0), r.fraction))
            .collect();
        let accuracy_crossing = report.metric("accuracy").and_then(|acc| {
            curve
                .iter()
                .find(|r| r.fraction >= acc.fraction)
                .and_then(|r| r.sigma)
        });
        Self {
            fit: LinearFit::fit(&points),
            curve,
            references: report.metrics.clone(),
            accuracy_crossing,
        }
    }
}

pub fn sweep_error_levels(cfg: &ExperimentConfig, sigma_grid: &[f64]) -> Result<SweepReport> {
    let cfg = ExperimentConfig {
        sigmas: sigma_grid.to_vec(),
        ..cfg.clone()
    };
    Ok(SweepReport::from_experiment(&run_pairwise_experiment(
        &cfg,
    )?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    #[serde(rename = "yield")]
    pub yield_value: f64,
    pub score: f64,
    /// Set for the two members of a reversal witness pair.
    pub pair_id: Option<usize>,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterData {
    pub metric: String,
    pub utility: UtilityMatrix,
    pub f0: f64,
    pub points: Vec<ScatterPoint>,
}

impl ScatterData {
    /// Largest absolute deviation of the sampled points (witness pairs
    /// excluded) from their least-squares line.
    pub fn max_linear_residual(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.pair_id.is_none())
            .map(|p| (p.yield_value, p.score))
            .collect();
        let fit = LinearFit::fit(&pts)?;
        Some(
            pts.iter()
                .map(|p| (p.1 - fit.intercept - fit.slope * p.0).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn witness_pairs(&self) -> usize {
        self.points
            .iter()
            .filter_map(|p| p.pair_id)
            .max()
            .map_or(0, |m| m + 1)
    }
}

/// `n` rate-sampled classifiers on a test set with class-0 frequency `f0`,
/// each scored by its true yield and by `metric`, followed by up to
/// `max_witnesses` reversal pairs flagged for plotting.
pub fn scatter_dataset(
    utility: &UtilityMatrix,
    metric: &MetricDescriptor,
    f0: f64,
    n: usize,
    seed: u64,
    max_witnesses: usize,
) -> Result<ScatterData> {
    if !(f0 > 0.0 && f0 < 1.0) {
        return Err(Error::InvalidFrequency(f0));
    }
    let mut rng = substream(seed, 0);
    let mut points = Vec::with_capacity(n + 2 * max_witnesses);
    for _ in 0..n {
        let c = sample_confusion_unchecked(f0, &mut rng);
        points.push(ScatterPoint {
            yield_value: utility.yield_unchecked(&c),
            score: metric.score(&c)?,
            pair_id: None,
            reversed: false,
        });
    }
    for w in 0..max_witnesses {
        let mut rng = substream(seed, 1 + w as u64);
        let Some(found) = witness_with_rng(metric, utility, f0, DEFAULT_MAX_DRAWS, &mut rng)?
        else {
            break;
        };
        for c in [&found.first, &found.second] {
            points.push(ScatterPoint {
                yield_value: utility.yield_unchecked(c),
                score: metric.score(c)?,
                pair_id: Some(w),
                reversed: true,
            });
        }
    }
    Ok(ScatterData {
        metric: metric.name.clone(),
        utility: *utility,
        f0,
        points,
    })
}

//! Seeded Monte Carlo sweeps.
//!
//! Replicate `r` at batch size `k` draws from ChaCha8 stream `k << 32 | r` of the
//! sweep seed. Per-replicate results are collected in index order and reduced by
//! pairwise summation, so the statistics do not depend on the thread count.

use std::hint::black_box;
use std::time::Instant;

use rand::distr::Distribution;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::check_estimator;
use super::{population_value, reference_kind, relative, ScoreDist};
use crate::error::{invalid, precondition};
use crate::estimators::{evaluate, EstimatorKind};
use crate::loss::{ConcaveLoss, LossKind};
use crate::sum::pairwise;
use crate::Result;

/// Fewest replicates accepted for a bias row.
pub const MIN_REPLICATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replicates {
    Exact,
    Count(usize),
}

impl std::fmt::Display for Replicates {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Replicates::Exact => f.write_str("exact"),
            Replicates::Count(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub estimator: EstimatorKind,
    pub loss: LossKind,
    pub mean: f64,
    /// Variance of the estimator across replicates (or exact).
    pub variance: f64,
    pub bias: f64,
    /// Standard error of `bias`; zero for exact rows.
    pub bias_se: f64,
    /// `mean / unbiased reference`; `None` when the reference is near zero.
    pub relative_bias: Option<f64>,
    pub replicates: Replicates,
}

/// What a mean-plugging estimator is compared against in each replicate.
///
/// Both modes re-evaluate the same formula on the same batch with different
/// means, so the per-replicate difference isolates the cost of plugging in batch
/// means. Estimators that use no means are compared with the population value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ReferenceMode {
    /// True score means; the difference is exactly unbiased for the bias.
    Population,
    /// Means of `factor * k` fresh samples per side, as when a larger held-out
    /// batch is used to estimate the unbiased value.
    Resampled { factor: usize },
}

impl Default for ReferenceMode {
    fn default() -> Self {
        ReferenceMode::Population
    }
}

fn replicate_rng(seed: u64, k: usize, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 32) | r as u64);
    rng
}

fn mean_of(xs: &[f64]) -> f64 {
    pairwise(xs) / xs.len() as f64
}

fn spread(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    pairwise(&sq) / (xs.len() - 1) as f64
}

struct Sampler<'a> {
    real: &'a ScoreDist,
    fake: &'a ScoreDist,
    real_idx: rand::distr::weighted::WeightedIndex<f64>,
    fake_idx: rand::distr::weighted::WeightedIndex<f64>,
}

impl<'a> Sampler<'a> {
    fn new(real: &'a ScoreDist, fake: &'a ScoreDist) -> Self {
        Sampler { real, fake, real_idx: real.sampler(), fake_idx: fake.sampler() }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, k: usize) -> (Vec<f64>, Vec<f64>) {
        let xs = (0..k).map(|_| self.real.values()[self.real_idx.sample(rng)]).collect();
        let ys = (0..k).map(|_| self.fake.values()[self.fake_idx.sample(rng)]).collect();
        (xs, ys)
    }

    fn draw_mean(&self, rng: &mut ChaCha8Rng, n: usize) -> (f64, f64) {
        let mx = (0..n).map(|_| self.real.values()[self.real_idx.sample(rng)]).sum::<f64>() / n as f64;
        let my = (0..n).map(|_| self.fake.values()[self.fake_idx.sample(rng)]).sum::<f64>() / n as f64;
        (mx, my)
    }
}

fn check_sweep(ks: &[usize], kind: EstimatorKind, loss: &ConcaveLoss, replicates: usize) -> Result<()> {
    if ks.is_empty() {
        return Err(invalid("sweep needs at least one k"));
    }
    if replicates < MIN_REPLICATES {
        return Err(precondition(format!("bias rows need at least {MIN_REPLICATES} replicates, got {replicates}")));
    }
    for &k in ks {
        if k == 0 || k > u32::MAX as usize {
            return Err(invalid(format!("batch size {k} out of range")));
        }
        check_estimator(kind, loss, k)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn mc_sweep(
    real: &ScoreDist,
    fake: &ScoreDist,
    ks: &[usize],
    kind: EstimatorKind,
    loss: &ConcaveLoss,
    replicates: usize,
    seed: u64,
    mode: ReferenceMode,
) -> Result<Vec<SweepRow>> {
    check_sweep(ks, kind, loss, replicates)?;
    if let ReferenceMode::Resampled { factor } = mode {
        if factor == 0 {
            return Err(invalid("resampling factor must be at least 1"));
        }
    }
    let sampler = Sampler::new(real, fake);
    let target = population_value(real, fake, kind, loss);
    let true_means = (real.mean(), fake.mean());
    let paired = kind.uses_batch_means();
    let ref_kind = reference_kind(kind);

    let rows = ks
        .iter()
        .map(|&k| {
            let draws: Vec<(f64, f64)> = (0..replicates)
                .into_par_iter()
                .map(|r| {
                    let mut rng = replicate_rng(seed, k, r);
                    let (xs, ys) = sampler.draw(&mut rng, k);
                    let est = evaluate(&xs, &ys, loss, kind, None);
                    let reference = if !paired {
                        target
                    } else {
                        let means = match mode {
                            ReferenceMode::Population => true_means,
                            ReferenceMode::Resampled { factor } => sampler.draw_mean(&mut rng, factor * k),
                        };
                        evaluate(&xs, &ys, loss, ref_kind, Some(means))
                    };
                    (est, reference)
                })
                .collect();
            let ests: Vec<f64> = draws.iter().map(|d| d.0).collect();
            let refs: Vec<f64> = draws.iter().map(|d| d.1).collect();
            let diffs: Vec<f64> = draws.iter().map(|d| d.0 - d.1).collect();
            let mean = mean_of(&ests);
            let variance = spread(&ests, mean);
            let bias = mean_of(&diffs);
            let bias_se = (spread(&diffs, bias) / replicates as f64).sqrt();
            SweepRow {
                k,
                estimator: kind,
                loss: loss.kind,
                mean,
                variance,
                bias,
                bias_se,
                relative_bias: relative(mean, mean_of(&refs)),
                replicates: Replicates::Count(replicates),
            }
        })
        .collect();
    Ok(rows)
}

/// Mean wall time of one estimator evaluation, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub k: usize,
    pub naive_ns: f64,
    pub mvue_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvueComparison {
    /// `(paired, all-pairs)` rows per `k`.
    pub pairs: Vec<(SweepRow, SweepRow)>,
    /// Wall-clock measurements; not reproducible and kept apart from the rows.
    pub timings: Vec<Timing>,
}

const TIMING_BATCHES: usize = 64;

/// Evaluates the paired and all-pairs estimators on the same batches.
pub fn mvue_compare(
    real: &ScoreDist,
    fake: &ScoreDist,
    ks: &[usize],
    loss: &ConcaveLoss,
    replicates: usize,
    seed: u64,
) -> Result<MvueComparison> {
    check_sweep(ks, EstimatorKind::Rp, loss, replicates)?;
    let sampler = Sampler::new(real, fake);
    let target = population_value(real, fake, EstimatorKind::Rp, loss);
    let mut pairs = Vec::with_capacity(ks.len());
    let mut timings = Vec::with_capacity(ks.len());
    for &k in ks {
        let draws: Vec<(f64, f64)> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(seed, k, r);
                let (xs, ys) = sampler.draw(&mut rng, k);
                (evaluate(&xs, &ys, loss, EstimatorKind::Rp, None), evaluate(&xs, &ys, loss, EstimatorKind::RpMvue, None))
            })
            .collect();
        let row = |kind: EstimatorKind, vals: Vec<f64>| {
            let mean = mean_of(&vals);
            let variance = spread(&vals, mean);
            SweepRow {
                k,
                estimator: kind,
                loss: loss.kind,
                mean,
                variance,
                bias: mean - target,
                bias_se: (variance / replicates as f64).sqrt(),
                relative_bias: relative(mean, target),
                replicates: Replicates::Count(replicates),
            }
        };
        pairs.push((
            row(EstimatorKind::Rp, draws.iter().map(|d| d.0).collect()),
            row(EstimatorKind::RpMvue, draws.iter().map(|d| d.1).collect()),
        ));

        let mut rng = replicate_rng(seed ^ 0x7133_5eed, k, 0);
        let batches: Vec<(Vec<f64>, Vec<f64>)> = (0..TIMING_BATCHES).map(|_| sampler.draw(&mut rng, k)).collect();
        let time = |kind| {
            let start = Instant::now();
            for (xs, ys) in &batches {
                black_box(evaluate(black_box(xs), black_box(ys), loss, kind, None));
            }
            start.elapsed().as_nanos() as f64 / TIMING_BATCHES as f64
        };
        timings.push(Timing { k, naive_ns: time(EstimatorKind::Rp), mvue_ns: time(EstimatorKind::RpMvue) });
    }
    Ok(MvueComparison { pairs, timings })
}

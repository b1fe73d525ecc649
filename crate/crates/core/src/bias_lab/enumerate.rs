use serde::{Deserialize, Serialize};

use super::{population_value, relative, Replicates, ScoreDist, SweepRow};
use crate::error::{invalid, precondition};
use crate::estimators::{evaluate, EstimatorKind};
use crate::loss::{ConcaveLoss, LossKind};
use crate::sum::Compensated;
use crate::{Error, Result};

/// Largest number of (real batch, fake batch) outcomes enumerated.
pub const ENUMERATION_BUDGET: f64 = 1e7;

/// `m_real^k * m_fake^k`.
pub fn outcome_count(real: &ScoreDist, fake: &ScoreDist, k: usize) -> f64 {
    (real.len() as f64).powi(k as i32) * (fake.len() as f64).powi(k as i32)
}

pub(crate) fn check_estimator(kind: EstimatorKind, loss: &ConcaveLoss, k: usize) -> Result<()> {
    if kind.is_ls_unbiased() && loss.kind != LossKind::Ls {
        return Err(invalid(format!("{kind} is only defined for the lsgan loss, got {}", loss.kind)));
    }
    if k < kind.min_k() {
        return Err(precondition(format!("{kind} needs k >= {}, got k = {k}", kind.min_k())));
    }
    Ok(())
}

/// Calls `visit(probability, real_batch, fake_batch)` for every outcome.
fn for_each_outcome(real: &ScoreDist, fake: &ScoreDist, k: usize, mut visit: impl FnMut(f64, &[f64], &[f64])) {
    let radix: Vec<usize> = std::iter::repeat(real.len()).take(k).chain(std::iter::repeat(fake.len()).take(k)).collect();
    let mut digits = vec![0usize; 2 * k];
    let mut xs = vec![real.values()[0]; k];
    let mut ys = vec![fake.values()[0]; k];
    loop {
        let mut prob = 1.0;
        for i in 0..k {
            xs[i] = real.values()[digits[i]];
            prob *= real.probs()[digits[i]];
            ys[i] = fake.values()[digits[k + i]];
            prob *= fake.probs()[digits[k + i]];
        }
        visit(prob, &xs, &ys);

        let mut pos = 0;
        loop {
            if pos == 2 * k {
                return;
            }
            digits[pos] += 1;
            if digits[pos] < radix[pos] {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact mean and variance of an estimator over all batches of size `k`.
pub fn exact_moments(
    real: &ScoreDist,
    fake: &ScoreDist,
    k: usize,
    kind: EstimatorKind,
    loss: &ConcaveLoss,
) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    check_estimator(kind, loss, k)?;
    let required = outcome_count(real, fake, k);
    if required > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded { required, budget: ENUMERATION_BUDGET });
    }
    let mut mean = Compensated::default();
    for_each_outcome(real, fake, k, |p, xs, ys| mean.add(p * evaluate(xs, ys, loss, kind, None)));
    let mean = mean.total();
    let mut var = Compensated::default();
    for_each_outcome(real, fake, k, |p, xs, ys| {
        let d = evaluate(xs, ys, loss, kind, None) - mean;
        var.add(p * d * d);
    });
    Ok((mean, var.total()))
}

pub fn exact_expectation(
    real: &ScoreDist,
    fake: &ScoreDist,
    k: usize,
    kind: EstimatorKind,
    loss: &ConcaveLoss,
) -> Result<f64> {
    exact_moments(real, fake, k, kind, loss).map(|m| m.0)
}

pub fn exact_variance(
    real: &ScoreDist,
    fake: &ScoreDist,
    k: usize,
    kind: EstimatorKind,
    loss: &ConcaveLoss,
) -> Result<f64> {
    exact_moments(real, fake, k, kind, loss).map(|m| m.1)
}

/// Enumerated counterpart of a Monte Carlo sweep: bias is `E[estimator]` minus
/// the population value.
pub fn exact_sweep(
    real: &ScoreDist,
    fake: &ScoreDist,
    ks: &[usize],
    kind: EstimatorKind,
    loss: &ConcaveLoss,
) -> Result<Vec<SweepRow>> {
    let target = population_value(real, fake, kind, loss);
    ks.iter()
        .map(|&k| {
            let (mean, variance) = exact_moments(real, fake, k, kind, loss)?;
            Ok(SweepRow {
                k,
                estimator: kind,
                loss: loss.kind,
                mean,
                variance,
                bias: mean - target,
                bias_se: 0.0,
                relative_bias: relative(mean, target),
                replicates: Replicates::Exact,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerableInstance {
    pub label: String,
    pub real: ScoreDist,
    pub fake: ScoreDist,
    pub k: usize,
}

const REAL_POOL: [f64; 3] = [0.0, 1.0, 2.5];
const FAKE_POOL: [f64; 3] = [0.0, 1.0, -1.5];

fn weightings(m: usize) -> Vec<(&'static str, Vec<f64>)> {
    match m {
        1 => vec![("d", vec![1.0])],
        2 => vec![("u", vec![0.5, 0.5]), ("s", vec![0.7, 0.3])],
        _ => vec![("u", vec![1.0 / 3.0; 3]), ("s", vec![0.5, 0.3, 0.2])],
    }
}

fn pool_dists(pool: &[f64; 3], max_m: usize) -> Vec<(String, ScoreDist)> {
    let mut out = Vec::new();
    for m in 1..=max_m.min(3) {
        for (tag, probs) in weightings(m) {
            let d = ScoreDist::new(pool[..m].to_vec(), probs).expect("fixed weightings are valid");
            out.push((format!("{m}{tag}"), d));
        }
    }
    out
}

/// Deterministic family of small instances: supports are prefixes of fixed value
/// pools (size `1..=max_m`, uniform or skewed weights) and `k` runs over
/// `1..=max_k`. With `max_m = 2, max_k = 2` it contains the real `{0, 1}`, fake
/// `{0, 1}`, `k = 2` instance on which the all-pairs estimator strictly beats the
/// paired one.
pub fn enumerable_family(max_m: usize, max_k: usize) -> Vec<EnumerableInstance> {
    let mut out = Vec::new();
    for (rl, real) in pool_dists(&REAL_POOL, max_m) {
        for (fl, fake) in pool_dists(&FAKE_POOL, max_m) {
            for k in 1..=max_k {
                out.push(EnumerableInstance {
                    label: format!("r{rl}-f{fl}-k{k}"),
                    real: real.clone(),
                    fake: fake.clone(),
                    k,
                });
            }
        }
    }
    out
}

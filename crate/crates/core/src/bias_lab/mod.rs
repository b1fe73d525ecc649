//! Bias and variance of the mini-batch estimators.
//!
//! Critic scores are modelled directly by finite [`ScoreDist`]s, one for real and
//! one for fake samples. Small instances are enumerated exactly; larger ones go
//! through a seeded Monte Carlo sweep.

mod enumerate;
mod formulas;
mod monte_carlo;

pub use enumerate::{
    enumerable_family, exact_expectation, exact_moments, exact_sweep, exact_variance, outcome_count,
    EnumerableInstance, ENUMERATION_BUDGET,
};
pub use formulas::{verify_bias_formula, BiasCandidate, BiasReport, BiasTarget, CandidateCheck};
pub use monte_carlo::{mc_sweep, mvue_compare, MvueComparison, ReferenceMode, Replicates, SweepRow, Timing};

use rand::distr::weighted::WeightedIndex;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::estimators::EstimatorKind;
use crate::loss::ConcaveLoss;
use crate::oracle::PROB_SUM_TOL;
use crate::Result;

/// Finite distribution of critic scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScoreDist")]
pub struct ScoreDist {
    values: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScoreDist {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawScoreDist> for ScoreDist {
    type Error = crate::Error;

    fn try_from(raw: RawScoreDist) -> Result<Self> {
        ScoreDist::new(raw.values, raw.probs)
    }
}

impl ScoreDist {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("score distribution needs at least one value"));
        }
        if values.len() != probs.len() {
            return Err(invalid(format!("{} values but {} probabilities", values.len(), probs.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("score values must be finite"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("probabilities must be finite and non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(ScoreDist { values, probs })
    }

    pub fn point_mass(at: f64) -> Result<Self> {
        ScoreDist::new(vec![at], vec![1.0])
    }

    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len().max(1);
        ScoreDist::new(values, vec![1.0 / n as f64; n])
    }

    /// Normal density with mean `centre` and standard deviation `sd`, sampled on
    /// `points` equally spaced values across `[lo, hi]` and renormalised.
    pub fn discretized_normal(centre: f64, sd: f64, lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 2 || !(hi > lo) || !(sd > 0.0) {
            return Err(invalid("discretized normal needs points >= 2, hi > lo and sd > 0"));
        }
        let values: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
        let dens: Vec<f64> = values.iter().map(|v| (-0.5 * ((v - centre) / sd).powi(2)).exp()).collect();
        let total: f64 = dens.iter().sum();
        let mut probs: Vec<f64> = dens.iter().map(|d| d / total).collect();
        // push the rounding residue into the largest cell so the sum check holds tightly
        let residue = 1.0 - probs.iter().sum::<f64>();
        let top = (0..points).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap_or(0);
        probs[top] += residue;
        ScoreDist::new(values, probs)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().zip(&self.probs).map(|(v, p)| p * (v - m) * (v - m)).sum()
    }

    /// `E g(X)`.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| p * g(*v)).sum()
    }

    pub(crate) fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.probs).expect("validated probabilities")
    }
}

/// The quantity an estimator targets: its formula evaluated with the true score
/// means and expected over single real and fake scores.
pub fn population_value(real: &ScoreDist, fake: &ScoreDist, kind: EstimatorKind, loss: &ConcaveLoss) -> f64 {
    let (mx, my) = (real.mean(), fake.mean());
    let mc = 0.5 * (mx + my);
    let f = |z: f64| loss.value(z);
    let ra1 = || real.expect(|x| f(x - my));
    let ra2 = || fake.expect(|y| f(mx - y));
    let rc = || real.expect(|x| f(x - mc)) + fake.expect(|y| f(mc - y));
    match kind {
        EstimatorKind::Sy => real.expect(f) + fake.expect(|y| f(-y)),
        EstimatorKind::Rp | EstimatorKind::RpMvue => 2.0 * real.expect(|x| fake.expect(|y| f(x - y))),
        EstimatorKind::Ra | EstimatorKind::RaLsUnbiased => ra1() + ra2(),
        EstimatorKind::Ralf | EstimatorKind::RalfLsUnbiased => 2.0 * ra1(),
        EstimatorKind::Rc | EstimatorKind::RcLsUnbiased => rc(),
        EstimatorKind::RaTerm1 => ra1(),
        EstimatorKind::RaTerm2 => ra2(),
        EstimatorKind::RcTerm1 => real.expect(|x| f(x - mc)),
        EstimatorKind::RcTerm2 => fake.expect(|y| f(mc - y)),
    }
}

/// The plain plug-in estimator whose formula `kind` evaluates; bias corrections
/// are stripped so the result can be re-evaluated with reference means.
pub(crate) fn reference_kind(kind: EstimatorKind) -> EstimatorKind {
    match kind {
        EstimatorKind::RaLsUnbiased => EstimatorKind::Ra,
        EstimatorKind::RalfLsUnbiased => EstimatorKind::Ralf,
        EstimatorKind::RcLsUnbiased => EstimatorKind::Rc,
        other => other,
    }
}

/// Ratio of the biased estimate to the unbiased one; undefined near zero.
pub(crate) fn relative(mean: f64, reference: f64) -> Option<f64> {
    (reference.abs() > 1e-12).then(|| mean / reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ScoreDist::new(vec![], vec![]).is_err());
        assert!(ScoreDist::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(ScoreDist::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(ScoreDist::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(ScoreDist::new(vec![0.0, 0.0], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn moments() {
        let d = ScoreDist::uniform(vec![-1.0, 1.0]).unwrap();
        assert_eq!(d.mean(), 0.0);
        assert_eq!(d.variance(), 1.0);
        let g = ScoreDist::discretized_normal(0.5, 1.0, -4.0, 4.0, 401).unwrap();
        assert!((g.mean() - 0.5).abs() < 0.01);
        assert!((g.variance() - 1.0).abs() < 0.05);
    }

    #[test]
    fn population_values_for_ls() {
        use crate::estimators::{closed_div_ls, LsClosedVariant, MomentSpec};
        let real = ScoreDist::new(vec![0.0, 2.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let fake = ScoreDist::new(vec![-1.0, 0.5], vec![0.4, 0.6]).unwrap();
        let m = MomentSpec::new(real.mean(), real.variance(), fake.mean(), fake.variance(), 3).unwrap();
        let f = ConcaveLoss::lsgan();
        let pairs = [
            (EstimatorKind::Ra, LsClosedVariant::Ra),
            (EstimatorKind::RaTerm1, LsClosedVariant::RaTerm1),
            (EstimatorKind::RaTerm2, LsClosedVariant::RaTerm2),
            (EstimatorKind::Ralf, LsClosedVariant::Ralf),
            (EstimatorKind::Rc, LsClosedVariant::Rc),
            (EstimatorKind::RcTerm1, LsClosedVariant::RcTerm1),
        ];
        for (kind, closed) in pairs {
            let v = population_value(&real, &fake, kind, &f);
            assert!((v - closed_div_ls(&m, closed, true)).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn deserialization_validates() {
        let ok: ScoreDist = serde_json::from_str(r#"{"values":[0,1],"probs":[0.5,0.5]}"#).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(serde_json::from_str::<ScoreDist>(r#"{"values":[0,1],"probs":[0.5,0.6]}"#).is_err());
        assert!(serde_json::from_str::<ScoreDist>(r#"{"values":[0],"probs":[1],"extra":1}"#).is_err());
    }
}

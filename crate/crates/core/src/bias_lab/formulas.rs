//! Arbitration between candidate closed-form biases of the least-squares
//! plug-in estimators.
//!
//! Published derivations attach these expressions to estimators inconsistently,
//! so each one is tested against the enumerated bias instead of being trusted by
//! name.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::{exact_expectation, population_value, ScoreDist};
use crate::estimators::EstimatorKind;
use crate::loss::ConcaveLoss;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasTarget {
    RaTerm1,
    RaTerm2,
    Ralf,
    Rc,
}

impl BiasTarget {
    pub const ALL: [BiasTarget; 4] = [BiasTarget::RaTerm1, BiasTarget::RaTerm2, BiasTarget::Ralf, BiasTarget::Rc];

    pub fn estimator(self) -> EstimatorKind {
        match self {
            BiasTarget::RaTerm1 => EstimatorKind::RaTerm1,
            BiasTarget::RaTerm2 => EstimatorKind::RaTerm2,
            BiasTarget::Ralf => EstimatorKind::Ralf,
            BiasTarget::Rc => EstimatorKind::Rc,
        }
    }

    pub fn name(self) -> &'static str {
        self.estimator().name()
    }
}

impl fmt::Display for BiasTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BiasTarget {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        BiasTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| crate::error::invalid(format!("unknown bias target `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasCandidate {
    NegFakeVar,
    NegRealVar,
    NegSumVar,
    ThreeQuarterMix,
    HalfSumVar,
    NegTwiceFakeVar,
}

impl BiasCandidate {
    pub const ALL: [BiasCandidate; 6] = [
        BiasCandidate::NegFakeVar,
        BiasCandidate::NegRealVar,
        BiasCandidate::NegSumVar,
        BiasCandidate::ThreeQuarterMix,
        BiasCandidate::HalfSumVar,
        BiasCandidate::NegTwiceFakeVar,
    ];

    pub fn formula(self) -> &'static str {
        match self {
            BiasCandidate::NegFakeVar => "-var_y/k",
            BiasCandidate::NegRealVar => "-var_x/k",
            BiasCandidate::NegSumVar => "-(var_x+var_y)/k",
            BiasCandidate::ThreeQuarterMix => "3var_x/(4k)-var_y/(4k)",
            BiasCandidate::HalfSumVar => "(var_x+var_y)/(2k)",
            BiasCandidate::NegTwiceFakeVar => "-2var_y/k",
        }
    }

    pub fn value(self, var_x: f64, var_y: f64, k: usize) -> f64 {
        let k = k as f64;
        match self {
            BiasCandidate::NegFakeVar => -var_y / k,
            BiasCandidate::NegRealVar => -var_x / k,
            BiasCandidate::NegSumVar => -(var_x + var_y) / k,
            BiasCandidate::ThreeQuarterMix => (3.0 * var_x - var_y) / (4.0 * k),
            BiasCandidate::HalfSumVar => (var_x + var_y) / (2.0 * k),
            BiasCandidate::NegTwiceFakeVar => -2.0 * var_y / k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub candidate: BiasCandidate,
    pub value: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub target: BiasTarget,
    pub k: usize,
    /// Enumerated `E[estimator]` minus the population value.
    pub measured_bias: f64,
    pub checks: Vec<CandidateCheck>,
}

impl BiasReport {
    pub fn matching(&self) -> Vec<BiasCandidate> {
        self.checks.iter().filter(|c| c.matches).map(|c| c.candidate).collect()
    }
}

const MATCH_TOL: f64 = 1e-10;

/// Enumerates the least-squares bias of `target` at batch size `k` and compares
/// it with every candidate formula.
pub fn verify_bias_formula(real: &ScoreDist, fake: &ScoreDist, k: usize, target: BiasTarget) -> Result<BiasReport> {
    let loss = ConcaveLoss::lsgan();
    let kind = target.estimator();
    let expected = exact_expectation(real, fake, k, kind, &loss)?;
    let measured_bias = expected - population_value(real, fake, kind, &loss);
    let (vx, vy) = (real.variance(), fake.variance());
    let checks = BiasCandidate::ALL
        .into_iter()
        .map(|candidate| {
            let value = candidate.value(vx, vy, k);
            let matches = (value - measured_bias).abs() <= MATCH_TOL * measured_bias.abs().max(1.0);
            CandidateCheck { candidate, value, matches }
        })
        .collect();
    Ok(BiasReport { target, k, measured_bias, checks })
}

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::Result;

/// Finite distribution on strictly increasing real support points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist")]
pub struct DiscreteDist {
    points: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDist {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for DiscreteDist {
    type Error = crate::Error;

    fn try_from(raw: RawDist) -> Result<Self> {
        DiscreteDist::new(raw.points, raw.probs)
    }
}

pub const PROB_SUM_TOL: f64 = 1e-12;

impl DiscreteDist {
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("distribution needs at least one support point"));
        }
        if points.len() != probs.len() {
            return Err(invalid(format!("{} points but {} probabilities", points.len(), probs.len())));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(invalid("support points must be finite"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("support points must be strictly increasing"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("probabilities must be finite and non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(invalid(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(DiscreteDist { points, probs })
    }

    pub fn point_mass(at: f64) -> Result<Self> {
        DiscreteDist::new(vec![at], vec![1.0])
    }

    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        DiscreteDist::new(points, vec![1.0 / n as f64; n])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn same_support(&self, other: &DiscreteDist) -> bool {
        self.points == other.points
    }

    /// Re-expresses both distributions on the union of their supports.
    pub fn align(&self, other: &DiscreteDist) -> (DiscreteDist, DiscreteDist) {
        if self.same_support(other) {
            return (self.clone(), other.clone());
        }
        let mut union: Vec<f64> = self.points.iter().chain(&other.points).copied().collect();
        union.sort_by(f64::total_cmp);
        union.dedup();
        let spread = |d: &DiscreteDist| {
            let mut probs = vec![0.0; union.len()];
            for (x, p) in d.points.iter().zip(&d.probs) {
                let i = union.binary_search_by(|u| u.total_cmp(x)).expect("point is in the union");
                probs[i] = *p;
            }
            DiscreteDist { points: union.clone(), probs }
        };
        (spread(self), spread(other))
    }

    /// `(P + Q) / 2` on the union support.
    pub fn mixture(&self, other: &DiscreteDist) -> DiscreteDist {
        let (p, q) = self.align(other);
        let probs = p.probs.iter().zip(&q.probs).map(|(a, b)| 0.5 * (a + b)).collect();
        DiscreteDist { points: p.points, probs }
    }

    /// Total variation distance `sup_S |P(S) - Q(S)|`.
    pub fn total_variation(&self, other: &DiscreteDist) -> f64 {
        let (p, q) = self.align(other);
        0.5 * p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }
}

/// One critic value per support point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticTable {
    values: Vec<f64>,
}

impl CriticTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("critic values must be finite"));
        }
        Ok(CriticTable { values })
    }

    pub fn constant(n: usize, value: f64) -> Self {
        CriticTable { values: vec![value; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn from_unchecked(values: Vec<f64>) -> Self {
        CriticTable { values }
    }
}

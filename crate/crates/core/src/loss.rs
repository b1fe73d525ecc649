//! Concave losses used inside relativistic and symmetric objectives.
//!
//! Every loss satisfies `f(0) = 0`, `f'(0) != 0`, `sup f = M > 0` and has its
//! supremum at a positive argument (possibly at infinity). These are exactly the
//! hypotheses needed for the objectives in [`crate::oracle`] to be divergences,
//! and [`ConcaveLoss::check_properties`] certifies them numerically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, precondition};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    /// `log(sigmoid(z)) + log 2`
    #[serde(rename = "sgan")]
    S,
    /// `-(z - 1)^2 + 1`
    #[serde(rename = "lsgan")]
    Ls,
    /// `-max(0, 1 - z) + 1`
    #[serde(rename = "hinge")]
    Hinge,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::S, LossKind::Ls, LossKind::Hinge];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::S => "sgan",
            LossKind::Ls => "lsgan",
            LossKind::Hinge => "hinge",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown loss `{s}` (expected sgan, lsgan or hinge)")))
    }
}

/// A concave loss together with its supremum `M` and the location of the supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcaveLoss {
    pub kind: LossKind,
    /// `sup f`.
    pub sup: f64,
    /// Smallest maximiser of `f`; `+inf` when the supremum is only approached.
    pub argsup: f64,
}

impl ConcaveLoss {
    pub fn new(kind: LossKind) -> Self {
        match kind {
            LossKind::S => ConcaveLoss { kind, sup: LN_2, argsup: f64::INFINITY },
            LossKind::Ls => ConcaveLoss { kind, sup: 1.0, argsup: 1.0 },
            LossKind::Hinge => ConcaveLoss { kind, sup: 1.0, argsup: 1.0 },
        }
    }

    pub fn sgan() -> Self {
        Self::new(LossKind::S)
    }

    pub fn lsgan() -> Self {
        Self::new(LossKind::Ls)
    }

    pub fn hinge() -> Self {
        Self::new(LossKind::Hinge)
    }

    /// `f(z)` without input validation. Hot loops use this.
    #[inline]
    pub fn value(&self, z: f64) -> f64 {
        match self.kind {
            // log(sigmoid(z)) = -log1p(exp(-z)), rearranged so exp never overflows
            LossKind::S => {
                if z >= 0.0 {
                    -(-z).exp().ln_1p() + LN_2
                } else {
                    z - z.exp().ln_1p() + LN_2
                }
            }
            LossKind::Ls => {
                let d = z - 1.0;
                -d * d + 1.0
            }
            LossKind::Hinge => z.min(1.0),
        }
    }

    /// `f'(z)`; for hinge the kink at 1 takes the right derivative 0.
    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        match self.kind {
            LossKind::S => {
                // 1 - sigmoid(z) = sigmoid(-z)
                if z >= 0.0 {
                    let e = (-z).exp();
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + z.exp())
                }
            }
            LossKind::Ls => -2.0 * (z - 1.0),
            LossKind::Hinge => {
                if z < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        check_finite(z)?;
        Ok(self.value(z))
    }

    pub fn grad(&self, z: f64) -> Result<f64> {
        check_finite(z)?;
        Ok(self.derivative(z))
    }

    /// Twice the supremum: the largest value any of the objectives can reach.
    pub fn max_divergence(&self) -> f64 {
        2.0 * self.sup
    }

    /// Randomised certificate of the hypotheses every loss must satisfy.
    pub fn check_properties(&self, samples: usize, seed: u64) -> Result<PropsReport> {
        if samples < 100 {
            return Err(precondition(format!("property check needs at least 100 samples, got {samples}")));
        }
        let mut report = PropsReport { loss: self.kind, samples, violations: Vec::new() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let f0 = self.value(0.0);
        if f0.abs() > 1e-12 {
            report.fail("f(0) = 0", vec![0.0], format!("f(0) = {f0}"));
        }

        let h = 1e-6;
        let fd = (self.value(h) - self.value(-h)) / (2.0 * h);
        let analytic = self.derivative(0.0);
        if analytic == 0.0 {
            report.fail("f'(0) != 0", vec![0.0], "analytic derivative vanishes".into());
        }
        if (fd - analytic).abs() > 1e-6 {
            report.fail("f'(0) matches finite difference", vec![0.0], format!("analytic {analytic}, central difference {fd}"));
        }

        if !(self.sup > 0.0) {
            report.fail("M > 0", vec![], format!("M = {}", self.sup));
        }
        if !(self.argsup > 0.0) {
            report.fail("argsup > 0", vec![], format!("argsup = {}", self.argsup));
        }
        let at_argsup = if self.argsup.is_finite() { self.value(self.argsup) } else { self.value(700.0) };
        if (at_argsup - self.sup).abs() > 1e-12 {
            report.fail("f(argsup) = M", vec![self.argsup], format!("f(argsup) = {at_argsup}, M = {}", self.sup));
        }

        for _ in 0..samples {
            let a: f64 = rng.random_range(-50.0..50.0);
            let b: f64 = rng.random_range(-50.0..50.0);
            let t: f64 = rng.random_range(0.0..=1.0);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };

            let lhs = self.value(t * a + (1.0 - t) * b);
            let rhs = t * self.value(a) + (1.0 - t) * self.value(b);
            if lhs < rhs - 1e-9 {
                report.fail("concavity", vec![a, b, t], format!("f(mix) = {lhs} < chord {rhs}"));
            }

            for z in [a, b] {
                let fz = self.value(z);
                if fz > self.sup + 1e-12 {
                    report.fail("f <= M", vec![z], format!("f({z}) = {fz}"));
                }
                if self.value(z) + self.value(-z) > 1e-12 {
                    report.fail("f(z) + f(-z) <= 0", vec![z], format!("sum = {}", self.value(z) + self.value(-z)));
                }
            }

            // slope f(g*s)/s is non-increasing in s > 0 for any fixed g != 0
            let g: f64 = rng.random_range(-5.0..5.0);
            let s1: f64 = rng.random_range(1e-3..10.0);
            let s2: f64 = rng.random_range(1e-3..10.0);
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            if g != 0.0 && self.value(g * hi) / hi > self.value(g * lo) / lo + 1e-9 {
                report.fail("slope f(g s)/s non-increasing", vec![g, lo, hi], "slope increased".into());
            }
        }
        Ok(report)
    }
}

fn check_finite(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("loss argument must be finite, got {z}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub property: &'static str,
    pub witness: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropsReport {
    pub loss: LossKind,
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl PropsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn fail(&mut self, property: &'static str, witness: Vec<f64>, detail: String) {
        // one witness per property is enough
        if self.violations.iter().all(|v| v.property != property) {
            self.violations.push(Violation { property, witness, detail });
        }
    }
}

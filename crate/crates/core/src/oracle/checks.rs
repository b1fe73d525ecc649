use serde::{Deserialize, Serialize};

use crate::error::precondition;
use crate::loss::ConcaveLoss;
use crate::oracle::{solve_divergence, wasserstein_1d, witness_critic, DiscreteDist, SolveOptions, Witness};
use crate::{Result, Variant};

/// Below this total variation two distributions are treated as equal.
const IDENTITY_TV: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub variant: Variant,
    pub tv: f64,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub witness: Option<Witness>,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks non-negativity, zero at `P = Q`, and strict positivity certified by the
/// witness critic when `P != Q`.
pub fn check_axioms(
    p: &DiscreteDist,
    q: &DiscreteDist,
    loss: &ConcaveLoss,
    variant: Variant,
    tol: f64,
    opts: &SolveOptions,
) -> Result<AxiomReport> {
    let tv = p.total_variation(q);
    let solved = solve_divergence(p, q, loss, variant, opts)?;
    let mut failures = Vec::new();
    if solved.value < -tol {
        failures.push(format!("negative divergence {}", solved.value));
    }
    let witness = if tv <= IDENTITY_TV {
        if solved.value > tol {
            failures.push(format!("divergence {} between identical distributions", solved.value));
        }
        None
    } else {
        match witness_critic(p, q, loss, variant) {
            Ok(w) => {
                if solved.value < w.value - tol {
                    failures.push(format!("divergence {} below witness value {}", solved.value, w.value));
                }
                if !(solved.value > 0.0) {
                    failures.push(format!("divergence {} not positive for P != Q", solved.value));
                }
                Some(w)
            }
            Err(e) => {
                failures.push(e.to_string());
                None
            }
        }
    };
    Ok(AxiomReport {
        variant,
        tv,
        value: solved.value,
        converged: solved.converged,
        iterations: solved.iterations,
        witness,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub sy: f64,
    pub rp: f64,
    pub ralf: f64,
    pub ra: f64,
    pub violations: Vec<String>,
}

impl OrderingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `D_Sy <= D_Rp <= D_Ralf` and `D_Rp <= D_Ra` within `tol`.
pub fn check_ordering(
    p: &DiscreteDist,
    q: &DiscreteDist,
    loss: &ConcaveLoss,
    tol: f64,
    opts: &SolveOptions,
) -> Result<OrderingReport> {
    let d = |v| solve_divergence(p, q, loss, v, opts).map(|r| r.value);
    let (sy, rp, ralf, ra) = (d(Variant::Sy)?, d(Variant::Rp)?, d(Variant::Ralf)?, d(Variant::Ra)?);
    let mut violations = Vec::new();
    for (lo, hi, name) in [(sy, rp, "sy <= rp"), (rp, ralf, "rp <= ralf"), (rp, ra, "rp <= ra")] {
        if lo > hi + tol {
            violations.push(format!("{name} violated: {lo} > {hi}"));
        }
    }
    Ok(OrderingReport { sy, rp, ralf, ra, violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// `P_n = delta_{1/n}` against `P = delta_0`.
    ShrinkingOffset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeaknessRow {
    pub n: usize,
    pub w1: f64,
    pub sy: f64,
    pub rp: f64,
    pub ra: f64,
}

/// A sequence converging in distribution whose f-based divergences stay at `2M`
/// while Wasserstein-1 goes to zero.
pub fn weakness_sequence(
    kind: SequenceKind,
    steps: usize,
    loss: &ConcaveLoss,
    opts: &SolveOptions,
) -> Result<Vec<WeaknessRow>> {
    if steps < 2 {
        return Err(precondition(format!("weakness sequence needs at least 2 steps, got {steps}")));
    }
    let SequenceKind::ShrinkingOffset = kind;
    let target = DiscreteDist::point_mass(0.0)?;
    (1..=steps)
        .map(|n| {
            let pn = DiscreteDist::point_mass(1.0 / n as f64)?;
            let d = |v| solve_divergence(&pn, &target, loss, v, opts).map(|r| r.value);
            Ok(WeaknessRow { n, w1: wasserstein_1d(&pn, &target), sy: d(Variant::Sy)?, rp: d(Variant::Rp)?, ra: d(Variant::Ra)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::LossKind;

    #[test]
    fn axioms_on_identical_uniform() {
        let p = DiscreteDist::uniform(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let r = check_axioms(&p, &p, &ConcaveLoss::lsgan(), Variant::Rc, 1e-6, &SolveOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!(r.value.abs() < 1e-6);
    }

    #[test]
    fn axioms_on_separated_hinge() {
        let p = DiscreteDist::point_mass(-1.0).unwrap();
        let q = DiscreteDist::point_mass(1.0).unwrap();
        let r = check_axioms(&p, &q, &ConcaveLoss::hinge(), Variant::Rp, 1e-6, &SolveOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn ordering_on_worked_instance() {
        let p = DiscreteDist::new(vec![0.0, 1.0], vec![0.8, 0.2]).unwrap();
        let q = DiscreteDist::new(vec![0.0, 1.0], vec![0.2, 0.8]).unwrap();
        let r = check_ordering(&p, &q, &ConcaveLoss::lsgan(), 1e-6, &SolveOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!((r.sy - 0.72).abs() < 1e-4);
        assert!((r.rp - 1.05882).abs() < 1e-4);
        assert!((r.ra - 1.38462).abs() < 1e-4);
    }

    #[test]
    fn ordering_on_identical() {
        let p = DiscreteDist::uniform(vec![0.0, 1.0]).unwrap();
        for kind in LossKind::ALL {
            let r = check_ordering(&p, &p, &ConcaveLoss::new(kind), 1e-6, &SolveOptions::default()).unwrap();
            assert!(r.passed());
            assert!(r.sy.abs() < 1e-6 && r.rp.abs() < 1e-6 && r.ra.abs() < 1e-6);
        }
    }

    #[test]
    fn weakness_rows() {
        let rows = weakness_sequence(SequenceKind::ShrinkingOffset, 4, &ConcaveLoss::lsgan(), &SolveOptions::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].w1, 1.0);
        assert_eq!(rows[3].w1, 0.25);
        for r in &rows {
            for d in [r.sy, r.rp, r.ra] {
                assert!((d - 2.0).abs() < 1e-3);
            }
        }
        assert!(weakness_sequence(SequenceKind::ShrinkingOffset, 1, &ConcaveLoss::lsgan(), &SolveOptions::default()).is_err());
    }
}

use serde::{Deserialize, Serialize};

use crate::error::precondition;
use crate::loss::ConcaveLoss;
use crate::oracle::{CriticTable, DiscreteDist, Problem};
use crate::{Error, Result, Variant};

/// Two-level critic certifying a strictly positive divergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// `nabla` on `{x : P(x) > Q(x)}`, 0 elsewhere, on the union support.
    pub critic: CriticTable,
    pub nabla: f64,
    /// Objective value of `critic`; a lower bound on the divergence.
    pub value: f64,
}

/// Grid points per decade in the step search.
const GRID_PER_DECADE: usize = 40;
const GRID_DECADES: usize = 8;
/// Upper end of the search when the loss's supremum is only reached at infinity.
const UNBOUNDED_ARGSUP_CAP: f64 = 50.0;

/// Builds `C = nabla * 1_T` with `T = {x : P(x) > Q(x)}` and searches a log grid
/// of `nabla` in `(0, argsup f]` for the largest objective value.
pub fn witness_critic(p: &DiscreteDist, q: &DiscreteDist, loss: &ConcaveLoss, variant: Variant) -> Result<Witness> {
    let (p, q) = p.align(q);
    if p.probs() == q.probs() {
        return Err(precondition("witness critic needs P != Q"));
    }
    let indicator: Vec<f64> =
        p.probs().iter().zip(q.probs()).map(|(a, b)| if a > b { 1.0 } else { 0.0 }).collect();
    let problem = Problem::new(&p, &q, *loss, variant)?;

    let top = if loss.argsup.is_finite() { loss.argsup } else { UNBOUNDED_ARGSUP_CAP };
    let steps = GRID_PER_DECADE * GRID_DECADES;
    let mut best: Option<(f64, f64)> = None;
    let mut critic = vec![0.0; p.len()];
    for s in 0..=steps {
        let nabla = top * 10f64.powf(-(GRID_DECADES as f64) * (1.0 - s as f64 / steps as f64));
        for (c, t) in critic.iter_mut().zip(&indicator) {
            *c = nabla * t;
        }
        let value = problem.value(&critic);
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((nabla, value));
        }
    }
    let (nabla, value) = best.expect("grid is non-empty");
    if !(value > 0.0) {
        return Err(Error::WitnessSearch(format!(
            "best two-level critic reached {value} (tv = {})",
            p.total_variation(&q)
        )));
    }
    let critic = indicator.iter().map(|t| nabla * t).collect();
    Ok(Witness { critic: CriticTable::from_unchecked(critic), nabla, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::LossKind;

    #[test]
    fn separated_point_masses() {
        let p = DiscreteDist::point_mass(0.0).unwrap();
        let q = DiscreteDist::point_mass(1.0).unwrap();
        let w = witness_critic(&p, &q, &ConcaveLoss::lsgan(), Variant::Rp).unwrap();
        assert_eq!(w.nabla, 1.0);
        assert_eq!(w.value, 2.0);
        assert_eq!(w.critic.values(), &[1.0, 0.0]);
    }

    #[test]
    fn paired_two_point_profile() {
        // L(nabla) = 2 (0.64 f(nabla) + 0.04 f(-nabla)); the witness maximises it over the grid
        let p = DiscreteDist::new(vec![0.0, 1.0], vec![0.8, 0.2]).unwrap();
        let q = DiscreteDist::new(vec![0.0, 1.0], vec![0.2, 0.8]).unwrap();
        let f = ConcaveLoss::lsgan();
        let at_half = crate::oracle::objective(&p, &q, &CriticTable::new(vec![0.5, 0.0]).unwrap(), &f, Variant::Rp).unwrap();
        assert!((at_half - 2.0 * (0.64 * 0.75 + 0.04 * -1.25)).abs() < 1e-12);
        let w = witness_critic(&p, &q, &f, Variant::Rp).unwrap();
        assert!(w.value >= at_half);
    }

    #[test]
    fn hinge_average_finds_positive_step() {
        let p = DiscreteDist::new(vec![0.0, 1.0], vec![0.6, 0.4]).unwrap();
        let q = DiscreteDist::new(vec![0.0, 1.0], vec![0.4, 0.6]).unwrap();
        let w = witness_critic(&p, &q, &ConcaveLoss::hinge(), Variant::Ra).unwrap();
        assert!(w.nabla > 0.0 && w.nabla <= 1.0);
        assert!(w.value > 0.0);
    }

    #[test]
    fn equal_distributions_are_rejected() {
        let p = DiscreteDist::uniform(vec![0.0, 1.0]).unwrap();
        for kind in LossKind::ALL {
            assert!(matches!(
                witness_critic(&p, &p, &ConcaveLoss::new(kind), Variant::Rc),
                Err(Error::Precondition(_))
            ));
        }
    }
}

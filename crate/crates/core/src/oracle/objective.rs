//! Population objectives as functions of a critic table.
//!
//! Every objective is a non-negative combination `sum_m w_m f(a_m . c)` of the loss
//! applied to linear functionals of the critic, hence concave in `c`.

use crate::error::invalid;
use crate::loss::ConcaveLoss;
use crate::oracle::{CriticTable, DiscreteDist};
use crate::{Result, Variant};

/// P and Q probabilities on a shared support, with a loss and a variant.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub loss: ConcaveLoss,
    pub variant: Variant,
}

/// One `w * f(a . c)` term.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTerm {
    pub weight: f64,
    pub coeffs: Vec<f64>,
}

impl Problem {
    pub fn new(p: &DiscreteDist, q: &DiscreteDist, loss: ConcaveLoss, variant: Variant) -> Result<Self> {
        if !p.same_support(q) {
            return Err(invalid("P and Q must share a support; align them first"));
        }
        Ok(Problem { p: p.probs().to_vec(), q: q.probs().to_vec(), loss, variant })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    fn dot(w: &[f64], c: &[f64]) -> f64 {
        w.iter().zip(c).map(|(a, b)| a * b).sum()
    }

    fn mix(&self) -> Vec<f64> {
        self.p.iter().zip(&self.q).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn value(&self, c: &[f64]) -> f64 {
        let f = &self.loss;
        let (p, q) = (&self.p, &self.q);
        // sum_i w_i f(sign * (c_i - centre)), skipping zero weights
        let weighted = |w: &[f64], centre: f64, sign: f64| -> f64 {
            w.iter()
                .zip(c)
                .filter(|(wi, _)| **wi > 0.0)
                .map(|(wi, ci)| wi * f.value(sign * (ci - centre)))
                .sum()
        };
        match self.variant {
            Variant::Sy => weighted(p, 0.0, 1.0) + weighted(q, 0.0, -1.0),
            Variant::Rp => {
                let mut total = 0.0;
                for (i, pi) in p.iter().enumerate().filter(|(_, pi)| **pi > 0.0) {
                    for (j, qj) in q.iter().enumerate().filter(|(_, qj)| **qj > 0.0) {
                        total += pi * qj * f.value(c[i] - c[j]);
                    }
                }
                2.0 * total
            }
            Variant::Ra => weighted(p, Self::dot(q, c), 1.0) + weighted(q, Self::dot(p, c), -1.0),
            Variant::Ralf => 2.0 * weighted(p, Self::dot(q, c), 1.0),
            Variant::Rc => {
                let centre = Self::dot(&self.mix(), c);
                weighted(p, centre, 1.0) + weighted(q, centre, -1.0)
            }
        }
    }

    pub fn gradient(&self, c: &[f64], out: &mut [f64]) {
        let f = &self.loss;
        let (p, q) = (&self.p, &self.q);
        let n = self.n();
        out.iter_mut().for_each(|g| *g = 0.0);
        match self.variant {
            Variant::Sy => {
                for i in 0..n {
                    out[i] = p[i] * f.derivative(c[i]) - q[i] * f.derivative(-c[i]);
                }
            }
            Variant::Rp => {
                for i in 0..n {
                    if p[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        if q[j] == 0.0 {
                            continue;
                        }
                        let d = 2.0 * p[i] * q[j] * f.derivative(c[i] - c[j]);
                        out[i] += d;
                        out[j] -= d;
                    }
                }
            }
            Variant::Ra | Variant::Ralf | Variant::Rc => {
                let mix = self.mix();
                let (centre_weights_1, centre_weights_2): (&[f64], &[f64]) = match self.variant {
                    Variant::Rc => (&mix, &mix),
                    _ => (q, p),
                };
                let scale1 = if self.variant == Variant::Ralf { 2.0 } else { 1.0 };
                // term 1: sum_i p_i f(c_i - w1 . c)
                let centre1 = Self::dot(centre_weights_1, c);
                let mut s1 = 0.0;
                for i in 0..n {
                    if p[i] > 0.0 {
                        let d = scale1 * p[i] * f.derivative(c[i] - centre1);
                        out[i] += d;
                        s1 += d;
                    }
                }
                for (g, w) in out.iter_mut().zip(centre_weights_1) {
                    *g -= s1 * w;
                }
                if self.variant != Variant::Ralf {
                    // term 2: sum_j q_j f(w2 . c - c_j)
                    let centre2 = Self::dot(centre_weights_2, c);
                    let mut s2 = 0.0;
                    for j in 0..n {
                        if q[j] > 0.0 {
                            let d = q[j] * f.derivative(centre2 - c[j]);
                            out[j] -= d;
                            s2 += d;
                        }
                    }
                    for (g, w) in out.iter_mut().zip(centre_weights_2) {
                        *g += s2 * w;
                    }
                }
            }
        }
    }

    /// The objective written as explicit `w * f(a . c)` terms (zero-weight and
    /// identically-zero terms dropped).
    pub fn linear_terms(&self) -> Vec<LinearTerm> {
        let n = self.n();
        let (p, q) = (&self.p, &self.q);
        let unit = |i: usize, s: f64| {
            let mut a = vec![0.0; n];
            a[i] = s;
            a
        };
        let centred = |i: usize, centre: &[f64], s: f64| -> Vec<f64> {
            let mut a: Vec<f64> = centre.iter().map(|w| -s * w).collect();
            a[i] += s;
            a
        };
        let mut terms = Vec::new();
        let mut push = |weight: f64, coeffs: Vec<f64>| {
            if weight > 0.0 {
                terms.push(LinearTerm { weight, coeffs });
            }
        };
        match self.variant {
            Variant::Sy => {
                for i in 0..n {
                    push(p[i], unit(i, 1.0));
                    push(q[i], unit(i, -1.0));
                }
            }
            Variant::Rp => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let mut a = unit(i, 1.0);
                            a[j] = -1.0;
                            push(2.0 * p[i] * q[j], a);
                        }
                    }
                }
            }
            Variant::Ra => {
                for i in 0..n {
                    push(p[i], centred(i, q, 1.0));
                    push(q[i], centred(i, p, -1.0));
                }
            }
            Variant::Ralf => {
                for i in 0..n {
                    push(2.0 * p[i], centred(i, q, 1.0));
                }
            }
            Variant::Rc => {
                let mix = self.mix();
                for i in 0..n {
                    push(p[i], centred(i, &mix, 1.0));
                    push(q[i], centred(i, &mix, -1.0));
                }
            }
        }
        terms
    }
}

/// Exact population objective for a given critic.
pub fn objective(
    p: &DiscreteDist,
    q: &DiscreteDist,
    critic: &CriticTable,
    loss: &ConcaveLoss,
    variant: Variant,
) -> Result<f64> {
    let problem = Problem::new(p, q, *loss, variant)?;
    check_critic(&problem, critic)?;
    Ok(problem.value(critic.values()))
}

/// Gradient of [`objective`] with respect to the critic table.
pub fn objective_gradient(
    p: &DiscreteDist,
    q: &DiscreteDist,
    critic: &CriticTable,
    loss: &ConcaveLoss,
    variant: Variant,
) -> Result<Vec<f64>> {
    let problem = Problem::new(p, q, *loss, variant)?;
    check_critic(&problem, critic)?;
    let mut g = vec![0.0; problem.n()];
    problem.gradient(critic.values(), &mut g);
    Ok(g)
}

/// The objective's decomposition into weighted loss terms of linear critic functionals.
pub fn linear_terms(p: &DiscreteDist, q: &DiscreteDist, variant: Variant) -> Result<Vec<LinearTerm>> {
    Ok(Problem::new(p, q, ConcaveLoss::lsgan(), variant)?.linear_terms())
}

fn check_critic(problem: &Problem, critic: &CriticTable) -> Result<()> {
    if critic.len() != problem.n() {
        return Err(invalid(format!(
            "critic has {} values but the support has {} points",
            critic.len(),
            problem.n()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::LossKind;

    fn two_point(p: f64, q: f64) -> (DiscreteDist, DiscreteDist) {
        (
            DiscreteDist::new(vec![0.0, 1.0], vec![p, 1.0 - p]).unwrap(),
            DiscreteDist::new(vec![0.0, 1.0], vec![q, 1.0 - q]).unwrap(),
        )
    }

    #[test]
    fn constant_critic_gives_zero() {
        let (p, q) = two_point(0.3, 0.9);
        for kind in LossKind::ALL {
            for v in Variant::RELATIVISTIC {
                let val = objective(&p, &q, &CriticTable::constant(2, 1.7), &ConcaveLoss::new(kind), v).unwrap();
                assert!(val.abs() < 1e-15, "{kind} {v}: {val}");
            }
            let val = objective(&p, &q, &CriticTable::constant(2, 0.0), &ConcaveLoss::new(kind), Variant::Sy).unwrap();
            assert!(val.abs() < 1e-15);
        }
    }

    #[test]
    fn point_masses_rp() {
        let (p, q) = two_point(1.0, 0.0);
        let c = CriticTable::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(objective(&p, &q, &c, &ConcaveLoss::lsgan(), Variant::Rp).unwrap(), 2.0);
    }

    #[test]
    fn worked_two_point_rp() {
        let (p, q) = two_point(0.8, 0.2);
        let c = CriticTable::new(vec![1.2 / 1.36, 0.0]).unwrap();
        let v = objective(&p, &q, &c, &ConcaveLoss::lsgan(), Variant::Rp).unwrap();
        assert!((v - 1.44 / 1.36).abs() < 1e-12);
    }

    #[test]
    fn misaligned_inputs_are_rejected() {
        let p = DiscreteDist::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let q = DiscreteDist::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        let c = CriticTable::constant(2, 0.0);
        assert!(objective(&p, &q, &c, &ConcaveLoss::lsgan(), Variant::Rp).is_err());
        let (p, q) = two_point(0.5, 0.5);
        assert!(objective(&p, &q, &CriticTable::constant(3, 0.0), &ConcaveLoss::lsgan(), Variant::Rp).is_err());
    }

    #[test]
    fn linear_terms_reproduce_objective() {
        let p = DiscreteDist::new(vec![-1.0, 0.0, 0.5, 2.0], vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        let q = DiscreteDist::new(vec![-1.0, 0.0, 0.5, 2.0], vec![0.25, 0.0, 0.35, 0.4]).unwrap();
        let c = vec![0.3, -0.8, 1.1, 0.05];
        for kind in LossKind::ALL {
            let loss = ConcaveLoss::new(kind);
            for v in Variant::ALL {
                let structured = objective(&p, &q, &CriticTable::new(c.clone()).unwrap(), &loss, v).unwrap();
                let expanded: f64 = linear_terms(&p, &q, v)
                    .unwrap()
                    .iter()
                    .map(|t| t.weight * loss.value(t.coeffs.iter().zip(&c).map(|(a, b)| a * b).sum()))
                    .sum();
                assert!((structured - expanded).abs() < 1e-12, "{kind} {v}");
            }
        }
    }
}

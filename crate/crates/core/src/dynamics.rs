//! Full-batch critic/generator game on a fixed finite support.
//!
//! The generator is the categorical distribution `Q = softmax(theta)` over the
//! support of the target `P`; the critic is a table of scores on that support.
//! Both players take exact gradient steps. The critic ascends the population
//! objective of the chosen variant and the generator ascends the non-saturating
//! objective, which swaps the roles of real and fake scores.

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::loss::ConcaveLoss;
use crate::oracle::{solve_divergence, CriticTable, DiscreteDist, Problem, SolveOptions};
use crate::{Result, Variant};

/// Halvings tried by the backtracking critic step before giving up on the step.
const CRITIC_BACKTRACKS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub p: DiscreteDist,
    /// Generator logits on the support of `p`.
    pub theta: Vec<f64>,
    pub critic: CriticTable,
    pub loss: ConcaveLoss,
    pub variant: Variant,
    pub step: usize,
}

fn softmax(theta: &[f64]) -> Vec<f64> {
    let top = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - top).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

impl GameState {
    /// Zero critic, generator logits `theta`.
    pub fn new(p: DiscreteDist, theta: Vec<f64>, loss: ConcaveLoss, variant: Variant) -> Result<Self> {
        if theta.len() != p.len() {
            return Err(invalid(format!("{} logits for a support of {} points", theta.len(), p.len())));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(invalid("logits must be finite"));
        }
        let n = p.len();
        Ok(GameState { p, theta, critic: CriticTable::constant(n, 0.0), loss, variant, step: 0 })
    }

    /// Generator initialised to the uniform distribution.
    pub fn uniform_start(p: DiscreteDist, loss: ConcaveLoss, variant: Variant) -> Self {
        let n = p.len();
        GameState::new(p, vec![0.0; n], loss, variant).expect("uniform logits are valid")
    }

    pub fn support(&self) -> &[f64] {
        self.p.points()
    }

    pub fn q_probs(&self) -> Vec<f64> {
        softmax(&self.theta)
    }

    pub fn q(&self) -> Result<DiscreteDist> {
        DiscreteDist::new(self.p.points().to_vec(), self.q_probs())
    }

    fn problem(&self) -> Problem {
        Problem { p: self.p.probs().to_vec(), q: self.q_probs(), loss: self.loss, variant: self.variant }
    }

    /// Critic objective at the current state.
    pub fn objective(&self) -> f64 {
        self.problem().value(self.critic.values())
    }

    pub fn critic_gradient(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.p.len()];
        self.problem().gradient(self.critic.values(), &mut g);
        g
    }

    /// Non-saturating generator objective as a function of the fake probabilities.
    pub fn generator_objective_at(&self, q: &[f64]) -> f64 {
        let f = |z: f64| self.loss.value(z);
        let (p, c) = (self.p.probs(), self.critic.values());
        let mp: f64 = p.iter().zip(c).map(|(a, b)| a * b).sum();
        let mq: f64 = q.iter().zip(c).map(|(a, b)| a * b).sum();
        let mc = 0.5 * (mp + mq);
        let over = |w: &[f64], g: &dyn Fn(f64) -> f64| w.iter().zip(c).map(|(wi, ci)| wi * g(*ci)).sum::<f64>();
        match self.variant {
            Variant::Sy => over(q, &|cj| f(cj)),
            Variant::Rp => 2.0 * over(q, &|cj| over(p, &|ci| f(cj - ci))),
            Variant::Ra => over(q, &|cj| f(cj - mp)) + over(p, &|ci| f(mq - ci)),
            Variant::Ralf => 2.0 * over(q, &|cj| f(cj - mp)),
            Variant::Rc => over(q, &|cj| f(cj - mc)) + over(p, &|ci| f(mc - ci)),
        }
    }

    pub fn generator_objective(&self) -> f64 {
        self.generator_objective_at(&self.q_probs())
    }

    /// Gradient of the generator objective with respect to the logits.
    pub fn generator_gradient(&self) -> Vec<f64> {
        let f = |z: f64| self.loss.value(z);
        let df = |z: f64| self.loss.derivative(z);
        let q = self.q_probs();
        let (p, c) = (self.p.probs(), self.critic.values());
        let mp: f64 = p.iter().zip(c).map(|(a, b)| a * b).sum();
        let mq: f64 = q.iter().zip(c).map(|(a, b)| a * b).sum();
        let mc = 0.5 * (mp + mq);
        let over = |w: &[f64], g: &dyn Fn(f64) -> f64| w.iter().zip(c).map(|(wi, ci)| wi * g(*ci)).sum::<f64>();
        // d objective / d q_j, treating q as a free vector
        let dq: Vec<f64> = match self.variant {
            Variant::Sy => c.iter().map(|&cj| f(cj)).collect(),
            Variant::Rp => c.iter().map(|&cj| 2.0 * over(p, &|ci| f(cj - ci))).collect(),
            Variant::Ra => {
                let slope = over(p, &|ci| df(mq - ci));
                c.iter().map(|&cj| f(cj - mp) + cj * slope).collect()
            }
            Variant::Ralf => c.iter().map(|&cj| 2.0 * f(cj - mp)).collect(),
            Variant::Rc => {
                let slope = 0.5 * (over(p, &|ci| df(mc - ci)) - over(&q, &|cl| df(cl - mc)));
                c.iter().map(|&cj| f(cj - mc) + cj * slope).collect()
            }
        };
        let avg: f64 = q.iter().zip(&dq).map(|(a, b)| a * b).sum();
        q.iter().zip(&dq).map(|(qk, gk)| qk * (gk - avg)).collect()
    }

    fn is_finite(&self) -> bool {
        self.theta.iter().chain(self.critic.values()).all(|v| v.is_finite())
    }
}

/// One exact-gradient ascent step on the critic objective. The step starts at
/// `lr` and is halved until the objective does not decrease; if no halving
/// works the critic is left unchanged.
pub fn critic_step(state: &GameState, lr: f64) -> GameState {
    let problem = state.problem();
    let c = state.critic.values();
    let mut g = vec![0.0; c.len()];
    problem.gradient(c, &mut g);
    let before = problem.value(c);
    let mut next = state.clone();
    let mut t = lr;
    for _ in 0..CRITIC_BACKTRACKS {
        let trial: Vec<f64> = c.iter().zip(&g).map(|(ci, gi)| ci + t * gi).collect();
        let after = problem.value(&trial);
        if after >= before && trial.iter().all(|v| v.is_finite()) {
            next.critic = CriticTable::from_unchecked(trial);
            break;
        }
        t *= 0.5;
    }
    next.step += 1;
    next
}

/// One exact-gradient ascent step on the generator logits, critic fixed.
pub fn generator_step(state: &GameState, lr: f64) -> GameState {
    let g = state.generator_gradient();
    let mut next = state.clone();
    for (t, gi) in next.theta.iter_mut().zip(&g) {
        *t += lr * gi;
    }
    next.step += 1;
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Generator steps.
    pub iters: usize,
    pub critic_steps: usize,
    pub lr_critic: f64,
    pub lr_generator: f64,
    pub log_every: usize,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.iters == 0 || self.critic_steps == 0 || self.log_every == 0 {
            return Err(invalid("iters, critic_steps and log_every must be positive"));
        }
        if !(self.lr_critic > 0.0 && self.lr_generator > 0.0) || !self.lr_critic.is_finite() || !self.lr_generator.is_finite() {
            return Err(invalid("learning rates must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    /// Generator steps taken.
    pub step: usize,
    pub divergence: f64,
    /// Critic objective at the logged state.
    pub objective: f64,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub final_state: GameState,
    /// Set when the run stopped on a non-finite state.
    pub aborted: Option<String>,
}

fn log_row(state: &GameState, step: usize, opts: &SolveOptions) -> Result<TrajectoryRow> {
    let q = state.q()?;
    let divergence = solve_divergence(&state.p, &q, &state.loss, state.variant, opts)?.value;
    Ok(TrajectoryRow { step, divergence, objective: state.objective(), tv: state.p.total_variation(&q) })
}

/// Alternates `critic_steps` critic updates with one generator update for
/// `iters` rounds, logging at round 0 and every `log_every` rounds.
pub fn run(initial: &GameState, cfg: &RunConfig, opts: &SolveOptions) -> Result<Trajectory> {
    cfg.validate()?;
    let mut state = initial.clone();
    let mut rows = vec![log_row(&state, 0, opts)?];
    for it in 1..=cfg.iters {
        for _ in 0..cfg.critic_steps {
            state = critic_step(&state, cfg.lr_critic);
        }
        state = generator_step(&state, cfg.lr_generator);
        if !state.is_finite() {
            return Ok(Trajectory {
                rows,
                final_state: state,
                aborted: Some(format!("non-finite state after generator step {it}")),
            });
        }
        if it % cfg.log_every == 0 {
            rows.push(log_row(&state, it, opts)?);
        }
    }
    Ok(Trajectory { rows, final_state: state, aborted: None })
}

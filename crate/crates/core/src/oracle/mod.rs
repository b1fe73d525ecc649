//! Exact divergences between finite distributions.
//!
//! A divergence is the supremum over critic tables of one of the population
//! objectives in [`objective`]. All objectives are concave in the critic, so a
//! monotone ascent reaches the global supremum; hinge objectives are piecewise
//! linear and are instead solved exactly as a linear program.

pub mod ascent;
mod checks;
mod dist;
mod lp;
mod objective;
mod witness;

pub use checks::{
    check_axioms, check_ordering, weakness_sequence, AxiomReport, OrderingReport, SequenceKind, WeaknessRow,
};
pub use dist::{CriticTable, DiscreteDist, PROB_SUM_TOL};
pub use objective::{linear_terms, objective, objective_gradient, LinearTerm};
pub use witness::{witness_critic, Witness};

pub(crate) use objective::Problem;

use serde::{Deserialize, Serialize};

use crate::error::precondition;
use crate::loss::{ConcaveLoss, LossKind};
use crate::{Result, Variant};
use ascent::{AscentOptions, StopReason};

/// Largest union support the oracle accepts.
pub const MAX_SUPPORT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Gradient-norm tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Convergence is also declared once the value reaches `2M - eps_sup`.
    pub eps_sup: f64,
    pub shrink: f64,
    pub armijo: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-6, max_iters: 100_000, eps_sup: 1e-4, shrink: 0.5, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    /// Maximising critic on the union support.
    pub critic: CriticTable,
    /// Ascent iterations, or simplex pivots for hinge objectives.
    pub iterations: usize,
    /// Final gradient norm; for hinge objectives the primal/dual gap.
    pub grad_norm: f64,
    pub converged: bool,
    /// The value reached `2M - eps_sup` and was reported as `2M`.
    pub saturated: bool,
}

/// Supremum of the objective over critic tables.
///
/// `p` and `q` may have different supports; they are aligned on the union.
/// Shift-invariant variants are gauge-fixed with `C[0] = 0`.
pub fn solve_divergence(
    p: &DiscreteDist,
    q: &DiscreteDist,
    loss: &ConcaveLoss,
    variant: Variant,
    opts: &SolveOptions,
) -> Result<OracleResult> {
    let (p, q) = p.align(q);
    let n = p.len();
    if n > MAX_SUPPORT {
        return Err(precondition(format!("union support has {n} points, at most {MAX_SUPPORT} supported")));
    }
    let problem = Problem::new(&p, &q, *loss, variant)?;
    match loss.kind {
        LossKind::Hinge => solve_hinge(&problem),
        LossKind::S | LossKind::Ls => solve_smooth(&problem, opts, None),
    }
}

/// Like [`solve_divergence`] for smooth losses, also recording the objective after
/// every accepted ascent step.
pub fn solve_divergence_traced(
    p: &DiscreteDist,
    q: &DiscreteDist,
    loss: &ConcaveLoss,
    variant: Variant,
    opts: &SolveOptions,
) -> Result<(OracleResult, Vec<f64>)> {
    let (p, q) = p.align(q);
    let problem = Problem::new(&p, &q, *loss, variant)?;
    let mut trace = Vec::new();
    let result = solve_smooth(&problem, opts, Some(&mut trace))?;
    Ok((result, trace))
}

fn solve_smooth(problem: &Problem, opts: &SolveOptions, trace: Option<&mut Vec<f64>>) -> Result<OracleResult> {
    let n = problem.n();
    let frozen: &[usize] = if problem.variant.is_shift_invariant() { &[0] } else { &[] };
    let top = problem.loss.max_divergence();
    let ascent_opts = AscentOptions {
        tol: opts.tol,
        max_iters: opts.max_iters,
        target: Some(top - opts.eps_sup),
        shrink: opts.shrink,
        armijo: opts.armijo,
    };
    let r = ascent::maximize(
        |c| problem.value(c),
        |c, g| problem.gradient(c, g),
        vec![0.0; n],
        frozen,
        &ascent_opts,
        trace,
    );
    let saturated = r.stop == StopReason::TargetReached;
    let converged = matches!(r.stop, StopReason::TargetReached | StopReason::GradientTolerance);
    Ok(OracleResult {
        value: if saturated { top } else { r.value },
        critic: CriticTable::from_unchecked(r.x),
        iterations: r.iterations,
        grad_norm: r.grad_norm,
        converged,
        saturated,
    })
}

fn solve_hinge(problem: &Problem) -> Result<OracleResult> {
    let n = problem.n();
    let skip = usize::from(problem.variant.is_shift_invariant());
    let terms: Vec<(f64, Vec<f64>)> =
        problem.linear_terms().into_iter().map(|t| (t.weight, t.coeffs[skip..].to_vec())).collect();
    let sol = lp::solve(&terms, n - skip, 1_000_000)
        .ok_or_else(|| precondition("hinge linear program exceeded its pivot budget"))?;
    let mut critic = vec![0.0; skip];
    critic.extend_from_slice(&sol.critic);
    let value = problem.value(&critic);
    let gap = (value - sol.dual_value).abs();
    Ok(OracleResult {
        value,
        critic: CriticTable::from_unchecked(critic),
        iterations: sol.pivots,
        grad_norm: gap,
        converged: gap <= 1e-9,
        saturated: false,
    })
}

/// Wasserstein-1 distance between distributions on the real line,
/// `integral |F_P(t) - F_Q(t)| dt`, computed exactly on the union grid.
pub fn wasserstein_1d(p: &DiscreteDist, q: &DiscreteDist) -> f64 {
    let (p, q) = p.align(q);
    let xs = p.points();
    let mut cdf_gap = 0.0;
    let mut total = 0.0;
    for i in 0..xs.len() - 1 {
        cdf_gap += p.probs()[i] - q.probs()[i];
        total += cdf_gap.abs() * (xs[i + 1] - xs[i]);
    }
    total
}

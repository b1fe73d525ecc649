//! Monotone gradient ascent with Armijo backtracking.
//!
//! Trial steps start from a Barzilai-Borwein estimate so that the ascent can
//! chase suprema that sit at infinity (the log-sigmoid loss on separable
//! distributions) without creeping. The Armijo test keeps every accepted step an
//! improvement.

/// Tuning for [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Stop once the value reaches this level (sup attained at infinity).
    pub target: Option<f64>,
    pub shrink: f64,
    pub armijo: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    TargetReached,
    LineSearchStalled,
    MaxIterations,
}

const MIN_STEP: f64 = 1e-20;
const MAX_STEP: f64 = 1e12;

/// Maximises `value` starting from `x0`. Coordinates listed in `frozen` are held
/// fixed (their gradient entries are zeroed). `trace`, when given, receives the
/// value after every accepted step.
pub fn maximize<F, G>(
    value: F,
    gradient: G,
    x0: Vec<f64>,
    frozen: &[usize],
    opts: &AscentOptions,
    mut trace: Option<&mut Vec<f64>>,
) -> AscentResult
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    let n = x0.len();
    let project = |g: &mut [f64]| {
        for &i in frozen {
            g[i] = 0.0;
        }
    };
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();

    let mut x = x0;
    let mut fx = value(&x);
    let mut g = vec![0.0; n];
    gradient(&x, &mut g);
    project(&mut g);
    let mut gnorm = norm(&g);
    let mut step = 1.0;
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];

    if let Some(t) = trace.as_deref_mut() {
        t.push(fx);
    }

    for iter in 0..opts.max_iters {
        if opts.target.is_some_and(|t| fx >= t) {
            return AscentResult { x, value: fx, grad_norm: gnorm, iterations: iter, stop: StopReason::TargetReached };
        }
        if gnorm <= opts.tol {
            return AscentResult { x, value: fx, grad_norm: gnorm, iterations: iter, stop: StopReason::GradientTolerance };
        }

        let g2 = gnorm * gnorm;
        let mut t = step;
        let f_trial = loop {
            for i in 0..n {
                trial[i] = x[i] + t * g[i];
            }
            let f_new = value(&trial);
            if f_new >= fx + opts.armijo * t * g2 {
                break Some(f_new);
            }
            t *= opts.shrink;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some(f_new) = f_trial else {
            return AscentResult { x, value: fx, grad_norm: gnorm, iterations: iter, stop: StopReason::LineSearchStalled };
        };

        gradient(&trial, &mut g_trial);
        project(&mut g_trial);

        // Barzilai-Borwein: s.s / (-s.y), valid because the objective is concave
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = trial[i] - x[i];
            ss += s * s;
            sy += s * (g_trial[i] - g[i]);
        }
        step = if sy < 0.0 { ss / -sy } else { 2.0 * t };
        step = step.clamp(MIN_STEP * 1e3, MAX_STEP);

        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut g_trial);
        fx = f_new;
        gnorm = norm(&g);
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(fx);
        }
    }
    let stop = if opts.target.is_some_and(|t| fx >= t) {
        StopReason::TargetReached
    } else if gnorm <= opts.tol {
        StopReason::GradientTolerance
    } else {
        StopReason::MaxIterations
    };
    AscentResult { x, value: fx, grad_norm: gnorm, iterations: opts.max_iters, stop }
}

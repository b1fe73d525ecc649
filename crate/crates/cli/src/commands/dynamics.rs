use std::path::PathBuf;

use reldiv::dynamics::{run, GameState, RunConfig};
use reldiv::oracle::DiscreteDist;
use reldiv::{ConcaveLoss, LossKind, Variant};

use super::solve_options;
use crate::config::{layered, parse_tag, require, DistArg};
use crate::output::{num, Table};
use crate::{CliError, Outcome};

layered! {
    pub struct DynamicsArgs {
        /// Target distribution; the generator lives on its support.
        p: DistArg,
        loss: String,
        variant: String,
        /// uniform (default) or target: the generator's starting distribution.
        start: String,
        /// Explicit starting logits; overrides `start`.
        #[arg(value_delimiter = ',', allow_hyphen_values = true)]
        theta: Vec<f64>,
        /// Generator steps.
        iters: usize,
        /// Critic steps per generator step (default 5).
        critic_steps: usize,
        /// Default 0.05.
        lr_critic: f64,
        /// Default 0.05.
        lr_generator: f64,
        /// Log every this many generator steps (default 100).
        log_every: usize,
        tol: f64,
        max_iters: usize,
        eps_sup: f64,
        out: PathBuf,
    }
}

pub fn dynamics(args: DynamicsArgs) -> Result<Outcome, CliError> {
    let a = args.layered("dynamics")?;
    let p: DiscreteDist = require(a.p.as_ref(), "p")?.load("p")?;
    let loss = ConcaveLoss::new(parse_tag::<LossKind>(&require(a.loss, "loss")?, "loss")?);
    let variant: Variant = parse_tag(&require(a.variant, "variant")?, "variant")?;
    let theta = match (a.theta, a.start.as_deref()) {
        (Some(theta), _) => theta,
        (None, None | Some("uniform")) => vec![0.0; p.len()],
        (None, Some("target")) => p.probs().iter().map(|x| x.ln()).collect(),
        (None, Some(other)) => {
            return Err(CliError::Usage(format!("field `start`: unknown start `{other}` (expected uniform or target)")))
        }
    };
    let state = GameState::new(p, theta, loss, variant)?;
    let cfg = RunConfig {
        iters: require(a.iters, "iters")?,
        critic_steps: a.critic_steps.unwrap_or(5),
        lr_critic: a.lr_critic.unwrap_or(0.05),
        lr_generator: a.lr_generator.unwrap_or(0.05),
        log_every: a.log_every.unwrap_or(100),
    };
    let opts = solve_options(a.tol, a.max_iters, a.eps_sup)?;
    let traj = run(&state, &cfg, &opts)?;

    let mut table = Table::new(&["step", "divergence", "objective", "tv"]);
    for r in &traj.rows {
        table.push(vec![r.step.to_string(), num(r.divergence), num(r.objective), num(r.tv)]);
    }
    table.write(a.out.as_deref())?;
    let last = traj.rows.last().expect("trajectory starts with a row");
    let failures = usize::from(traj.aborted.is_some());
    if let Some(why) = &traj.aborted {
        eprintln!("run aborted: {why}");
    }
    Ok(Outcome {
        failures,
        summary: format!(
            "dynamics: {} rows, divergence {} -> {}",
            traj.rows.len(),
            traj.rows[0].divergence,
            last.divergence
        ),
    })
}

pub mod bias;
pub mod dynamics;
pub mod oracle;

use reldiv::instances::random_instances;
use reldiv::oracle::{DiscreteDist, SolveOptions};
use reldiv::{LossKind, Variant};

use crate::config::{parse_tag, require, DistArg};
use crate::CliError;

/// `all` or a single loss tag.
fn losses(spec: Option<&str>, default_all: bool) -> Result<Vec<LossKind>, CliError> {
    match spec {
        Some("all") => Ok(LossKind::ALL.to_vec()),
        Some(tag) => Ok(vec![parse_tag(tag, "loss")?]),
        None if default_all => Ok(LossKind::ALL.to_vec()),
        None => Err(CliError::Usage("missing required field `loss`".into())),
    }
}

/// `all`, `relativistic`, or a single variant tag.
fn variants(spec: Option<&str>, default: &[Variant]) -> Result<Vec<Variant>, CliError> {
    match spec {
        Some("all") => Ok(Variant::ALL.to_vec()),
        Some("relativistic") => Ok(Variant::RELATIVISTIC.to_vec()),
        Some(tag) => Ok(vec![parse_tag(tag, "variant")?]),
        None => Ok(default.to_vec()),
    }
}

fn solve_options(tol: Option<f64>, max_iters: Option<usize>, eps_sup: Option<f64>) -> Result<SolveOptions, CliError> {
    let d = SolveOptions::default();
    let opts = SolveOptions {
        tol: tol.unwrap_or(d.tol),
        max_iters: max_iters.unwrap_or(d.max_iters),
        eps_sup: eps_sup.unwrap_or(d.eps_sup),
        ..d
    };
    if !(opts.tol > 0.0 && opts.eps_sup > 0.0) || opts.max_iters == 0 {
        return Err(CliError::Usage("fields `tol`, `eps_sup` and `max_iters` must be positive".into()));
    }
    Ok(opts)
}

struct Labelled {
    label: String,
    p: DiscreteDist,
    q: DiscreteDist,
}

/// Either `instances = "random"` with `count` and `seed`, or an explicit `p`/`q` pair.
fn instance_set(
    instances: Option<&str>,
    count: Option<usize>,
    seed: Option<u64>,
    p: Option<&DistArg>,
    q: Option<&DistArg>,
) -> Result<Vec<Labelled>, CliError> {
    match instances {
        Some("random") => {
            let seed = require(seed, "seed")?;
            let count = require(count, "count")?;
            if count == 0 {
                return Err(CliError::Usage("field `count` must be positive".into()));
            }
            Ok(random_instances(seed, count)
                .into_iter()
                .map(|i| Labelled { label: i.index.to_string(), p: i.p, q: i.q })
                .collect())
        }
        Some(other) => Err(CliError::Usage(format!("field `instances`: unknown source `{other}` (expected `random`)"))),
        None => {
            let p: DiscreteDist = require(p, "p")?.load("p")?;
            let q: DiscreteDist = require(q, "q")?.load("q")?;
            Ok(vec![Labelled { label: "0".into(), p, q }])
        }
    }
}

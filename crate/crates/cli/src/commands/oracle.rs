use std::path::PathBuf;

use reldiv::estimators::{estimate as run_estimator, EstimatorKind, ScoreBatch};
use reldiv::oracle::{check_axioms, check_ordering, solve_divergence, weakness_sequence, SequenceKind};
use reldiv::{ConcaveLoss, LossKind, Variant};

use super::{instance_set, losses, solve_options, variants};
use crate::config::{layered, parse_tag, require, DistArg};
use crate::output::{num, Table};
use crate::{CliError, Outcome};

layered! {
    pub struct OracleArgs {
        /// Target distribution: JSON `{"points": [...], "probs": [...]}`.
        p: DistArg,
        /// Model distribution, same format as `p`.
        q: DistArg,
        /// `random` to draw seeded instances instead of reading `p` and `q`.
        instances: String,
        count: usize,
        seed: u64,
        /// sgan, lsgan, hinge or all.
        loss: String,
        /// sy, rp, ra, ralf, rc, relativistic or all (default all).
        variant: String,
        tol: f64,
        max_iters: usize,
        eps_sup: f64,
        /// CSV output path (stdout when omitted).
        out: PathBuf,
    }
}

pub fn oracle(args: OracleArgs) -> Result<Outcome, CliError> {
    let a = args.layered("oracle")?;
    let set = instance_set(a.instances.as_deref(), a.count, a.seed, a.p.as_ref(), a.q.as_ref())?;
    let losses = losses(a.loss.as_deref(), false)?;
    let variants = variants(a.variant.as_deref(), &Variant::ALL)?;
    let opts = solve_options(a.tol, a.max_iters, a.eps_sup)?;

    let mut table = Table::new(&["instance", "loss", "variant", "value", "converged", "iters"]);
    let mut failures = 0;
    for inst in &set {
        for &kind in &losses {
            for &v in &variants {
                let r = solve_divergence(&inst.p, &inst.q, &ConcaveLoss::new(kind), v, &opts)?;
                failures += usize::from(!r.converged);
                table.push(vec![
                    inst.label.clone(),
                    kind.to_string(),
                    v.to_string(),
                    num(r.value),
                    r.converged.to_string(),
                    r.iterations.to_string(),
                ]);
            }
        }
    }
    table.write(a.out.as_deref())?;
    Ok(Outcome { failures, summary: format!("oracle: {} divergences, {failures} unconverged", table.len()) })
}

layered! {
    pub struct EstimateArgs {
        /// Critic scores of the real batch, comma separated.
        #[arg(value_delimiter = ',', allow_hyphen_values = true)]
        real: Vec<f64>,
        /// Critic scores of the fake batch, comma separated.
        #[arg(value_delimiter = ',', allow_hyphen_values = true)]
        fake: Vec<f64>,
        loss: String,
        /// Estimator tag or all (default all).
        estimator: String,
        out: PathBuf,
    }
}

pub fn estimate(args: EstimateArgs) -> Result<Outcome, CliError> {
    let a = args.layered("estimate")?;
    let batch = ScoreBatch::new(require(a.real, "real")?, require(a.fake, "fake")?)?;
    let loss = ConcaveLoss::new(parse_tag::<LossKind>(&require(a.loss, "loss")?, "loss")?);
    let kinds: Vec<EstimatorKind> = match a.estimator.as_deref() {
        None | Some("all") => EstimatorKind::ALL
            .into_iter()
            .filter(|k| (!k.is_ls_unbiased() || loss.kind == LossKind::Ls) && batch.k() >= k.min_k())
            .collect(),
        Some(tag) => vec![parse_tag(tag, "estimator")?],
    };
    let mut table = Table::new(&["estimator", "loss", "k", "value"]);
    for kind in kinds {
        let r = run_estimator(&batch, &loss, kind)?;
        table.push(vec![kind.to_string(), loss.kind.to_string(), r.k.to_string(), num(r.value)]);
    }
    table.write(a.out.as_deref())?;
    Ok(Outcome { failures: 0, summary: format!("estimate: {} estimators at k = {}", table.len(), batch.k()) })
}

layered! {
    pub struct AxiomsArgs {
        p: DistArg,
        q: DistArg,
        instances: String,
        count: usize,
        seed: u64,
        /// Loss tag or all (default all).
        loss: String,
        /// Variant tag, relativistic or all (default relativistic).
        variant: String,
        /// Slack for the zero and non-negativity checks (default 1e-6).
        check_tol: f64,
        tol: f64,
        max_iters: usize,
        eps_sup: f64,
        out: PathBuf,
    }
}

pub fn axioms(args: AxiomsArgs) -> Result<Outcome, CliError> {
    let a = args.layered("axioms")?;
    let set = instance_set(a.instances.as_deref(), a.count, a.seed, a.p.as_ref(), a.q.as_ref())?;
    let losses = losses(a.loss.as_deref(), true)?;
    let variants = variants(a.variant.as_deref(), &Variant::RELATIVISTIC)?;
    let opts = solve_options(a.tol, a.max_iters, a.eps_sup)?;
    let check_tol = a.check_tol.unwrap_or(1e-6);

    let mut table = Table::new(&[
        "instance",
        "loss",
        "variant",
        "tv",
        "value",
        "self_value",
        "witness_value",
        "converged",
        "iters",
        "pass",
    ]);
    let mut failures = 0;
    for inst in &set {
        for &kind in &losses {
            let loss = ConcaveLoss::new(kind);
            for &v in &variants {
                let r = check_axioms(&inst.p, &inst.q, &loss, v, check_tol, &opts)?;
                let own = check_axioms(&inst.p, &inst.p, &loss, v, check_tol, &opts)?;
                let pass = r.passed() && own.passed();
                if !pass {
                    failures += 1;
                    for msg in r.failures.iter().chain(&own.failures) {
                        eprintln!("instance {} {kind} {v}: {msg}", inst.label);
                    }
                }
                table.push(vec![
                    inst.label.clone(),
                    kind.to_string(),
                    v.to_string(),
                    num(r.tv),
                    num(r.value),
                    num(own.value),
                    r.witness.as_ref().map(|w| num(w.value)).unwrap_or_default(),
                    (r.converged && own.converged).to_string(),
                    r.iterations.to_string(),
                    pass.to_string(),
                ]);
            }
        }
    }
    table.write(a.out.as_deref())?;
    Ok(Outcome { failures, summary: format!("axioms: {} checks, {failures} failed", table.len()) })
}

layered! {
    pub struct OrderingArgs {
        p: DistArg,
        q: DistArg,
        instances: String,
        count: usize,
        seed: u64,
        /// Loss tag or all (default all).
        loss: String,
        /// Allowed slack in each inequality (default 1e-6).
        check_tol: f64,
        tol: f64,
        max_iters: usize,
        eps_sup: f64,
        out: PathBuf,
    }
}

pub fn ordering(args: OrderingArgs) -> Result<Outcome, CliError> {
    let a = args.layered("ordering")?;
    let set = instance_set(a.instances.as_deref(), a.count, a.seed, a.p.as_ref(), a.q.as_ref())?;
    let losses = losses(a.loss.as_deref(), true)?;
    let opts = solve_options(a.tol, a.max_iters, a.eps_sup)?;
    let check_tol = a.check_tol.unwrap_or(1e-6);

    let mut table = Table::new(&["instance", "loss", "sy", "rp", "ralf", "ra", "pass"]);
    let mut failures = 0;
    for inst in &set {
        for &kind in &losses {
            let r = check_ordering(&inst.p, &inst.q, &ConcaveLoss::new(kind), check_tol, &opts)?;
            if !r.passed() {
                failures += 1;
                for msg in &r.violations {
                    eprintln!("instance {} {kind}: {msg}", inst.label);
                }
            }
            table.push(vec![
                inst.label.clone(),
                kind.to_string(),
                num(r.sy),
                num(r.rp),
                num(r.ralf),
                num(r.ra),
                r.passed().to_string(),
            ]);
        }
    }
    table.write(a.out.as_deref())?;
    Ok(Outcome { failures, summary: format!("ordering: {} checks, {failures} failed", table.len()) })
}

layered! {
    pub struct WeaknessArgs {
        loss: String,
        /// Number of sequence elements, n = 1..=steps.
        steps: usize,
        /// Allowed distance of each divergence from 2M (default 1e-3).
        check_tol: f64,
        tol: f64,
        max_iters: usize,
        eps_sup: f64,
        out: PathBuf,
    }
}

pub fn weakness(args: WeaknessArgs) -> Result<Outcome, CliError> {
    let a = args.layered("weakness")?;
    let loss = ConcaveLoss::new(parse_tag::<LossKind>(&require(a.loss, "loss")?, "loss")?);
    let steps = require(a.steps, "steps")?;
    let opts = solve_options(a.tol, a.max_iters, a.eps_sup)?;
    let check_tol = a.check_tol.unwrap_or(1e-3);
    let rows = weakness_sequence(SequenceKind::ShrinkingOffset, steps, &loss, &opts)?;

    let top = loss.max_divergence();
    let mut table = Table::new(&["n", "w1", "sy", "rp", "ra"]);
    let mut failures = 0;
    for r in &rows {
        if [r.sy, r.rp, r.ra].iter().any(|d| (d - top).abs() > check_tol) {
            failures += 1;
            eprintln!("n = {}: divergences {} {} {} are not within {check_tol} of {top}", r.n, r.sy, r.rp, r.ra);
        }
        table.push(vec![r.n.to_string(), num(r.w1), num(r.sy), num(r.rp), num(r.ra)]);
    }
    table.write(a.out.as_deref())?;
    Ok(Outcome { failures, summary: format!("weakness: {} rows, {failures} off the 2M plateau", table.len()) })
}

use std::path::PathBuf;

use reldiv::bias_lab::{
    exact_sweep, mc_sweep, mvue_compare as compare, verify_bias_formula, BiasTarget, ReferenceMode, ScoreDist,
    SweepRow,
};
use reldiv::estimators::EstimatorKind;
use reldiv::{ConcaveLoss, LossKind};

use crate::config::{layered, parse_tag, require, DistArg};
use crate::output::{num, opt, Table};
use crate::{CliError, Outcome};

const SWEEP_HEADER: &[&str] = &["k", "estimator", "loss", "mean", "variance", "bias", "relative_bias", "replicates"];

/// `real`/`fake` score distributions, or the `normal` preset: 401-point
/// discretised unit normals on `[-4, 4]` centred at +0.5 (real) and -0.5 (fake).
fn score_pair(
    preset: Option<&str>,
    real: Option<&DistArg>,
    fake: Option<&DistArg>,
) -> Result<(ScoreDist, ScoreDist), CliError> {
    match preset {
        Some("normal") => Ok((
            ScoreDist::discretized_normal(0.5, 1.0, -4.0, 4.0, 401)?,
            ScoreDist::discretized_normal(-0.5, 1.0, -4.0, 4.0, 401)?,
        )),
        Some(other) => Err(CliError::Usage(format!("field `preset`: unknown preset `{other}` (expected `normal`)"))),
        None => Ok((require(real, "real")?.load("real")?, require(fake, "fake")?.load("fake")?)),
    }
}

fn ks_field(ks: Option<Vec<usize>>) -> Result<Vec<usize>, CliError> {
    let ks = require(ks, "ks")?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(CliError::Usage("field `ks` must list positive batch sizes".into()));
    }
    Ok(ks)
}

fn sweep_row(r: &SweepRow) -> Vec<String> {
    vec![
        r.k.to_string(),
        r.estimator.to_string(),
        r.loss.to_string(),
        num(r.mean),
        num(r.variance),
        num(r.bias),
        opt(r.relative_bias),
        r.replicates.to_string(),
    ]
}

layered! {
    pub struct BiasSweepArgs {
        /// Real score distribution: JSON `{"values": [...], "probs": [...]}`.
        real: DistArg,
        fake: DistArg,
        /// `normal` for the built-in discretised normal pair.
        preset: String,
        /// Batch sizes, comma separated.
        #[arg(value_delimiter = ',')]
        ks: Vec<usize>,
        estimator: String,
        loss: String,
        /// Monte Carlo replicates per k (default 10000).
        replicates: usize,
        seed: u64,
        /// population (default) or resampled.
        reference: String,
        /// Reference batch size multiple in resampled mode (default 10).
        resample_factor: usize,
        /// Enumerate all batches instead of sampling.
        #[arg(num_args = 0..=1, default_missing_value = "true")]
        exact: bool,
        out: PathBuf,
    }
}

pub fn bias_sweep(args: BiasSweepArgs) -> Result<Outcome, CliError> {
    let a = args.layered("bias-sweep")?;
    let (real, fake) = score_pair(a.preset.as_deref(), a.real.as_ref(), a.fake.as_ref())?;
    let ks = ks_field(a.ks)?;
    let kind: EstimatorKind = parse_tag(&require(a.estimator, "estimator")?, "estimator")?;
    let loss = ConcaveLoss::new(parse_tag::<LossKind>(&require(a.loss, "loss")?, "loss")?);

    let rows = if a.exact.unwrap_or(false) {
        exact_sweep(&real, &fake, &ks, kind, &loss)?
    } else {
        let seed = require(a.seed, "seed")?;
        let mode = match a.reference.as_deref() {
            None | Some("population") => ReferenceMode::Population,
            Some("resampled") => ReferenceMode::Resampled { factor: a.resample_factor.unwrap_or(10) },
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "field `reference`: unknown mode `{other}` (expected population or resampled)"
                )))
            }
        };
        mc_sweep(&real, &fake, &ks, kind, &loss, a.replicates.unwrap_or(10_000), seed, mode)?
    };
    let mut table = Table::new(SWEEP_HEADER);
    for r in &rows {
        table.push(sweep_row(r));
    }
    table.write(a.out.as_deref())?;
    Ok(Outcome { failures: 0, summary: format!("bias-sweep: {} rows for {kind} with {}", rows.len(), loss.kind) })
}

layered! {
    pub struct MvueCompareArgs {
        real: DistArg,
        fake: DistArg,
        preset: String,
        #[arg(value_delimiter = ',')]
        ks: Vec<usize>,
        loss: String,
        replicates: usize,
        seed: u64,
        out: PathBuf,
    }
}

pub fn mvue_compare(args: MvueCompareArgs) -> Result<Outcome, CliError> {
    let a = args.layered("mvue-compare")?;
    let (real, fake) = score_pair(a.preset.as_deref(), a.real.as_ref(), a.fake.as_ref())?;
    let ks = ks_field(a.ks)?;
    let loss = ConcaveLoss::new(parse_tag::<LossKind>(&require(a.loss, "loss")?, "loss")?);
    let seed = require(a.seed, "seed")?;
    let cmp = compare(&real, &fake, &ks, &loss, a.replicates.unwrap_or(10_000), seed)?;

    let mut table = Table::new(SWEEP_HEADER);
    for (naive, mvue) in &cmp.pairs {
        table.push(sweep_row(naive));
        table.push(sweep_row(mvue));
    }
    table.write(a.out.as_deref())?;
    // wall-clock numbers are not reproducible, so they never reach the CSV
    for t in &cmp.timings {
        eprintln!("k = {}: {:.0} ns paired, {:.0} ns all-pairs per evaluation", t.k, t.naive_ns, t.mvue_ns);
    }
    Ok(Outcome { failures: 0, summary: format!("mvue-compare: {} batch sizes", cmp.pairs.len()) })
}

layered! {
    pub struct VerifyBiasArgs {
        real: DistArg,
        fake: DistArg,
        /// Batch sizes, comma separated.
        #[arg(value_delimiter = ',')]
        ks: Vec<usize>,
        /// ra_term1, ra_term2, ralf, rc or all (default all).
        variant: String,
        out: PathBuf,
    }
}

pub fn verify_bias(args: VerifyBiasArgs) -> Result<Outcome, CliError> {
    let a = args.layered("verify-bias")?;
    let real: ScoreDist = require(a.real.as_ref(), "real")?.load("real")?;
    let fake: ScoreDist = require(a.fake.as_ref(), "fake")?.load("fake")?;
    let ks = ks_field(a.ks)?;
    let targets = match a.variant.as_deref() {
        None | Some("all") => BiasTarget::ALL.to_vec(),
        Some(tag) => vec![parse_tag(tag, "variant")?],
    };
    let mut table = Table::new(&["variant", "k", "measured_bias", "candidate", "formula_value", "matches"]);
    for &target in &targets {
        for &k in &ks {
            let report = verify_bias_formula(&real, &fake, k, target)?;
            let hits: Vec<&str> = report.matching().iter().map(|c| c.formula()).collect();
            eprintln!("{target} k = {k}: bias {} matches [{}]", report.measured_bias, hits.join(", "));
            for c in &report.checks {
                table.push(vec![
                    target.to_string(),
                    k.to_string(),
                    num(report.measured_bias),
                    c.candidate.formula().to_string(),
                    num(c.value),
                    c.matches.to_string(),
                ]);
            }
        }
    }
    table.write(a.out.as_deref())?;
    Ok(Outcome { failures: 0, summary: format!("verify-bias: {} candidate checks", table.len()) })
}

//! Mini-batch estimators for a fixed critic.
//!
//! Estimators consume critic scores, never raw data: `real_scores[i] = C(x_i)` and
//! `fake_scores[j] = C(y_j)`. The relativistic-average and centred estimators plug
//! in batch means, which makes them biased for any non-linear `f`; with the
//! least-squares loss the bias is an explicit multiple of the score variances and
//! [`ls_unbiased`] removes it.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, precondition};
use crate::loss::{ConcaveLoss, LossKind};
use crate::{Result, Variant};

/// Critic scores of `k` real and `k` fake samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBatch {
    real_scores: Vec<f64>,
    fake_scores: Vec<f64>,
}

impl ScoreBatch {
    pub fn new(real_scores: Vec<f64>, fake_scores: Vec<f64>) -> Result<Self> {
        if real_scores.is_empty() || fake_scores.is_empty() {
            return Err(invalid("score batch must be non-empty"));
        }
        if real_scores.len() != fake_scores.len() {
            return Err(invalid(format!(
                "real and fake batches differ in size ({} vs {})",
                real_scores.len(),
                fake_scores.len()
            )));
        }
        if real_scores.iter().chain(&fake_scores).any(|s| !s.is_finite()) {
            return Err(invalid("scores must be finite"));
        }
        Ok(ScoreBatch { real_scores, fake_scores })
    }

    pub fn k(&self) -> usize {
        self.real_scores.len()
    }

    pub fn real(&self) -> &[f64] {
        &self.real_scores
    }

    pub fn fake(&self) -> &[f64] {
        &self.fake_scores
    }
}

/// Estimator tags used in configs and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Sy,
    Rp,
    RpMvue,
    Ra,
    Ralf,
    Rc,
    RaLsUnbiased,
    RalfLsUnbiased,
    RcLsUnbiased,
    /// First relativistic-average term alone: `mean_i f(C(x_i) - mean C(y))`.
    RaTerm1,
    /// Second relativistic-average term alone: `mean_j f(mean C(x) - C(y_j))`.
    RaTerm2,
    RcTerm1,
    RcTerm2,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 13] = [
        EstimatorKind::Sy,
        EstimatorKind::Rp,
        EstimatorKind::RpMvue,
        EstimatorKind::Ra,
        EstimatorKind::Ralf,
        EstimatorKind::Rc,
        EstimatorKind::RaLsUnbiased,
        EstimatorKind::RalfLsUnbiased,
        EstimatorKind::RcLsUnbiased,
        EstimatorKind::RaTerm1,
        EstimatorKind::RaTerm2,
        EstimatorKind::RcTerm1,
        EstimatorKind::RcTerm2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Sy => "sy",
            EstimatorKind::Rp => "rp",
            EstimatorKind::RpMvue => "rp_mvue",
            EstimatorKind::Ra => "ra",
            EstimatorKind::Ralf => "ralf",
            EstimatorKind::Rc => "rc",
            EstimatorKind::RaLsUnbiased => "ra_ls_unbiased",
            EstimatorKind::RalfLsUnbiased => "ralf_ls_unbiased",
            EstimatorKind::RcLsUnbiased => "rc_ls_unbiased",
            EstimatorKind::RaTerm1 => "ra_term1",
            EstimatorKind::RaTerm2 => "ra_term2",
            EstimatorKind::RcTerm1 => "rc_term1",
            EstimatorKind::RcTerm2 => "rc_term2",
        }
    }

    /// The least-squares-only bias-corrected estimators.
    pub fn is_ls_unbiased(self) -> bool {
        matches!(self, EstimatorKind::RaLsUnbiased | EstimatorKind::RalfLsUnbiased | EstimatorKind::RcLsUnbiased)
    }

    /// Estimators that substitute batch means for population means.
    pub fn uses_batch_means(self) -> bool {
        !matches!(self, EstimatorKind::Sy | EstimatorKind::Rp | EstimatorKind::RpMvue)
    }

    /// Smallest batch size the estimator is defined for.
    pub fn min_k(self) -> usize {
        if self.is_ls_unbiased() {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| invalid(format!("unknown estimator `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    pub estimator: EstimatorKind,
    pub k: usize,
}

/// Which least-squares divergence a bias correction targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnbiasedVariant {
    Ra,
    Ralf,
    Rc,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `1/(k-1)` convention.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn mean_f(loss: &ConcaveLoss, xs: impl Iterator<Item = f64>, k: usize) -> f64 {
    xs.map(|z| loss.value(z)).sum::<f64>() / k as f64
}

/// Raw estimator values, shared by the checked entry points and the enumeration
/// and Monte Carlo loops. Means may be overridden (`real_mean`, `fake_mean`) to
/// evaluate the same formula against reference means.
pub(crate) fn evaluate(
    real: &[f64],
    fake: &[f64],
    loss: &ConcaveLoss,
    kind: EstimatorKind,
    means: Option<(f64, f64)>,
) -> f64 {
    let k = real.len();
    let (mx, my) = means.unwrap_or_else(|| (mean(real), mean(fake)));
    let mc = 0.5 * (mx + my);
    let ra1 = || mean_f(loss, real.iter().map(|x| x - my), k);
    let ra2 = || mean_f(loss, fake.iter().map(|y| mx - y), k);
    let rc1 = || mean_f(loss, real.iter().map(|x| x - mc), k);
    let rc2 = || mean_f(loss, fake.iter().map(|y| mc - y), k);
    match kind {
        EstimatorKind::Sy => mean_f(loss, real.iter().copied(), k) + mean_f(loss, fake.iter().map(|y| -y), k),
        EstimatorKind::Rp => 2.0 * mean_f(loss, real.iter().zip(fake).map(|(x, y)| x - y), k),
        EstimatorKind::RpMvue => {
            let total: f64 = real.iter().map(|x| fake.iter().map(|y| loss.value(x - y)).sum::<f64>()).sum();
            2.0 * total / (k * k) as f64
        }
        EstimatorKind::Ra => ra1() + ra2(),
        EstimatorKind::Ralf => 2.0 * ra1(),
        EstimatorKind::Rc => rc1() + rc2(),
        EstimatorKind::RaTerm1 => ra1(),
        EstimatorKind::RaTerm2 => ra2(),
        EstimatorKind::RcTerm1 => rc1(),
        EstimatorKind::RcTerm2 => rc2(),
        EstimatorKind::RaLsUnbiased | EstimatorKind::RalfLsUnbiased | EstimatorKind::RcLsUnbiased => {
            let kf = k as f64;
            let vx = sample_variance(real);
            let vy = sample_variance(fake);
            match kind {
                EstimatorKind::RaLsUnbiased => ra1() + ra2() + (vx + vy) / kf,
                EstimatorKind::RalfLsUnbiased => 2.0 * ra1() + 2.0 * vy / kf,
                _ => rc1() + rc2() - (vx + vy) / (2.0 * kf),
            }
        }
    }
}

/// Checked estimator dispatch.
pub fn estimate(batch: &ScoreBatch, loss: &ConcaveLoss, kind: EstimatorKind) -> Result<EstimateResult> {
    if kind.is_ls_unbiased() && loss.kind != LossKind::Ls {
        return Err(invalid(format!("{kind} is only defined for the lsgan loss, got {}", loss.kind)));
    }
    if batch.k() < kind.min_k() {
        return Err(precondition(format!("{kind} needs k >= {}, got k = {}", kind.min_k(), batch.k())));
    }
    let value = evaluate(batch.real(), batch.fake(), loss, kind, None);
    if !value.is_finite() {
        return Err(invalid(format!("{kind} produced a non-finite value")));
    }
    Ok(EstimateResult { value, estimator: kind, k: batch.k() })
}

/// Symmetric estimator `mean f(C(x_i)) + mean f(-C(y_i))`.
pub fn est_sy(batch: &ScoreBatch, loss: &ConcaveLoss) -> EstimateResult {
    estimate(batch, loss, EstimatorKind::Sy).expect("valid batch")
}

/// Diagonal-pairing paired estimator `(2/k) sum_i f(C(x_i) - C(y_i))`.
pub fn est_rp_naive(batch: &ScoreBatch, loss: &ConcaveLoss) -> EstimateResult {
    estimate(batch, loss, EstimatorKind::Rp).expect("valid batch")
}

/// All-pairs U-statistic `(2/k^2) sum_i sum_j f(C(x_i) - C(y_j))`; O(k^2).
pub fn est_rp_mvue(batch: &ScoreBatch, loss: &ConcaveLoss) -> EstimateResult {
    estimate(batch, loss, EstimatorKind::RpMvue).expect("valid batch")
}

pub fn est_ra(batch: &ScoreBatch, loss: &ConcaveLoss) -> EstimateResult {
    estimate(batch, loss, EstimatorKind::Ra).expect("valid batch")
}

pub fn est_ralf(batch: &ScoreBatch, loss: &ConcaveLoss) -> EstimateResult {
    estimate(batch, loss, EstimatorKind::Ralf).expect("valid batch")
}

/// Centred estimator; the centre is the mean of all `2k` scores.
pub fn est_rc(batch: &ScoreBatch, loss: &ConcaveLoss) -> EstimateResult {
    estimate(batch, loss, EstimatorKind::Rc).expect("valid batch")
}

/// Least-squares estimate plus the sample-variance correction that makes its
/// expectation equal the population divergence:
///
/// * Ra: `+ (s_x^2 + s_y^2) / k`
/// * Ralf: `+ 2 s_y^2 / k`
/// * Rc: `- (s_x^2 + s_y^2) / (2k)`
pub fn ls_unbiased(batch: &ScoreBatch, variant: UnbiasedVariant) -> Result<EstimateResult> {
    let kind = match variant {
        UnbiasedVariant::Ra => EstimatorKind::RaLsUnbiased,
        UnbiasedVariant::Ralf => EstimatorKind::RalfLsUnbiased,
        UnbiasedVariant::Rc => EstimatorKind::RcLsUnbiased,
    };
    estimate(batch, &ConcaveLoss::lsgan(), kind)
}

/// Non-saturating generator objective on a batch whose fake scores are `C(G(z_i))`.
pub fn generator_loss(batch: &ScoreBatch, loss: &ConcaveLoss, variant: Variant) -> f64 {
    let (real, fake) = (batch.real(), batch.fake());
    let k = batch.k();
    let mx = mean(real);
    let my = mean(fake);
    let mc = 0.5 * (mx + my);
    match variant {
        Variant::Sy => mean_f(loss, fake.iter().copied(), k),
        Variant::Rp => 2.0 * mean_f(loss, fake.iter().zip(real).map(|(y, x)| y - x), k),
        Variant::Ra => mean_f(loss, fake.iter().map(|y| y - mx), k) + mean_f(loss, real.iter().map(|x| my - x), k),
        Variant::Ralf => 2.0 * mean_f(loss, fake.iter().map(|y| y - mx), k),
        Variant::Rc => mean_f(loss, fake.iter().map(|y| y - mc), k) + mean_f(loss, real.iter().map(|x| mc - x), k),
    }
}

/// Means and variances of the real and fake critic scores, plus the batch size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub mu_x: f64,
    pub var_x: f64,
    pub mu_y: f64,
    pub var_y: f64,
    pub k: usize,
}

impl MomentSpec {
    pub fn new(mu_x: f64, var_x: f64, mu_y: f64, var_y: f64, k: usize) -> Result<Self> {
        if !(var_x >= 0.0 && var_y >= 0.0) {
            return Err(invalid("variances must be non-negative"));
        }
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if ![mu_x, var_x, mu_y, var_y].iter().all(|v| v.is_finite()) {
            return Err(invalid("moments must be finite"));
        }
        Ok(MomentSpec { mu_x, var_x, mu_y, var_y, k })
    }
}

/// Least-squares quantities with a closed form in the score moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LsClosedVariant {
    /// `E f(C(x) - E C(y))`
    RaTerm1,
    /// `E f(E C(x) - C(y))`
    RaTerm2,
    Ra,
    /// Twice the first average term.
    Ralf,
    RcTerm1,
    RcTerm2,
    Rc,
}

/// Closed-form least-squares divergence objective for a fixed critic.
///
/// With `population` set this is the objective evaluated with true means; otherwise
/// it is the expectation of the mini-batch estimator at batch size `moments.k`.
pub fn closed_div_ls(moments: &MomentSpec, variant: LsClosedVariant, population: bool) -> f64 {
    let MomentSpec { mu_x, var_x, mu_y, var_y, k } = *moments;
    let k = k as f64;
    let gap = mu_x - mu_y;
    // E f(Z) = -(Var Z + (E Z)^2) + 2 E Z for f(z) = -z^2 + 2z
    let ls = |mean: f64, var: f64| -(var + mean * mean) + 2.0 * mean;
    let batch = !population;
    let ra1 = || ls(gap, var_x + if batch { var_y / k } else { 0.0 });
    let ra2 = || ls(gap, var_y + if batch { var_x / k } else { 0.0 });
    // Var(x_i - (mean x + mean y)/2) = var_x (1 - 3/(4k)) + var_y/(4k)
    let rc1 = || {
        let var = if batch { var_x * (1.0 - 0.75 / k) + var_y / (4.0 * k) } else { var_x };
        ls(0.5 * gap, var)
    };
    let rc2 = || {
        let var = if batch { var_y * (1.0 - 0.75 / k) + var_x / (4.0 * k) } else { var_y };
        ls(0.5 * gap, var)
    };
    match variant {
        LsClosedVariant::RaTerm1 => ra1(),
        LsClosedVariant::RaTerm2 => ra2(),
        LsClosedVariant::Ra => ra1() + ra2(),
        LsClosedVariant::Ralf => 2.0 * ra1(),
        LsClosedVariant::RcTerm1 => rc1(),
        LsClosedVariant::RcTerm2 => rc2(),
        LsClosedVariant::Rc => rc1() + rc2(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(r: &[f64], f: &[f64]) -> ScoreBatch {
        ScoreBatch::new(r.to_vec(), f.to_vec()).unwrap()
    }

    fn ls() -> ConcaveLoss {
        ConcaveLoss::lsgan()
    }

    #[test]
    fn batch_validation() {
        assert!(ScoreBatch::new(vec![], vec![]).is_err());
        assert!(ScoreBatch::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(ScoreBatch::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(ScoreBatch::new(vec![1.0], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn symmetric_examples() {
        assert_eq!(est_sy(&batch(&[0.0], &[0.0]), &ls()).value, 0.0);
        assert_eq!(est_sy(&batch(&[1.0], &[-1.0]), &ls()).value, 2.0);
        assert!(est_sy(&batch(&[0.0, 0.0], &[0.0, 0.0]), &ConcaveLoss::sgan()).value.abs() < 1e-15);
    }

    #[test]
    fn paired_examples() {
        assert_eq!(est_rp_naive(&batch(&[1.0], &[0.0]), &ls()).value, 2.0);
        for kind in LossKind::ALL {
            assert_eq!(est_rp_naive(&batch(&[0.3], &[0.3]), &ConcaveLoss::new(kind)).value, 0.0);
        }
        assert_eq!(est_rp_naive(&batch(&[1.0, 0.0], &[0.0, 1.0]), &ls()).value, -2.0);
    }

    #[test]
    fn mvue_examples() {
        assert_eq!(est_rp_mvue(&batch(&[1.0, 0.0], &[0.0, 1.0]), &ls()).value, -1.0);
        let single = batch(&[0.7], &[-1.2]);
        for kind in LossKind::ALL {
            let f = ConcaveLoss::new(kind);
            assert_eq!(est_rp_mvue(&single, &f).value, est_rp_naive(&single, &f).value);
            assert_eq!(est_rp_mvue(&batch(&[2.0, 2.0], &[2.0, 2.0]), &f).value, 0.0);
        }
    }

    #[test]
    fn average_examples() {
        for kind in LossKind::ALL {
            assert_eq!(est_ra(&batch(&[0.4, 0.4], &[0.4, 0.4]), &ConcaveLoss::new(kind)).value, 0.0);
        }
        assert_eq!(est_ra(&batch(&[1.0], &[0.0]), &ls()).value, 2.0);
        // 0.5 (f(2) + f(0)) + 0.5 (f(1) + f(1)) = 0 + 1
        assert_eq!(est_ra(&batch(&[2.0, 0.0], &[0.0, 0.0]), &ls()).value, 1.0);
    }

    #[test]
    fn one_way_examples() {
        assert_eq!(est_ralf(&batch(&[-0.3], &[-0.3]), &ConcaveLoss::hinge()).value, 0.0);
        assert_eq!(est_ralf(&batch(&[1.0], &[0.0]), &ls()).value, 2.0);
        assert_eq!(est_ralf(&batch(&[0.0, 2.0], &[0.0, 0.0]), &ls()).value, 0.0);
    }

    #[test]
    fn centred_examples() {
        assert_eq!(est_rc(&batch(&[5.0, 5.0], &[5.0, 5.0]), &ls()).value, 0.0);
        assert_eq!(est_rc(&batch(&[1.0], &[-1.0]), &ls()).value, 2.0);
        assert_eq!(est_rc(&batch(&[1.0], &[0.0]), &ls()).value, 1.5);
    }

    #[test]
    fn ls_unbiased_requires_two_samples_and_lsgan() {
        let b = batch(&[1.0], &[0.0]);
        assert!(matches!(ls_unbiased(&b, UnbiasedVariant::Ra), Err(crate::Error::Precondition(_))));
        let b2 = batch(&[1.0, 2.0], &[0.0, 1.0]);
        assert!(estimate(&b2, &ConcaveLoss::sgan(), EstimatorKind::RaLsUnbiased).is_err());
    }

    #[test]
    fn ls_unbiased_constant_batches_are_zero() {
        let b = batch(&[3.0, 3.0], &[3.0, 3.0]);
        for v in [UnbiasedVariant::Ra, UnbiasedVariant::Ralf, UnbiasedVariant::Rc] {
            assert_eq!(ls_unbiased(&b, v).unwrap().value, 0.0);
        }
    }

    #[test]
    fn generator_examples() {
        for kind in LossKind::ALL {
            assert_eq!(generator_loss(&batch(&[0.1], &[0.1]), &ConcaveLoss::new(kind), Variant::Rp), 0.0);
        }
        assert_eq!(generator_loss(&batch(&[0.0], &[1.0]), &ls(), Variant::Rp), 2.0);
        assert_eq!(generator_loss(&batch(&[1.0], &[0.0]), &ls(), Variant::Ra), -6.0);
        assert_eq!(generator_loss(&batch(&[1.0], &[0.0]), &ls(), Variant::Sy), 0.0);
        assert_eq!(generator_loss(&batch(&[0.0], &[1.0]), &ls(), Variant::Ralf), 2.0);
    }

    #[test]
    fn closed_form_examples() {
        let point = MomentSpec::new(1.0, 0.0, 0.0, 0.0, 1).unwrap();
        assert_eq!(closed_div_ls(&point, LsClosedVariant::RaTerm1, true), 1.0);

        let same = MomentSpec::new(0.6, 0.0, 0.6, 0.0, 3).unwrap();
        for v in [
            LsClosedVariant::RaTerm1,
            LsClosedVariant::RaTerm2,
            LsClosedVariant::Ra,
            LsClosedVariant::Ralf,
            LsClosedVariant::Rc,
        ] {
            assert_eq!(closed_div_ls(&same, v, true), 0.0);
        }

        let m = MomentSpec::new(1.0, 0.0, 0.0, 1.0, 4).unwrap();
        assert_eq!(closed_div_ls(&m, LsClosedVariant::RaTerm1, false), 0.75);
    }

    #[test]
    fn closed_forms_match_expanded_polynomials() {
        // expanded expressions as they appear in the least-squares derivation
        let (mx, vx, my, vy, k) = (0.7, 1.3, -0.4, 0.6, 5usize);
        let m = MomentSpec::new(mx, vx, my, vy, k).unwrap();
        let kf = k as f64;
        let ra1 = -vx - mx * mx + 2.0 * mx * my + 2.0 * mx - 2.0 * my - my * my;
        let ra2 = -vy - my * my + 2.0 * mx * my - 2.0 * my + 2.0 * mx - mx * mx;
        let rc1 = -vx + 0.5 * mx * my + mx - my - 0.25 * mx * mx - 0.25 * my * my;
        let rc1_hat = (0.75 - kf) / kf * vx - vy / (4.0 * kf) - 0.25 * mx * mx - 0.25 * my * my + 0.5 * mx * my + mx - my;
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(closed_div_ls(&m, LsClosedVariant::RaTerm1, true), ra1));
        assert!(close(closed_div_ls(&m, LsClosedVariant::RaTerm2, true), ra2));
        assert!(close(closed_div_ls(&m, LsClosedVariant::RaTerm1, false), ra1 - vy / kf));
        assert!(close(closed_div_ls(&m, LsClosedVariant::RcTerm1, true), rc1));
        assert!(close(closed_div_ls(&m, LsClosedVariant::RcTerm1, false), rc1_hat));
    }

    #[test]
    fn moment_validation() {
        assert!(MomentSpec::new(0.0, -1.0, 0.0, 0.0, 1).is_err());
        assert!(MomentSpec::new(0.0, 0.0, 0.0, 0.0, 0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for e in EstimatorKind::ALL {
            assert_eq!(e.name().parse::<EstimatorKind>().unwrap(), e);
        }
    }
}

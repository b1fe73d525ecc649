use proptest::prelude::*;

use reldiv::bias_lab::{exact_expectation, population_value, ScoreDist};
use reldiv::estimators::{estimate, EstimatorKind, ScoreBatch};
use reldiv::oracle::{objective, objective_gradient, wasserstein_1d, CriticTable, DiscreteDist};
use reldiv::{ConcaveLoss, LossKind, Variant};

fn loss_kind() -> impl Strategy<Value = LossKind> {
    prop_oneof![Just(LossKind::S), Just(LossKind::Ls), Just(LossKind::Hinge)]
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Sy), Just(Variant::Rp), Just(Variant::Ra), Just(Variant::Ralf), Just(Variant::Rc)]
}

fn normalise(w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// P, Q on a shared support of `n` points.
fn dist_pair(max_n: usize) -> impl Strategy<Value = (DiscreteDist, DiscreteDist)> {
    (2..=max_n).prop_flat_map(|n| {
        (
            -2.0..0.0f64,
            prop::collection::vec(0.1..1.0f64, n - 1),
            prop::collection::vec(0.01..1.0f64, n),
            prop::collection::vec(0.01..1.0f64, n),
        )
            .prop_map(|(start, gaps, wp, wq)| {
                let mut pts = vec![start];
                for g in gaps {
                    pts.push(pts.last().unwrap() + g);
                }
                (DiscreteDist::new(pts.clone(), normalise(wp)).unwrap(), DiscreteDist::new(pts, normalise(wq)).unwrap())
            })
    })
}

fn score_dist(max_m: usize) -> impl Strategy<Value = ScoreDist> {
    (1..=max_m).prop_flat_map(|m| {
        (prop::collection::vec(-2.0..2.0f64, m), prop::collection::vec(0.05..1.0f64, m))
            .prop_map(|(v, w)| ScoreDist::new(v, normalise(w)).unwrap())
    })
}

fn batch(max_k: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_k).prop_flat_map(|k| (prop::collection::vec(-3.0..3.0f64, k), prop::collection::vec(-3.0..3.0f64, k)))
}

const RELATIVISTIC_ESTIMATORS: [EstimatorKind; 6] = [
    EstimatorKind::Rp,
    EstimatorKind::RpMvue,
    EstimatorKind::Ra,
    EstimatorKind::Ralf,
    EstimatorKind::Rc,
    EstimatorKind::RcLsUnbiased,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mvue_ignores_batch_order((real, fake) in batch(6), kind in loss_kind(), rot in 0usize..6) {
        let loss = ConcaveLoss::new(kind);
        let a = estimate(&ScoreBatch::new(real.clone(), fake.clone()).unwrap(), &loss, EstimatorKind::RpMvue).unwrap().value;
        let mut r2 = real.clone();
        r2.reverse();
        let mut f2 = fake.clone();
        let len = f2.len();
        f2.rotate_left(rot % len);
        let b = estimate(&ScoreBatch::new(r2, f2).unwrap(), &loss, EstimatorKind::RpMvue).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn relativistic_estimators_ignore_score_shift((real, fake) in batch(6), kind in loss_kind(), shift in -5.0..5.0f64) {
        let loss = ConcaveLoss::new(kind);
        let base = ScoreBatch::new(real.clone(), fake.clone()).unwrap();
        let moved = ScoreBatch::new(real.iter().map(|x| x + shift).collect(), fake.iter().map(|y| y + shift).collect()).unwrap();
        for est in RELATIVISTIC_ESTIMATORS {
            if est.is_ls_unbiased() && (kind != LossKind::Ls || base.k() < 2) {
                continue;
            }
            let a = estimate(&base, &loss, est).unwrap().value;
            let b = estimate(&moved, &loss, est).unwrap().value;
            // hinge kinks make the shifted difference sensitive to rounding of c + shift
            let tol = if kind == LossKind::Hinge { 1e-9 } else { 1e-9 * a.abs().max(1.0) };
            prop_assert!((a - b).abs() <= tol, "{}: {} vs {}", est, a, b);
        }
    }

    #[test]
    fn objective_is_concave_on_chords(
        (p, q) in dist_pair(5), kind in loss_kind(), v in variant(),
        seed_a in prop::collection::vec(-3.0..3.0f64, 5), seed_b in prop::collection::vec(-3.0..3.0f64, 5), t in 0.0..1.0f64,
    ) {
        let loss = ConcaveLoss::new(kind);
        let n = p.len();
        let val = |c: &[f64]| objective(&p, &q, &CriticTable::new(c.to_vec()).unwrap(), &loss, v).unwrap();
        let a = &seed_a[..n];
        let b = &seed_b[..n];
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        prop_assert!(val(&mid) >= t * val(a) + (1.0 - t) * val(b) - 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences(
        (p, q) in dist_pair(5), smooth_ls in any::<bool>(), v in variant(), c in prop::collection::vec(-2.0..2.0f64, 5),
    ) {
        let loss = if smooth_ls { ConcaveLoss::lsgan() } else { ConcaveLoss::sgan() };
        let n = p.len();
        let c = &c[..n];
        let g = objective_gradient(&p, &q, &CriticTable::new(c.to_vec()).unwrap(), &loss, v).unwrap();
        let h = 1e-6;
        for i in 0..n {
            let mut up = c.to_vec();
            up[i] += h;
            let mut down = c.to_vec();
            down[i] -= h;
            let fu = objective(&p, &q, &CriticTable::new(up).unwrap(), &loss, v).unwrap();
            let fd = objective(&p, &q, &CriticTable::new(down).unwrap(), &loss, v).unwrap();
            let num = (fu - fd) / (2.0 * h);
            prop_assert!((num - g[i]).abs() <= 1e-5 * g[i].abs().max(1e-2), "{}: {} vs {}", i, num, g[i]);
        }
    }

    #[test]
    fn relativistic_objectives_are_gauge_invariant(
        (p, q) in dist_pair(5), kind in loss_kind(), c in prop::collection::vec(-2.0..2.0f64, 5), shift in -3.0..3.0f64,
    ) {
        let loss = ConcaveLoss::new(kind);
        let n = p.len();
        let c = c[..n].to_vec();
        let moved: Vec<f64> = c.iter().map(|x| x + shift).collect();
        for v in Variant::RELATIVISTIC {
            let a = objective(&p, &q, &CriticTable::new(c.clone()).unwrap(), &loss, v).unwrap();
            let b = objective(&p, &q, &CriticTable::new(moved.clone()).unwrap(), &loss, v).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0) + 1e-12, "{}: {} vs {}", v, a, b);
        }
    }

    #[test]
    fn term1_bias_law_holds(real in score_dist(3), fake in score_dist(3), k in 1usize..4) {
        let loss = ConcaveLoss::lsgan();
        let e = exact_expectation(&real, &fake, k, EstimatorKind::RaTerm1, &loss).unwrap();
        let bias = e - population_value(&real, &fake, EstimatorKind::RaTerm1, &loss);
        prop_assert!((bias + fake.variance() / k as f64).abs() <= 1e-10);
    }

    #[test]
    fn corrected_estimators_are_unbiased(real in score_dist(3), fake in score_dist(3), k in 2usize..4) {
        let loss = ConcaveLoss::lsgan();
        for kind in [EstimatorKind::RaLsUnbiased, EstimatorKind::RalfLsUnbiased, EstimatorKind::RcLsUnbiased] {
            let e = exact_expectation(&real, &fake, k, kind, &loss).unwrap();
            let target = population_value(&real, &fake, kind, &loss);
            prop_assert!((e - target).abs() <= 1e-10, "{}: {} vs {}", kind, e, target);
        }
    }

    #[test]
    fn wasserstein_between_point_masses(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let w = wasserstein_1d(&DiscreteDist::point_mass(a).unwrap(), &DiscreteDist::point_mass(b).unwrap());
        prop_assert!((w - (a - b).abs()).abs() <= 1e-12);
    }

    #[test]
    fn loss_properties_hold(kind in loss_kind(), seed in any::<u64>()) {
        let report = ConcaveLoss::new(kind).check_properties(200, seed).unwrap();
        prop_assert!(report.passed(), "{:?}", report.violations);
    }
}

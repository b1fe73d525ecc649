//! Seeded random distribution pairs.
//!
//! Instance `i` of seed `s` is drawn from its own ChaCha8 stream, so any single
//! instance can be regenerated without producing the ones before it. Each
//! instance has a support of 2 to 6 points drawn uniformly from `[-1, 1]` and
//! sorted; `P` and `Q` are independent symmetric Dirichlet(1) weightings of it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::oracle::DiscreteDist;

pub const MIN_SUPPORT: usize = 2;
pub const MAX_SUPPORT: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub index: usize,
    pub p: DiscreteDist,
    pub q: DiscreteDist,
}

pub fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn dirichlet_one<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn support<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut pts: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[0] < w[1]) {
            return pts;
        }
    }
}

pub fn random_instance(seed: u64, index: usize) -> Instance {
    let mut rng = instance_rng(seed, index);
    let n = rng.random_range(MIN_SUPPORT..=MAX_SUPPORT);
    let pts = support(&mut rng, n);
    let p = dirichlet_one(&mut rng, n);
    let q = dirichlet_one(&mut rng, n);
    Instance {
        index,
        p: DiscreteDist::new(pts.clone(), p).expect("dirichlet weights are a distribution"),
        q: DiscreteDist::new(pts, q).expect("dirichlet weights are a distribution"),
    }
}

pub fn random_instances(seed: u64, count: usize) -> Vec<Instance> {
    (0..count).map(|i| random_instance(seed, i)).collect()
}

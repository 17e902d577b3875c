//! Seeded initialization: uniform sampling from the data and k-means++.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{sq_dist, CenterSet, Dataset};
use crate::error::{Error, Result};

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    Random,
    #[serde(rename = "kmeanspp")]
    KMeansPlusPlus,
}

impl InitMethod {
    pub fn init(self, data: &Dataset, k: usize, seed: u64) -> Result<CenterSet> {
        match self {
            InitMethod::Random => init_random(data, k, seed),
            InitMethod::KMeansPlusPlus => init_kmeanspp(data, k, seed),
        }
    }
}

impl std::str::FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(InitMethod::Random),
            "kmeanspp" | "kmeans++" | "k-means++" => Ok(InitMethod::KMeansPlusPlus),
            other => Err(Error::invalid(format!("unknown init method '{other}'"))),
        }
    }
}

fn check_k(data: &Dataset, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > data.len() {
        return Err(Error::invalid(format!(
            "k={k} exceeds the number of points n={}",
            data.len()
        )));
    }
    Ok(())
}

/// `k` distinct data points drawn uniformly without replacement.
pub fn init_random(data: &Dataset, k: usize, seed: u64) -> Result<CenterSet> {
    check_k(data, k)?;
    let mut rng = rng_from_seed(seed);
    let picked = rand::seq::index::sample(&mut rng, data.len(), k).into_vec();
    CenterSet::from_points(data, &picked)
}

/// k-means++ seeding: first center uniform, then D²-weighted sampling.
pub fn init_kmeanspp(data: &Dataset, k: usize, seed: u64) -> Result<CenterSet> {
    check_k(data, k)?;
    let mut rng = rng_from_seed(seed);
    let n = data.len();
    let first = rng.random_range(0..n);
    let mut picked = vec![first];
    let mut d2: Vec<f64> = data
        .points()
        .map(|p| sq_dist(p, data.point(first)))
        .collect();
    while picked.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut choice = None;
            for (t, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    choice = Some(t);
                    break;
                }
            }
            // Rounding can leave `acc` a hair below `target`; take the last positive weight.
            choice.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            // Every remaining point coincides with a chosen center.
            let free: Vec<usize> = (0..n).filter(|t| !picked.contains(t)).collect();
            free[rng.random_range(0..free.len())]
        };
        picked.push(next);
        for (t, p) in data.points().enumerate() {
            let d = sq_dist(p, data.point(next));
            if d < d2[t] {
                d2[t] = d;
            }
        }
    }
    CenterSet::from_points(data, &picked)
}

//! Lloyd's k-means and ensembles of independently seeded runs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::frechet::EnsembleSample;
use crate::partition::Partition;
use crate::rng::stream_rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMeansInit {
    /// D² seeding: each further centroid is a point drawn with probability
    /// proportional to its squared distance from the centroids chosen so far.
    #[default]
    PlusPlus,
    /// k data points with pairwise distinct coordinates, uniformly at random.
    Forgy,
}

impl std::str::FromStr for KMeansInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plusplus" | "kmeans++" | "k-means++" => Ok(Self::PlusPlus),
            "forgy" => Ok(Self::Forgy),
            other => Err(Error::InvalidConfig(format!("unknown k-means init {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub init: KMeansInit,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iter: 100,
            seed,
            init: KMeansInit::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    /// Zero-based cluster of every point.
    pub labels: Vec<usize>,
    /// `k x d`, row-major. Empty clusters keep their last centroid.
    pub centroids: Vec<f64>,
    /// Number of centroid updates.
    pub iterations: usize,
    pub converged: bool,
    /// Within-cluster sum of squares after every assignment step.
    pub inertia: Vec<f64>,
}

impl KMeansFit {
    pub fn partition(&self, k: usize) -> Result<Partition> {
        Partition::from_labels(&self.labels, k)
    }
}

/// Hard partition with `k` rows from a single k-means run (stream 0 of `seed`).
pub fn kmeans(data: &Dataset, config: &KMeansConfig) -> Result<Partition> {
    fit(data, config, &mut stream_rng(config.seed, 0))?.partition(config.k)
}

/// Lloyd iterations from a seeded initialization until the assignment stops
/// changing or `max_iter` updates have run. Ties go to the smaller cluster
/// index and clusters that lose all their points stay empty.
pub fn fit(data: &Dataset, config: &KMeansConfig, rng: &mut ChaCha8Rng) -> Result<KMeansFit> {
    let (m, d, k) = (data.len(), data.dim(), config.k);
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    if k > m {
        return Err(Error::TooManyClusters { clusters: k, points: m });
    }
    let mut centroids = match config.init {
        KMeansInit::PlusPlus => seed_plus_plus(data, k, rng),
        KMeansInit::Forgy => seed_forgy(data, k, rng),
    };

    let mut labels: Vec<usize> = Vec::new();
    let mut inertia = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let (next, cost) = assign(data, &centroids, k);
        inertia.push(cost);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
        if iterations == config.max_iter {
            break;
        }
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (j, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(data.point(j)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for t in 0..d {
                    centroids[c * d + t] = sums[c * d + t] / counts[c] as f64;
                }
            }
        }
        iterations += 1;
    }
    Ok(KMeansFit {
        labels,
        centroids,
        iterations,
        converged,
        inertia,
    })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn assign(data: &Dataset, centroids: &[f64], k: usize) -> (Vec<usize>, f64) {
    let d = data.dim();
    let mut total = 0.0;
    let labels = (0..data.len())
        .map(|j| {
            let p = data.point(j);
            let mut best = (0, squared_distance(p, &centroids[..d]));
            for c in 1..k {
                let dist = squared_distance(p, &centroids[c * d..(c + 1) * d]);
                if dist < best.1 {
                    best = (c, dist);
                }
            }
            total += best.1;
            best.0
        })
        .collect();
    (labels, total)
}

fn seed_plus_plus(data: &Dataset, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = data.len();
    let first = rng.random_range(0..m);
    let mut centroids = data.point(first).to_vec();
    let mut nearest: Vec<f64> = (0..m)
        .map(|j| squared_distance(data.point(j), data.point(first)))
        .collect();
    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (j, &w) in nearest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(j);
                    break;
                }
            }
            // rounding can leave `target` just above the final sum
            pick.unwrap_or_else(|| nearest.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            rng.random_range(0..m)
        };
        let chosen = data.point(pick).to_vec();
        for (j, w) in nearest.iter_mut().enumerate() {
            *w = w.min(squared_distance(data.point(j), &chosen));
        }
        centroids.extend(chosen);
    }
    centroids
}

fn seed_forgy(data: &Dataset, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(rng);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for &j in &order {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().all(|&c| data.point(c) != data.point(j)) {
            chosen.push(j);
        }
    }
    // fewer than k distinct points: fill with repeats in shuffled order
    for &j in &order {
        if chosen.len() == k {
            break;
        }
        if !chosen.contains(&j) {
            chosen.push(j);
        }
    }
    chosen.iter().flat_map(|&j| data.point(j).to_vec()).collect()
}

/// `n` k-means runs; run `r` draws from stream `r` of `config.seed`. The
/// sample order follows the run index regardless of scheduling.
pub fn ensemble(data: &Dataset, config: &KMeansConfig, n: usize) -> Result<EnsembleSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let parts = (0..n)
        .into_par_iter()
        .map(|r| fit(data, config, &mut stream_rng(config.seed, r as u64))?.partition(config.k))
        .collect::<Result<Vec<_>>>()?;
    EnsembleSample::new(parts)
}

//! Samples of partitions, empirical Fréchet functions, medoids and cluster
//! instability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymmetry::{alpha_general, ball_contains, AsymmetryProfile, BallBoundary};
use crate::error::{Error, Result};
use crate::partition::{optimal_alignment, Alignment, Partition};

/// An ordered, non-empty list of partitions sharing `l` and `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Partition>", into = "Vec<Partition>")]
pub struct EnsembleSample {
    partitions: Vec<Partition>,
}

impl EnsembleSample {
    pub fn new(partitions: Vec<Partition>) -> Result<Self> {
        let first = partitions.first().ok_or(Error::EmptySample)?;
        for part in &partitions[1..] {
            first.check_same_shape(part)?;
        }
        Ok(Self { partitions })
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Number of clusters `l` shared by every member.
    pub fn rows(&self) -> usize {
        self.partitions[0].rows()
    }

    /// Number of data points `m` shared by every member.
    pub fn cols(&self) -> usize {
        self.partitions[0].cols()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn get(&self, i: usize) -> &Partition {
        &self.partitions[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Partition> {
        self.partitions.iter()
    }

    /// Members at the given indices, in that order (duplicates allowed).
    pub fn subsample(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.partitions[i].clone()).collect())
    }

    /// Optimal alignment of every member against `z`.
    pub fn align_to(&self, z: &Partition) -> Result<Vec<Alignment>> {
        self.partitions
            .par_iter()
            .map(|x| optimal_alignment(z, x))
            .collect()
    }
}

impl TryFrom<Vec<Partition>> for EnsembleSample {
    type Error = Error;

    fn try_from(partitions: Vec<Partition>) -> Result<Self> {
        Self::new(partitions)
    }
}

impl From<EnsembleSample> for Vec<Partition> {
    fn from(sample: EnsembleSample) -> Self {
        sample.partitions
    }
}

impl<'a> IntoIterator for &'a EnsembleSample {
    type Item = &'a Partition;
    type IntoIter = std::slice::Iter<'a, Partition>;

    fn into_iter(self) -> Self::IntoIter {
        self.partitions.iter()
    }
}

/// Distance between sample members used by medoids and instability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// The intrinsic metric.
    Delta,
    /// Squared intrinsic metric (the Fréchet-function integrand).
    DeltaSquared,
    /// `1 - [X_j in asymmetry ball of X_i]`; not symmetric.
    Indicator,
}

/// `F_n(z) = (1/n) sum_i delta(X_i, z)^2`.
pub fn frechet_value(sample: &EnsembleSample, z: &Partition) -> Result<f64> {
    let alignments = sample.align_to(z)?;
    Ok(mean(alignments.iter().map(|a| a.distance_sq)))
}

pub(crate) fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// All pairwise squared distances of a sample together with every member's
/// degree of asymmetry. Rows of the matrix are ball centers for the
/// indicator distance.
#[derive(Clone, Debug)]
pub struct PairwiseDistances {
    n: usize,
    distance_sq: Vec<f64>,
    profiles: Vec<AsymmetryProfile>,
}

impl PairwiseDistances {
    pub fn compute(sample: &EnsembleSample) -> Result<Self> {
        let n = sample.len();
        let parts = sample.partitions();
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| optimal_alignment(&parts[i], &parts[j]).map(|a| a.distance_sq))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let mut distance_sq = vec![0.0; n * n];
        for (i, row) in upper.iter().enumerate() {
            for (offset, &d) in row.iter().enumerate() {
                let j = i + 1 + offset;
                distance_sq[i * n + j] = d;
                distance_sq[j * n + i] = d;
            }
        }
        let profiles = parts.par_iter().map(alpha_general).collect();
        Ok(Self {
            n,
            distance_sq,
            profiles,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance_sq(&self, i: usize, j: usize) -> f64 {
        self.distance_sq[i * self.n + j]
    }

    pub fn profiles(&self) -> &[AsymmetryProfile] {
        &self.profiles
    }

    /// Whether member `j` lies in the closed asymmetry ball of member `i`.
    pub fn in_ball(&self, i: usize, j: usize) -> bool {
        ball_contains(&self.profiles[i], self.distance_sq(i, j), BallBoundary::Closed)
    }

    /// Number of members inside the asymmetry ball of member `i`.
    pub fn ball_count(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.in_ball(i, j)).count()
    }

    pub fn value(&self, i: usize, j: usize, distance: Distance) -> f64 {
        match distance {
            Distance::Delta => self.distance_sq(i, j).sqrt(),
            Distance::DeltaSquared => self.distance_sq(i, j),
            Distance::Indicator => {
                if self.in_ball(i, j) {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// `F(X_i) = (1/n) sum_j distance(X_i, X_j)`.
    pub fn frechet_at_member(&self, i: usize, distance: Distance) -> f64 {
        match distance {
            // Written as 1 - h_i so that the medoid value equals 1 - h* bit for bit.
            Distance::Indicator => 1.0 - self.ball_count(i) as f64 / self.n as f64,
            _ => mean((0..self.n).map(|j| self.value(i, j, distance))),
        }
    }

    pub fn medoid(&self, distance: Distance) -> Medoid {
        let mut best = Medoid {
            index: 0,
            value: self.frechet_at_member(0, distance),
        };
        for i in 1..self.n {
            let value = self.frechet_at_member(i, distance);
            if value < best.value {
                best = Medoid { index: i, value };
            }
        }
        best
    }

    /// `I = (1/n^2) sum_i sum_j distance(X_i, X_j)`, diagonal included.
    ///
    /// Averaged relative to the smallest member value, so rounding can never
    /// push `I` below the medoid's value.
    pub fn instability(&self, distance: Distance) -> f64 {
        let values: Vec<f64> = (0..self.n).map(|i| self.frechet_at_member(i, distance)).collect();
        let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
        lowest + mean(values.iter().map(|v| v - lowest))
    }
}

/// The sample member minimizing the Fréchet function over the sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Medoid {
    pub index: usize,
    pub value: f64,
}

/// Medoid under `distance`; the smallest index wins ties.
pub fn medoid(sample: &EnsembleSample, distance: Distance) -> Result<Medoid> {
    Ok(PairwiseDistances::compute(sample)?.medoid(distance))
}

/// Cluster instability: average pairwise distance between sample members.
pub fn instability(sample: &EnsembleSample, distance: Distance) -> Result<f64> {
    Ok(PairwiseDistances::compute(sample)?.instability(distance))
}

//! α-homogeneity of a sample, outlier identification, exact homogeneity for
//! tiny samples, and choosing the number of clusters by maximal homogeneity.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frechet::{Distance, EnsembleSample, PairwiseDistances};
use crate::mean::exact_mean_set;

/// Largest sample accepted by [`exact_homogeneity`].
pub const EXACT_HOMOGENEITY_MAX_N: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub n: usize,
    /// Degree of asymmetry of every member.
    pub alphas: Vec<f64>,
    /// Fraction of the sample inside each member's asymmetry ball.
    pub h: Vec<f64>,
    pub h_star: f64,
    /// Smallest index attaining `h_star`.
    pub best_center: usize,
    /// Members outside the best center's asymmetry ball.
    pub outliers: Vec<usize>,
}

impl HomogeneityReport {
    pub fn from_pairwise(pd: &PairwiseDistances) -> Self {
        let n = pd.len();
        let counts: Vec<usize> = (0..n).map(|i| pd.ball_count(i)).collect();
        let h: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let mut best_center = 0;
        for i in 1..n {
            if counts[i] > counts[best_center] {
                best_center = i;
            }
        }
        let outliers = (0..n).filter(|&j| !pd.in_ball(best_center, j)).collect();
        Self {
            n,
            alphas: pd.profiles().iter().map(|p| p.alpha).collect(),
            h_star: h[best_center],
            h,
            best_center,
            outliers,
        }
    }

    /// One line per member: `index,alpha,h,outlier`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,alpha,h,outlier\n");
        for i in 0..self.n {
            let outlier = self.outliers.binary_search(&i).is_ok();
            let _ = writeln!(out, "{i},{},{},{}", self.alphas[i], self.h[i], u8::from(outlier));
        }
        out
    }
}

/// Fraction of the sample in each member's asymmetry ball and its maximum.
pub fn alpha_homogeneity(sample: &EnsembleSample) -> Result<HomogeneityReport> {
    Ok(HomogeneityReport::from_pairwise(&PairwiseDistances::compute(sample)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactHomogeneity {
    /// Largest fraction of the sample with a unique mean.
    pub value: f64,
    /// Indices of the first maximal homogeneous sub-sample.
    pub members: Vec<usize>,
}

/// Exact homogeneity by enumerating sub-samples from the largest down, in
/// lexicographic order within a size; a sub-sample is homogeneous iff its
/// exact mean set is a single partition. Duplicated members are distinct.
pub fn exact_homogeneity(sample: &EnsembleSample) -> Result<ExactHomogeneity> {
    let n = sample.len();
    if n > EXACT_HOMOGENEITY_MAX_N {
        return Err(Error::GuardExceeded {
            what: "sample size for exact homogeneity",
            count: n as u128,
            limit: EXACT_HOMOGENEITY_MAX_N as u128,
        });
    }
    for size in (2..=n).rev() {
        for members in (0..n).combinations(size) {
            if exact_mean_set(&sample.subsample(&members)?)?.is_unique() {
                return Ok(ExactHomogeneity {
                    value: size as f64 / n as f64,
                    members,
                });
            }
        }
    }
    Ok(ExactHomogeneity {
        value: 1.0 / n as f64,
        members: vec![0],
    })
}

/// Per-k scores for choosing the number of clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityProfile {
    pub ks: Vec<usize>,
    pub h_star_k: Vec<f64>,
    /// Cluster instability under the intrinsic metric.
    pub instability_k: Vec<f64>,
    /// Fréchet value of the medoid under the indicator distance (`1 - h*`).
    pub frechet_medoid_k: Vec<f64>,
    /// Fréchet value of the medoid under the intrinsic metric.
    pub frechet_medoid_delta_k: Vec<f64>,
    /// `argmax_k h*_k`, smallest k on ties.
    pub selected: usize,
    /// `argmin_k` instability, smallest k on ties.
    pub selected_by_instability: usize,
}

impl StabilityProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,h_star,instability,frechet_medoid,frechet_medoid_delta,selected\n");
        for (i, k) in self.ks.iter().enumerate() {
            let _ = writeln!(
                out,
                "{k},{},{},{},{},{}",
                self.h_star_k[i],
                self.instability_k[i],
                self.frechet_medoid_k[i],
                self.frechet_medoid_delta_k[i],
                u8::from(*k == self.selected)
            );
        }
        out
    }
}

/// Scores every candidate k and selects the one with the highest α-homogeneity.
pub fn select_clusters(samples_by_k: &BTreeMap<usize, EnsembleSample>) -> Result<StabilityProfile> {
    let first = samples_by_k
        .values()
        .next()
        .ok_or_else(|| Error::InvalidConfig("no candidate cluster counts".into()))?;
    let m = first.cols();
    let mut profile = StabilityProfile {
        ks: Vec::new(),
        h_star_k: Vec::new(),
        instability_k: Vec::new(),
        frechet_medoid_k: Vec::new(),
        frechet_medoid_delta_k: Vec::new(),
        selected: 0,
        selected_by_instability: 0,
    };
    for (&k, sample) in samples_by_k {
        if sample.cols() != m {
            return Err(Error::dims(format!("{m} points"), format!("{} points at k={k}", sample.cols())));
        }
        let pd = PairwiseDistances::compute(sample)?;
        let report = HomogeneityReport::from_pairwise(&pd);
        profile.ks.push(k);
        profile.h_star_k.push(report.h_star);
        profile.instability_k.push(pd.instability(Distance::Delta));
        profile.frechet_medoid_k.push(pd.medoid(Distance::Indicator).value);
        profile.frechet_medoid_delta_k.push(pd.medoid(Distance::Delta).value);
    }
    let argbest = |values: &[f64], better: fn(f64, f64) -> bool| {
        let mut best = 0;
        for i in 1..values.len() {
            if better(values[i], values[best]) {
                best = i;
            }
        }
        best
    };
    profile.selected = profile.ks[argbest(&profile.h_star_k, |a, b| a > b)];
    profile.selected_by_instability = profile.ks[argbest(&profile.instability_k, |a, b| a < b)];
    Ok(profile)
}

/// Cluster sizes of every member sorted from largest to smallest, divided by
/// `m`, and averaged over the sample.
pub fn normalized_cluster_sizes(sample: &EnsembleSample) -> Vec<f64> {
    let l = sample.rows();
    let m = sample.cols() as f64;
    let mut acc = vec![0.0; l];
    for part in sample {
        let mut sizes = part.cluster_sizes();
        sizes.sort_by(|a, b| b.total_cmp(a));
        for (a, s) in acc.iter_mut().zip(sizes) {
            *a += s / m;
        }
    }
    acc.iter().map(|a| a / sample.len() as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;

    fn hard(labels: &[usize], l: usize) -> Partition {
        Partition::from_labels(labels, l).unwrap()
    }

    fn sample(parts: Vec<Partition>) -> EnsembleSample {
        EnsembleSample::new(parts).unwrap()
    }

    #[test]
    fn identical_sample_is_fully_homogeneous() {
        let x = hard(&[0, 0, 1, 1, 2], 3);
        let r = alpha_homogeneity(&sample(vec![x; 5])).unwrap();
        assert_eq!(r.h_star, 1.0);
        assert!(r.outliers.is_empty());
        assert_eq!(r.best_center, 0);
    }

    #[test]
    fn five_point_fixture() {
        let s = sample(vec![hard(&[0, 0, 1, 1, 1], 2), hard(&[0, 0, 0, 1, 1], 2)]);
        let r = alpha_homogeneity(&s).unwrap();
        assert_eq!(r.h_star, 0.5);
        assert_eq!(r.h, vec![0.5, 0.5]);
        assert_eq!(r.best_center, 0);
        assert_eq!(r.outliers, vec![1]);
        assert_eq!(r.alphas, vec![10f64.sqrt(); 2]);
    }

    #[test]
    fn mutually_distant_sample_has_h_star_one_over_n() {
        let s = sample(vec![
            hard(&[0, 0, 1, 1], 2),
            hard(&[0, 1, 0, 1], 2),
            hard(&[0, 1, 1, 0], 2),
        ]);
        let r = alpha_homogeneity(&s).unwrap();
        assert_eq!(r.h_star, 1.0 / 3.0);
        assert_eq!(r.outliers, vec![1, 2]);
    }

    #[test]
    fn exact_homogeneity_bounds() {
        let x = hard(&[0, 0, 1, 1], 2);
        let h = exact_homogeneity(&sample(vec![x.clone(); 3])).unwrap();
        assert_eq!(h.value, 1.0);

        let s = sample(vec![x.clone(), hard(&[0, 1, 0, 1], 2), hard(&[0, 1, 1, 0], 2)]);
        let h = exact_homogeneity(&s).unwrap();
        assert!(h.value >= 1.0 / 3.0);
        assert!(h.value >= alpha_homogeneity(&s).unwrap().h_star);

        let big = sample(vec![x; 7]);
        assert!(exact_homogeneity(&big).unwrap_err().is_guard());
    }

    #[test]
    fn selection_prefers_stable_k() {
        let stable = sample(vec![hard(&[0, 0, 1, 1], 2); 3]);
        let unstable = sample(vec![
            hard(&[0, 1, 2, 2], 3),
            hard(&[2, 1, 0, 0], 3),
            hard(&[0, 0, 1, 2], 3),
        ]);
        let mut by_k = BTreeMap::new();
        by_k.insert(2, stable);
        let single = select_clusters(&by_k).unwrap();
        assert_eq!(single.selected, 2);
        by_k.insert(3, unstable);
        let p = select_clusters(&by_k).unwrap();
        assert_eq!(p.selected, 2);
        assert_eq!(p.selected_by_instability, 2);
        for i in 0..p.ks.len() {
            assert_eq!(p.frechet_medoid_k[i], 1.0 - p.h_star_k[i]);
        }
        assert!(p.to_csv().starts_with("k,h_star"));

        by_k.insert(4, sample(vec![hard(&[0, 1, 2, 3, 3], 4)]));
        assert!(select_clusters(&by_k).is_err());
        assert!(select_clusters(&BTreeMap::new()).is_err());
    }

    #[test]
    fn cluster_sizes_are_sorted_and_normalized() {
        let s = sample(vec![hard(&[0, 1, 1, 1], 3), hard(&[2, 2, 0, 0], 3)]);
        assert_eq!(normalized_cluster_sizes(&s), vec![0.625, 0.375, 0.0]);
    }
}

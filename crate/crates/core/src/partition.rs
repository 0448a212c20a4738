//! Partitions as membership matrices modulo row permutation, and the
//! intrinsic distance between them.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};

/// Column sums within this distance of one are accepted unchanged.
pub const COLUMN_SUM_TOL: f64 = 1e-12;
/// Column sums within this distance of one are renormalized; beyond it they are rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// An `l x m` column-stochastic membership matrix representing a partition of
/// `m` points into at most `l` clusters. Any row permutation represents the
/// same partition; no canonical representative is chosen.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    /// Zero-based cluster of each point, present iff the partition is hard.
    labels: Option<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from a row-major `rows x cols` matrix.
    pub fn new(rows: usize, cols: usize, mut entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyPartition);
        }
        if entries.len() != rows * cols {
            return Err(Error::dims(
                format!("{} entries", rows * cols),
                format!("{} entries", entries.len()),
            ));
        }
        if rows > cols {
            return Err(Error::TooManyClusters {
                clusters: rows,
                points: cols,
            });
        }
        for (idx, &value) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::EntryOutOfRange {
                    row: idx / cols,
                    column: idx % cols,
                    value,
                });
            }
        }
        for j in 0..cols {
            let sum: f64 = (0..rows).map(|p| entries[p * cols + j]).sum();
            let deviation = (sum - 1.0).abs();
            if deviation <= COLUMN_SUM_TOL {
                continue;
            }
            if deviation > RENORMALIZE_TOL {
                return Err(Error::ColumnSum { column: j, sum });
            }
            for p in 0..rows {
                let e = &mut entries[p * cols + j];
                *e = (*e / sum).clamp(0.0, 1.0);
            }
        }
        let labels = hard_labels(rows, cols, &entries);
        Ok(Self {
            rows,
            cols,
            entries,
            labels,
        })
    }

    /// Builds a partition from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::dims(format!("{cols} columns"), format!("{} columns", bad.len())));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// One-hot encodes zero-based cluster labels into a hard partition with
    /// `clusters` rows. Clusters that receive no point stay as zero rows.
    pub fn from_labels(labels: &[usize], clusters: usize) -> Result<Self> {
        let cols = labels.len();
        if clusters == 0 || cols == 0 {
            return Err(Error::EmptyPartition);
        }
        if clusters > cols {
            return Err(Error::TooManyClusters {
                clusters,
                points: cols,
            });
        }
        if let Some((point, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= clusters) {
            return Err(Error::LabelOutOfRange {
                point,
                label,
                clusters,
            });
        }
        let mut entries = vec![0.0; clusters * cols];
        for (j, &label) in labels.iter().enumerate() {
            entries[label * cols + j] = 1.0;
        }
        Ok(Self {
            rows: clusters,
            cols,
            entries,
            labels: Some(labels.to_vec()),
        })
    }

    /// Number of clusters `l`, counting empty ones.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of data points `m`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.entries[p * self.cols..(p + 1) * self.cols]
    }

    pub fn get(&self, p: usize, j: usize) -> f64 {
        self.entries[p * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn is_hard(&self) -> bool {
        self.labels.is_some()
    }

    /// Zero-based cluster index of every point, for hard partitions.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Row sums: the (soft) size of every cluster.
    pub fn cluster_sizes(&self) -> Vec<f64> {
        self.entries.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    /// Row-permuted representation: row `p` of the result is row `map(p)` of `self`.
    pub fn permuted(&self, map: &PermutationMap) -> Result<Self> {
        apply_permutation(self, map)
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(())
    }

    /// Entrywise average of equally shaped representations.
    pub(crate) fn average<'a>(parts: impl IntoIterator<Item = &'a Partition>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let first = iter.next().ok_or(Error::EmptySample)?;
        let mut acc = first.entries.clone();
        let mut count = 1usize;
        for part in iter {
            first.check_same_shape(part)?;
            for (a, b) in acc.iter_mut().zip(&part.entries) {
                *a += b;
            }
            count += 1;
        }
        let scale = count as f64;
        acc.iter_mut().for_each(|a| *a /= scale);
        Self::new(first.rows, first.cols, acc)
    }
}

fn hard_labels(rows: usize, cols: usize, entries: &[f64]) -> Option<Vec<usize>> {
    if entries.iter().any(|&e| e != 0.0 && e != 1.0) {
        return None;
    }
    (0..cols)
        .map(|j| (0..rows).find(|&p| entries[p * cols + j] == 1.0))
        .collect()
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Partition")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("entries", &self.to_rows())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<f64>>,
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        Self {
            rows: p.rows,
            cols: p.cols,
            entries: p.to_rows(),
        }
    }
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(repr: PartitionRepr) -> Result<Self> {
        let part = Partition::from_rows(&repr.entries)?;
        if part.rows != repr.rows || part.cols != repr.cols {
            return Err(Error::dims(
                format!("{}x{}", repr.rows, repr.cols),
                format!("{}x{}", part.rows, part.cols),
            ));
        }
        Ok(part)
    }
}

/// A bijection on the cluster indices `0..l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PermutationMap {
    image: Vec<usize>,
}

impl PermutationMap {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidConfig(format!("{image:?} is not a permutation")));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    /// Swaps `p` and `q`, fixing everything else.
    pub fn transposition(n: usize, p: usize, q: usize) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(p, q);
        Self { image }
    }

    /// All permutations of `0..n` in lexicographic order of their images.
    pub fn all(n: usize) -> impl Iterator<Item = PermutationMap> {
        (0..n).permutations(n).map(|image| Self { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, p: usize) -> usize {
        self.image[p]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "permutation sizes differ");
        Self {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0; self.len()];
        for (i, &p) in self.image.iter().enumerate() {
            image[p] = i;
        }
        Self { image }
    }
}

impl TryFrom<Vec<usize>> for PermutationMap {
    type Error = Error;

    fn try_from(image: Vec<usize>) -> Result<Self> {
        Self::new(image)
    }
}

impl From<PermutationMap> for Vec<usize> {
    fn from(map: PermutationMap) -> Self {
        map.image
    }
}

/// Row `p` of the output is row `map(p)` of `x`.
pub fn apply_permutation(x: &Partition, map: &PermutationMap) -> Result<Partition> {
    if map.len() != x.rows {
        return Err(Error::dims(
            format!("permutation of {}", x.rows),
            format!("permutation of {}", map.len()),
        ));
    }
    let mut entries = Vec::with_capacity(x.entries.len());
    for &src in &map.image {
        entries.extend_from_slice(x.row(src));
    }
    let labels = x.labels.as_ref().map(|labels| {
        let inv = map.inverse();
        labels.iter().map(|&l| inv.image[l]).collect()
    });
    Ok(Partition {
        rows: x.rows,
        cols: x.cols,
        entries,
        labels,
    })
}

/// Frobenius norm of `x - y` for two fixed representations.
pub fn frobenius_distance(x: &Partition, y: &Partition) -> Result<f64> {
    x.check_same_shape(y)?;
    Ok(squared_frobenius(&x.entries, &y.entries).sqrt())
}

pub(crate) fn squared_frobenius(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The optimal permutation of `y` against `x` and the resulting distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// Apply to `y` to put it in optimal position with `x`.
    pub map: PermutationMap,
    /// `delta(x, y)^2`.
    pub distance_sq: f64,
}

impl Alignment {
    pub fn distance(&self) -> f64 {
        self.distance_sq.sqrt()
    }
}

/// Finds the row permutation `P` minimizing `||x - P y||`, breaking cost ties
/// by the lexicographically smallest image.
pub fn optimal_alignment(x: &Partition, y: &Partition) -> Result<Alignment> {
    x.check_same_shape(y)?;
    let l = x.rows;
    let cost = row_cost_matrix(x, y);
    let image = assignment::solve(&cost, l);
    let distance_sq = image.iter().enumerate().map(|(p, &q)| cost[p * l + q]).sum();
    Ok(Alignment {
        map: PermutationMap { image },
        distance_sq,
    })
}

/// Intrinsic distance between two partitions.
pub fn delta(x: &Partition, y: &Partition) -> Result<f64> {
    optimal_alignment(x, y).map(|a| a.distance())
}

/// `C[p][q] = ||row_p(x) - row_q(y)||^2`, row-major.
fn row_cost_matrix(x: &Partition, y: &Partition) -> Vec<f64> {
    let l = x.rows;
    match (&x.labels, &y.labels) {
        (Some(a), Some(b)) => {
            // Disjoint indicator rows: |A_p| + |B_q| - 2|A_p ∩ B_q|, exact in f64.
            let mut overlap = vec![0u64; l * l];
            let mut size_a = vec![0u64; l];
            let mut size_b = vec![0u64; l];
            for (&p, &q) in a.iter().zip(b) {
                overlap[p * l + q] += 1;
                size_a[p] += 1;
                size_b[q] += 1;
            }
            (0..l * l)
                .map(|idx| {
                    let (p, q) = (idx / l, idx % l);
                    (size_a[p] + size_b[q] - 2 * overlap[idx]) as f64
                })
                .collect()
        }
        _ => {
            let mut cost = Vec::with_capacity(l * l);
            for p in 0..l {
                for q in 0..l {
                    cost.push(squared_frobenius(x.row(p), y.row(q)));
                }
            }
            cost
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hard(labels: &[usize], l: usize) -> Partition {
        Partition::from_labels(labels, l).unwrap()
    }

    #[test]
    fn one_hot_encoding() {
        let x = hard(&[0, 0, 1], 2);
        assert_eq!(x.to_rows(), vec![vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert!(x.is_hard());
    }

    #[test]
    fn empty_cluster_is_a_zero_row() {
        let x = hard(&[0, 0, 0], 2);
        assert_eq!(x.to_rows(), vec![vec![1.0; 3], vec![0.0; 3]]);
        assert_eq!(x.cluster_sizes(), vec![3.0, 0.0]);
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        assert!(matches!(
            Partition::from_labels(&[0, 2, 1], 2),
            Err(Error::LabelOutOfRange { point: 1, label: 2, .. })
        ));
    }

    #[test]
    fn more_clusters_than_points_is_rejected() {
        assert!(matches!(
            Partition::from_labels(&[0, 1], 3),
            Err(Error::TooManyClusters { .. })
        ));
        assert!(matches!(
            Partition::from_rows(&[vec![1.0], vec![0.0]]),
            Err(Error::TooManyClusters { .. })
        ));
    }

    #[test]
    fn column_sums_are_checked() {
        let bad = Partition::from_rows(&[vec![0.5, 1.0], vec![0.4, 0.0]]);
        assert!(matches!(bad, Err(Error::ColumnSum { column: 0, .. })));

        let noisy = Partition::from_rows(&[vec![0.5 + 1e-10, 1.0], vec![0.5, 0.0]]).unwrap();
        let sum = noisy.get(0, 0) + noisy.get(1, 0);
        assert!((sum - 1.0).abs() <= COLUMN_SUM_TOL);

        let out = Partition::from_rows(&[vec![1.5, 1.0], vec![-0.5, 0.0]]);
        assert!(matches!(out, Err(Error::EntryOutOfRange { .. })));
    }

    #[test]
    fn soft_matrix_with_binary_entries_is_hard() {
        let x = Partition::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(x.labels(), Some(&[1, 0][..]));
        let y = Partition::from_rows(&[vec![0.5, 1.0], vec![0.5, 0.0]]).unwrap();
        assert!(!y.is_hard());
    }

    #[test]
    fn permutation_action() {
        let x = hard(&[0, 0, 1], 2);
        assert_eq!(x.permuted(&PermutationMap::identity(2)).unwrap(), x);
        let swap = PermutationMap::transposition(2, 0, 1);
        let y = x.permuted(&swap).unwrap();
        assert_eq!(y.to_rows(), vec![vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        assert_eq!(y.labels(), Some(&[1, 1, 0][..]));
        assert_eq!(y.permuted(&swap.inverse()).unwrap(), x);
    }

    #[test]
    fn permutation_group_laws() {
        let p = PermutationMap::new(vec![2, 0, 1]).unwrap();
        let q = PermutationMap::new(vec![1, 0, 2]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert_eq!(p.compose(&q).apply(0), p.apply(q.apply(0)));
        assert!(PermutationMap::new(vec![0, 0, 1]).is_err());
        assert_eq!(PermutationMap::all(3).count(), 6);
    }

    #[test]
    fn frobenius_examples() {
        let x = hard(&[0, 0, 1], 2);
        let y = hard(&[0, 1, 1], 2);
        assert_eq!(frobenius_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(frobenius_distance(&x, &y).unwrap(), 2f64.sqrt());
        let z = hard(&[1, 1, 0, 0, 1], 2);
        let w = hard(&[0, 1, 1, 0, 0], 2);
        // three disagreeing columns
        assert_eq!(frobenius_distance(&z, &w).unwrap(), 6f64.sqrt());
        assert!(frobenius_distance(&x, &hard(&[0, 1], 2)).is_err());
    }

    #[test]
    fn alignment_prefers_identity_for_one_disagreement() {
        let x = hard(&[0, 0, 1], 2);
        let y = hard(&[0, 1, 1], 2);
        let a = optimal_alignment(&x, &y).unwrap();
        assert!(a.map.is_identity());
        assert_eq!(a.distance(), 2f64.sqrt());
        let swapped = y.permuted(&PermutationMap::transposition(2, 0, 1)).unwrap();
        assert_eq!(frobenius_distance(&x, &swapped).unwrap(), 2.0);
    }

    #[test]
    fn same_orbit_has_zero_distance() {
        let x = Partition::from_rows(&[
            vec![0.2, 1.0, 0.0, 0.3],
            vec![0.5, 0.0, 0.0, 0.3],
            vec![0.3, 0.0, 1.0, 0.4],
        ])
        .unwrap();
        for map in PermutationMap::all(3) {
            let y = x.permuted(&map).unwrap();
            let a = optimal_alignment(&x, &y).unwrap();
            assert_eq!(a.distance_sq, 0.0);
            assert_eq!(y.permuted(&a.map).unwrap(), x);
        }
    }

    #[test]
    fn serde_roundtrip_revalidates() {
        let x = Partition::from_rows(&[vec![0.25, 1.0], vec![0.75, 0.0]]).unwrap();
        let json = serde_json::to_string(&x).unwrap();
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        let bad = r#"{"rows":2,"cols":1,"entries":[[0.5],[0.6]]}"#;
        assert!(serde_json::from_str::<Partition>(bad).is_err());
    }
}

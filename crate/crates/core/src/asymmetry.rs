//! Degree of asymmetry of a partition and membership in its asymmetry ball.
//!
//! The degree of asymmetry is the smallest distance between a representation
//! and any non-trivial row permutation of it. It is attained by a
//! transposition, so it reduces to the closest pair of rows:
//! `alpha = min_{p<q} sqrt(2) * ||z_p - z_q||`. For hard partitions the rows
//! are disjoint indicators and `alpha = sqrt(2 (m1 + m2))` with `m1 <= m2` the
//! two smallest cluster sizes.
//!
//! The ball of radius `alpha / 4` around a partition is a region in which
//! the orbit space looks Euclidean; samples inside it have a unique mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{optimal_alignment, squared_frobenius, Partition};

/// Rows closer than this (in squared distance) count as identical clusters.
pub const IDENTICAL_ROWS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymmetryProfile {
    pub alpha: f64,
    pub is_asymmetric: bool,
    /// Zero-based rows attaining the minimum row distance.
    pub pair_p: usize,
    pub pair_q: usize,
    /// `alpha / 4`.
    pub ball_radius: f64,
    /// `alpha^2`, exact for hard partitions. Used for boundary-exact ball tests.
    #[serde(skip)]
    pub(crate) alpha_sq: f64,
}

impl AsymmetryProfile {
    fn from_min_row_distance(min_sq: f64, pair_p: usize, pair_q: usize) -> Self {
        // Within the tolerance the rows are the same cluster: symmetric.
        let min_sq = if min_sq <= IDENTICAL_ROWS_TOL { 0.0 } else { min_sq };
        let alpha_sq = 2.0 * min_sq;
        let alpha = alpha_sq.sqrt();
        Self {
            alpha,
            is_asymmetric: alpha > 0.0,
            pair_p,
            pair_q,
            ball_radius: alpha / 4.0,
            alpha_sq,
        }
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_sq
    }
}

/// Degree of asymmetry from the closest pair of rows. Ties go to the
/// lexicographically smallest `(p, q)`. A single-cluster partition has no
/// non-trivial permutation and is reported symmetric with pair `(0, 0)`.
pub fn alpha_general(z: &Partition) -> AsymmetryProfile {
    let l = z.rows();
    if l < 2 {
        return AsymmetryProfile::from_min_row_distance(0.0, 0, 0);
    }
    if let Some(sizes) = hard_sizes(z) {
        // For disjoint indicator rows the squared distance is |A_p| + |A_q|.
        let mut best = (u64::MAX, 0, 1);
        for p in 0..l {
            for q in p + 1..l {
                let d = sizes[p] + sizes[q];
                if d < best.0 {
                    best = (d, p, q);
                }
            }
        }
        return AsymmetryProfile::from_min_row_distance(best.0 as f64, best.1, best.2);
    }
    let mut best = (f64::INFINITY, 0, 1);
    for p in 0..l {
        for q in p + 1..l {
            let d = squared_frobenius(z.row(p), z.row(q));
            if d < best.0 {
                best = (d, p, q);
            }
        }
    }
    AsymmetryProfile::from_min_row_distance(best.0, best.1, best.2)
}

/// `sqrt(2 (m1 + m2))` from the two smallest cluster sizes of a hard partition.
pub fn alpha_hard(z: &Partition) -> Result<f64> {
    let mut sizes = hard_sizes(z).ok_or(Error::NotHard)?;
    if sizes.len() < 2 {
        return Ok(0.0);
    }
    sizes.sort_unstable();
    Ok((2.0 * (sizes[0] + sizes[1]) as f64).sqrt())
}

fn hard_sizes(z: &Partition) -> Option<Vec<u64>> {
    let labels = z.labels()?;
    let mut sizes = vec![0u64; z.rows()];
    for &l in labels {
        sizes[l] += 1;
    }
    Some(sizes)
}

/// Range of the degree of asymmetry over asymmetric hard partitions of `m`
/// points into `l` clusters: `(sqrt 2, 2 sqrt(ceil(m / l)))`.
pub fn alpha_bounds(m: usize, l: usize) -> Result<(f64, f64)> {
    if l == 0 || l > m {
        return Err(Error::InvalidConfig(format!("need 1 <= l <= m, got l={l}, m={m}")));
    }
    Ok((2f64.sqrt(), 2.0 * (m.div_ceil(l) as f64).sqrt()))
}

/// Closed ball (`<=`, the default) or its interior (`<`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallBoundary {
    #[default]
    Closed,
    Open,
}

/// Whether `probe` lies within `alpha(center) / 4` of `center`.
pub fn in_asymmetry_ball(center: &Partition, probe: &Partition) -> Result<bool> {
    in_asymmetry_ball_with(center, probe, BallBoundary::Closed)
}

pub fn in_asymmetry_ball_with(
    center: &Partition,
    probe: &Partition,
    boundary: BallBoundary,
) -> Result<bool> {
    let profile = alpha_general(center);
    let distance_sq = optimal_alignment(center, probe)?.distance_sq;
    Ok(ball_contains(&profile, distance_sq, boundary))
}

/// Compares squared quantities: `16 delta^2` against `alpha^2`. Both sides are
/// exact integers for hard partitions, so boundary cases are decided exactly.
pub(crate) fn ball_contains(center: &AsymmetryProfile, distance_sq: f64, boundary: BallBoundary) -> bool {
    let lhs = 16.0 * distance_sq;
    match boundary {
        BallBoundary::Closed => lhs <= center.alpha_sq,
        BallBoundary::Open => lhs < center.alpha_sq,
    }
}

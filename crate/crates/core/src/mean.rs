//! Mean partitions: the alternating align-and-average solver, the exhaustive
//! mean-set oracle for tiny samples, and the distance bound between two means.
//!
//! Every mean representation is the entrywise average of sample
//! representations in optimal position with it. Fixing the alignment of each
//! member turns the Fréchet function into a Euclidean least-squares problem
//! minimized by that average, so the solver alternates between aligning all
//! members to the current estimate and re-averaging. Both half-steps are exact
//! minimizations and the Fréchet value never increases.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frechet::{frechet_value, mean, Distance, EnsembleSample, PairwiseDistances};
use crate::partition::{
    apply_permutation, delta, frobenius_distance, optimal_alignment, squared_frobenius, Partition,
    PermutationMap,
};

/// Members of a mean set closer than this are the same partition.
pub const MEAN_DEDUP_TOL: f64 = 1e-9;
/// Alignment tuples whose Fréchet values differ by less than this tie.
pub const MEAN_VALUE_TOL: f64 = 1e-10;
/// Upper limit on the number of alignment tuples (or label vectors) enumerated.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanInit {
    /// Medoid under the squared intrinsic distance.
    #[default]
    Medoid,
    SampleMember(usize),
    Partition(Partition),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanOptions {
    pub init: MeanInit,
    /// Stop once an iteration lowers the Fréchet value by less than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MeanOptions {
    fn default() -> Self {
        Self {
            init: MeanInit::Medoid,
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanResult {
    pub mean: Partition,
    /// Fréchet value at `mean` (the variation when `mean` is a global minimizer).
    pub value: f64,
    /// Number of averaging steps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Alignment of every sample member against `mean`.
    pub alignments: Vec<PermutationMap>,
    /// Fréchet value of every visited estimate, starting with the initial one.
    pub trace: Vec<f64>,
}

/// Alternating align-and-average descent from a single starting point.
pub fn mean_partition(sample: &EnsembleSample, options: &MeanOptions) -> Result<MeanResult> {
    if !(options.tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", options.tol)));
    }
    let mut current = match &options.init {
        MeanInit::Medoid => {
            let m = PairwiseDistances::compute(sample)?.medoid(Distance::DeltaSquared);
            sample.get(m.index).clone()
        }
        MeanInit::SampleMember(i) => sample
            .partitions()
            .get(*i)
            .cloned()
            .ok_or_else(|| Error::InvalidConfig(format!("no sample member {i}")))?,
        MeanInit::Partition(p) => {
            sample.get(0).check_same_shape(p)?;
            p.clone()
        }
    };

    let mut trace = Vec::new();
    let mut previous: Option<Vec<PermutationMap>> = None;
    let mut iterations = 0;
    loop {
        let alignments = sample.align_to(&current)?;
        let value = mean(alignments.iter().map(|a| a.distance_sq));
        let maps: Vec<PermutationMap> = alignments.into_iter().map(|a| a.map).collect();

        let repeated = previous.as_ref() == Some(&maps);
        let stalled = trace.last().is_some_and(|&last: &f64| last - value < options.tol);
        trace.push(value);
        if repeated || stalled || iterations == options.max_iter {
            return Ok(MeanResult {
                mean: current,
                value,
                iterations,
                converged: repeated || stalled,
                alignments: maps,
                trace,
            });
        }

        current = average_aligned(sample, &maps)?;
        previous = Some(maps);
        iterations += 1;
    }
}

/// Runs the solver from every sample member and keeps the lowest value
/// (smallest starting index on ties).
pub fn multi_start_mean(sample: &EnsembleSample, options: &MeanOptions) -> Result<MeanResult> {
    let runs: Vec<MeanResult> = (0..sample.len())
        .into_par_iter()
        .map(|i| {
            let opts = MeanOptions {
                init: MeanInit::SampleMember(i),
                ..options.clone()
            };
            mean_partition(sample, &opts)
        })
        .collect::<Result<_>>()?;
    let mut best: Option<MeanResult> = None;
    for run in runs {
        if best.as_ref().map_or(true, |b| run.value < b.value) {
            best = Some(run);
        }
    }
    best.ok_or(Error::EmptySample)
}

fn average_aligned(sample: &EnsembleSample, maps: &[PermutationMap]) -> Result<Partition> {
    let aligned = sample
        .iter()
        .zip(maps)
        .map(|(x, map)| apply_permutation(x, map))
        .collect::<Result<Vec<_>>>()?;
    Partition::average(&aligned)
}

/// The exact set of mean partitions of a tiny sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSet {
    /// Pairwise more than `MEAN_DEDUP_TOL` apart.
    pub minimizers: Vec<Partition>,
    pub value: f64,
}

impl MeanSet {
    pub fn is_unique(&self) -> bool {
        self.minimizers.len() == 1
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn checked_power(base: u128, exp: usize, what: &'static str) -> Result<u128> {
    let mut count: u128 = 1;
    for _ in 0..exp {
        count = count.saturating_mul(base);
        if count > ENUMERATION_LIMIT {
            return Err(Error::GuardExceeded {
                what,
                count,
                limit: ENUMERATION_LIMIT,
            });
        }
    }
    Ok(count)
}

/// Enumerates every alignment tuple of the sample. For a fixed tuple the
/// Fréchet function is minimized by the average, so the global minimum is the
/// smallest tuple value and the means are the averages attaining it. The first
/// member is held fixed; permuting all members together only permutes the rows
/// of the average.
pub fn exact_mean_set(sample: &EnsembleSample) -> Result<MeanSet> {
    let n = sample.len();
    let l = sample.rows();
    checked_power(factorial(l), n, "alignment tuples")?;

    let perms: Vec<PermutationMap> = PermutationMap::all(l).collect();
    // representations[i][k]: member i permuted by perms[k]
    let representations: Vec<Vec<Vec<f64>>> = sample
        .iter()
        .map(|x| {
            perms
                .iter()
                .map(|p| apply_permutation(x, p).map(|r| r.entries().to_vec()))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let base = perms.len();
    let count = base.pow(n as u32 - 1);
    let size = sample.get(0).entries().len();
    let average = |index: usize| -> (f64, Vec<f64>) {
        let tuple = digits(index, base, n - 1);
        let members = std::iter::once(&representations[0][0])
            .chain(tuple.iter().enumerate().map(|(i, &k)| &representations[i + 1][k]));
        let mut avg = vec![0.0; size];
        for rep in members.clone() {
            for (a, v) in avg.iter_mut().zip(rep) {
                *a += v;
            }
        }
        avg.iter_mut().for_each(|a| *a /= n as f64);
        let value = mean(members.map(|rep| squared_frobenius(rep, &avg)));
        (value, avg)
    };

    let values: Vec<f64> = (0..count).into_par_iter().map(|i| average(i).0).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut minimizers: Vec<Partition> = Vec::new();
    for (index, &value) in values.iter().enumerate() {
        if value > best + MEAN_VALUE_TOL {
            continue;
        }
        let candidate = Partition::new(l, sample.cols(), average(index).1)?;
        let mut duplicate = false;
        for m in &minimizers {
            if delta(m, &candidate)? <= MEAN_DEDUP_TOL {
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            minimizers.push(candidate);
        }
    }
    Ok(MeanSet {
        minimizers,
        value: best,
    })
}

/// Base-`base` digits of `index`, most significant first.
fn digits(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0usize; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// Best hard partition by exhaustive search over all `l^m` label vectors.
/// Returns the first minimizer in lexicographic label order and its value.
pub fn exact_hard_mean(sample: &EnsembleSample) -> Result<(Partition, f64)> {
    let l = sample.rows();
    let m = sample.cols();
    checked_power(l as u128, m, "label vectors")?;
    let count = l.pow(m as u32);
    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| frechet_value(sample, &Partition::from_labels(&digits(i, l, m), l)?))
        .collect::<Result<_>>()?;
    let (best, value) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    Ok((Partition::from_labels(&digits(best, l, m), l)?, value))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanGap {
    /// `(1/n) sum_{j in J} ||X_j - X_j'||`.
    pub bound: f64,
    /// `delta(M, M')`.
    pub distance: f64,
    /// Members whose optimal representation differs between the two means.
    pub differing: Vec<usize>,
}

/// Bounds the distance between two (candidate) means by the members whose
/// optimal positions relative to them differ, and checks `delta <= bound`.
pub fn mean_gap_bound(sample: &EnsembleSample, m: &Partition, m_prime: &Partition) -> Result<MeanGap> {
    sample.get(0).check_same_shape(m)?;
    sample.get(0).check_same_shape(m_prime)?;
    let to_m = optimal_alignment(m, m_prime)?;
    let m_prime = apply_permutation(m_prime, &to_m.map)?;
    let distance = to_m.distance();

    let mut differing = Vec::new();
    let mut total = 0.0;
    for (j, x) in sample.iter().enumerate() {
        let a = apply_permutation(x, &optimal_alignment(m, x)?.map)?;
        let b = apply_permutation(x, &optimal_alignment(&m_prime, x)?.map)?;
        if a != b {
            total += frobenius_distance(&a, &b)?;
            differing.push(j);
        }
    }
    let bound = total / sample.len() as f64;

    if differing.is_empty() && distance > MEAN_DEDUP_TOL {
        return Err(Error::Internal(format!(
            "means are {distance} apart but every member has the same optimal position"
        )));
    }
    if distance > bound + MEAN_DEDUP_TOL {
        return Err(Error::Internal(format!(
            "distance {distance} between means exceeds the bound {bound}"
        )));
    }
    Ok(MeanGap {
        bound,
        distance,
        differing,
    })
}

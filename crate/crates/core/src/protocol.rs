//! The repeated-ensemble experiment: draw a dataset, cluster it `n` times,
//! record h*, repeat for every trial and every value of one swept parameter.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate, Dataset, GeneratorConfig, GeneratorKind};
use crate::error::{Error, Result};
use crate::homogeneity::{alpha_homogeneity, normalized_cluster_sizes, select_clusters, StabilityProfile};
use crate::kmeans::{ensemble, KMeansConfig, KMeansInit};
use crate::kv;
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    K,
    Sigma,
    #[serde(rename = "m_c")]
    Mc,
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Ok(Self::K),
            "sigma" => Ok(Self::Sigma),
            "m_c" | "mc" => Ok(Self::Mc),
            other => Err(Error::InvalidConfig(format!("unknown sweep variable {other:?}"))),
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::K => "k",
            Self::Sigma => "sigma",
            Self::Mc => "m_c",
        })
    }
}

/// Run sizes: `desk` finishes in minutes, `paper` uses the full counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Desk,
    Paper,
}

impl Profile {
    pub fn trials(self) -> usize {
        match self {
            Self::Desk => 20,
            Self::Paper => 100,
        }
    }

    pub fn ensemble_size(self) -> usize {
        match self {
            Self::Desk => 50,
            Self::Paper => 100,
        }
    }

    pub fn points_per_component(self) -> usize {
        match self {
            Self::Desk => 25,
            Self::Paper => 50,
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "paper" => Ok(Self::Paper),
            other => Err(Error::InvalidConfig(format!("unknown profile {other:?}"))),
        }
    }
}

/// Where the points come from. A fixed dataset is reused by every trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSpec {
    Generator(GeneratorConfig),
    Fixed {
        name: String,
        points: usize,
        dim: usize,
        #[serde(skip)]
        data: Option<Arc<Dataset>>,
    },
}

impl DatasetSpec {
    pub fn fixed(data: Dataset) -> Self {
        Self::Fixed {
            name: data.name.clone(),
            points: data.len(),
            dim: data.dim(),
            data: Some(Arc::new(data)),
        }
    }

    /// The dataset for one trial. Generated data are reseeded with `seed`.
    pub fn materialize(&self, seed: u64) -> Result<Arc<Dataset>> {
        match self {
            Self::Generator(g) => Ok(Arc::new(generate(&GeneratorConfig { seed, ..*g })?)),
            Self::Fixed { data, name, .. } => data
                .clone()
                .ok_or_else(|| Error::InvalidConfig(format!("dataset {name:?} is not loaded"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Cluster count when `k` is not the swept variable.
    pub k: usize,
    /// Ensemble size.
    pub n: usize,
    pub trials: usize,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub seed: u64,
    pub init: KMeansInit,
    pub max_iter: usize,
}

impl ExperimentConfig {
    /// Sweep of `k` with the profile's trial count and ensemble size. The
    /// dataset is used as given.
    pub fn new(dataset: DatasetSpec, profile: Profile) -> Self {
        Self {
            dataset,
            k: 2,
            n: profile.ensemble_size(),
            trials: profile.trials(),
            sweep: SweepVar::K,
            values: vec![2.0],
            seed: 0,
            init: KMeansInit::default(),
            max_iter: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.values.is_empty() {
            return bad("sweep values must not be empty".into());
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return bad(format!("sweep values must be strictly increasing: {:?}", self.values));
        }
        if self.trials == 0 || self.n == 0 || self.max_iter == 0 {
            return bad("trials, n and max_iter must be positive".into());
        }
        match self.sweep {
            SweepVar::K | SweepVar::Mc => {
                if let Some(v) = self.values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
                    return bad(format!("{} values must be positive integers, got {v}", self.sweep));
                }
            }
            SweepVar::Sigma => {
                if let Some(v) = self.values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return bad(format!("sigma values must be finite and >= 0, got {v}"));
                }
            }
        }
        if self.sweep != SweepVar::K && self.k == 0 {
            return bad("k must be positive".into());
        }
        if self.sweep != SweepVar::K && matches!(self.dataset, DatasetSpec::Fixed { .. }) {
            return bad(format!("cannot sweep {} over a fixed dataset", self.sweep));
        }
        Ok(())
    }

    /// Reads a `key = value` config. Keys: `profile` (applied first), `kind`,
    /// `sigma`, `m_c`, `k`, `n`, `trials`, `sweep`, `values`, `seed`, `init`,
    /// `max_iter`. `values` is a comma list or an inclusive integer range `a..b`.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let entries = kv::parse(text)?;
        let find = |key: &str| entries.iter().find(|e| e.key == key);
        let profile = find("profile").map(|e| e.parse::<Profile>()).transpose()?.unwrap_or_default();
        let kind = find("kind")
            .ok_or_else(|| Error::InvalidConfig("missing `kind`".into()))?
            .parse::<GeneratorKind>()?;
        let generator = GeneratorConfig {
            m_c: profile.points_per_component(),
            ..GeneratorConfig::new(kind)
        };
        let mut config = Self::new(DatasetSpec::Generator(generator), profile);
        for e in &entries {
            let DatasetSpec::Generator(g) = &mut config.dataset else {
                unreachable!()
            };
            match e.key {
                "profile" | "kind" => {}
                "sigma" => g.sigma = e.parse()?,
                "m_c" | "mc" => g.m_c = e.parse()?,
                "k" => config.k = e.parse()?,
                "n" => config.n = e.parse()?,
                "trials" => config.trials = e.parse()?,
                "sweep" => config.sweep = e.parse()?,
                "values" => {
                    config.values = parse_values(e.value).map_err(|message| Error::Parse { line: e.line, message })?
                }
                "seed" => config.seed = e.parse()?,
                "init" => config.init = e.parse()?,
                "max_iter" => config.max_iter = e.parse()?,
                _ => return Err(e.unknown()),
            }
        }
        config.validate()?;
        Ok(config)
    }

    fn trial_setup(&self, value: f64) -> (DatasetSpec, usize) {
        let mut dataset = self.dataset.clone();
        let mut k = self.k;
        match (self.sweep, &mut dataset) {
            (SweepVar::K, _) => k = value as usize,
            (SweepVar::Sigma, DatasetSpec::Generator(g)) => g.sigma = value,
            (SweepVar::Mc, DatasetSpec::Generator(g)) => g.m_c = value as usize,
            _ => {}
        }
        (dataset, k)
    }
}

/// Parses `2,3,5` or `2..10`.
pub fn parse_values(text: &str) -> std::result::Result<Vec<f64>, String> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("values: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("values: {e}"))?;
        return Ok((a..=b).map(|v| v as f64).collect());
    }
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("values: {v:?}: {e}")))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub value: f64,
    pub mean_h_star: f64,
    /// Sample standard deviation over trials; 0 for a single trial.
    pub std_h_star: f64,
    pub h_star_trials: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub runtime_secs: f64,
    /// Set when a sweep value failed; `rows` then holds the values before it.
    pub failure: Option<String>,
}

impl ExperimentReport {
    fn format_value(&self, v: f64) -> String {
        match self.config.sweep {
            SweepVar::Sigma => format!("{v}"),
            _ => format!("{}", v as u64),
        }
    }

    /// One row per sweep value. Contains nothing run-dependent besides the
    /// results, so equal seeds give equal bytes.
    pub fn to_csv(&self) -> String {
        let var = self.config.sweep;
        let mut out = format!(
            "# columns: {var}=swept value; mean_h_star=mean of h* over trials; \
             std_h_star=sample standard deviation of h* over trials; trials=completed trials\n\
             {var},mean_h_star,std_h_star,trials\n"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.format_value(row.value),
                row.mean_h_star,
                row.std_h_star,
                row.h_star_trials.len()
            );
        }
        if let Some(f) = &self.failure {
            let _ = writeln!(out, "# failure: {}", f.replace('\n', " "));
        }
        out
    }

    /// Long format: one line per trial.
    pub fn trials_csv(&self) -> String {
        let var = self.config.sweep;
        let mut out = format!("# columns: {var}=swept value; trial=trial index; h_star=h* of the trial\n{var},trial,h_star\n");
        for row in &self.rows {
            for (t, h) in row.h_star_trials.iter().enumerate() {
                let _ = writeln!(out, "{},{t},{h}", self.format_value(row.value));
            }
        }
        out
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// h* of one trial: fresh data (if generated), an ensemble of `n` runs.
fn run_trial(config: &ExperimentConfig, value_index: usize, value: f64, trial: usize) -> Result<f64> {
    let (dataset, k) = config.trial_setup(value);
    let data = dataset.materialize(derive_seed(config.seed, &[0, trial as u64]))?;
    let km = KMeansConfig {
        k,
        max_iter: config.max_iter,
        seed: derive_seed(config.seed, &[1, value_index as u64, trial as u64]),
        init: config.init,
    };
    Ok(alpha_homogeneity(&ensemble(&data, &km, config.n)?)?.h_star)
}

/// Runs every trial of every sweep value. Trial `t` of every value uses the
/// same data seed, so sweeps over `k` compare clusterings of the same points.
/// An error stops the sweep and is recorded in the report.
pub fn run_protocol(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut failure = None;
    for (si, &value) in config.values.iter().enumerate() {
        let trials: Result<Vec<f64>> = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, si, value, t))
            .collect();
        match trials {
            Ok(h) => {
                let (mean_h_star, std_h_star) = mean_std(&h);
                rows.push(ReportRow {
                    value,
                    mean_h_star,
                    std_h_star,
                    h_star_trials: h,
                });
            }
            Err(e) => {
                failure = Some(format!("{} = {value}: {e}", config.sweep));
                break;
            }
        }
    }
    Ok(ExperimentReport {
        config: config.clone(),
        rows,
        runtime_secs: start.elapsed().as_secs_f64(),
        failure,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub profile: StabilityProfile,
    /// Normalized cluster sizes of the ensemble at each k.
    pub cluster_sizes: BTreeMap<usize, Vec<f64>>,
}

impl SelectionReport {
    /// `k,rank,size` lines, rank 1 being the largest cluster.
    pub fn cluster_sizes_csv(&self) -> String {
        let mut out = String::from("# columns: k=cluster count; rank=size rank (1 largest); size=mean cluster size / m\nk,rank,size\n");
        for (k, sizes) in &self.cluster_sizes {
            for (r, s) in sizes.iter().enumerate() {
                let _ = writeln!(out, "{k},{},{s}", r + 1);
            }
        }
        out
    }
}

/// One dataset, one ensemble of `n` runs per candidate k, then selection by
/// maximal α-homogeneity.
pub fn run_selection(
    dataset: &DatasetSpec,
    ks: &[usize],
    n: usize,
    seed: u64,
    init: KMeansInit,
    max_iter: usize,
) -> Result<SelectionReport> {
    if ks.is_empty() {
        return Err(Error::InvalidConfig("no candidate cluster counts".into()));
    }
    let data = dataset.materialize(derive_seed(seed, &[0, 0]))?;
    let samples = ks
        .iter()
        .map(|&k| {
            let km = KMeansConfig {
                k,
                max_iter,
                seed: derive_seed(seed, &[1, k as u64]),
                init,
            };
            Ok((k, ensemble(&data, &km, n)?))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    let cluster_sizes = samples.iter().map(|(&k, s)| (k, normalized_cluster_sizes(s))).collect();
    Ok(SelectionReport {
        profile: select_clusters(&samples)?,
        cluster_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;

    fn g4(sigma: f64) -> DatasetSpec {
        DatasetSpec::Generator(GeneratorConfig {
            sigma,
            ..GeneratorConfig::new(GeneratorKind::G4)
        })
    }

    #[test]
    fn single_trial_singleton_sample() {
        let config = ExperimentConfig {
            trials: 1,
            n: 1,
            values: vec![4.0],
            ..ExperimentConfig::new(g4(0.3), Profile::Desk)
        };
        let r = run_protocol(&config).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].mean_h_star, 1.0);
        assert_eq!(r.rows[0].std_h_star, 0.0);
        assert!(r.failure.is_none());
        assert_eq!(r.to_csv().lines().count(), 3);
    }

    #[test]
    fn validation() {
        let base = ExperimentConfig::new(g4(0.1), Profile::Desk);
        let bad = |c: ExperimentConfig| assert!(c.validate().is_err(), "{c:?}");
        bad(ExperimentConfig { values: vec![], ..base.clone() });
        bad(ExperimentConfig { values: vec![3.0, 2.0], ..base.clone() });
        bad(ExperimentConfig { values: vec![2.0, 2.0], ..base.clone() });
        bad(ExperimentConfig { values: vec![2.5], ..base.clone() });
        bad(ExperimentConfig { trials: 0, ..base.clone() });
        bad(ExperimentConfig {
            sweep: SweepVar::Sigma,
            values: vec![-1.0],
            ..base.clone()
        });
        let data = Dataset::new("d", Provenance::File("d".into()), 1, vec![0.0, 1.0, 2.0]).unwrap();
        bad(ExperimentConfig {
            sweep: SweepVar::Sigma,
            values: vec![0.1],
            ..ExperimentConfig::new(DatasetSpec::fixed(data), Profile::Desk)
        });
        base.validate().unwrap();
    }

    #[test]
    fn failure_keeps_earlier_rows() {
        let data = Dataset::new("d", Provenance::File("d".into()), 1, vec![0.0, 1.0, 2.0]).unwrap();
        let config = ExperimentConfig {
            trials: 2,
            n: 3,
            values: vec![2.0, 3.0, 4.0],
            ..ExperimentConfig::new(DatasetSpec::fixed(data), Profile::Desk)
        };
        let r = run_protocol(&config).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.failure.as_deref().unwrap().starts_with("k = 4"));
        assert!(r.to_csv().ends_with('\n'));
        assert!(r.to_csv().contains("# failure: k = 4"));
    }

    #[test]
    fn kv_config() {
        let c = ExperimentConfig::from_kv_str(
            "profile = paper\nkind = g4\nsigma = 0.05\nsweep = k\nvalues = 2..5\nseed = 9 # trailing\n",
        )
        .unwrap();
        assert_eq!(c.values, vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!((c.trials, c.n, c.seed), (100, 100, 9));
        let DatasetSpec::Generator(g) = c.dataset else { panic!() };
        assert_eq!((g.sigma, g.m_c), (0.05, 50));

        let err = ExperimentConfig::from_kv_str("kind = g4\nbogus = 1\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 2, message: "unknown key \"bogus\"".into() });
        assert!(ExperimentConfig::from_kv_str("sweep = k\n").is_err());
    }

    #[test]
    fn csv_is_reproducible_and_documented() {
        let config = ExperimentConfig {
            trials: 3,
            n: 5,
            sweep: SweepVar::Sigma,
            k: 4,
            values: vec![0.1, 0.5],
            seed: 42,
            ..ExperimentConfig::new(g4(0.0), Profile::Desk)
        };
        let a = run_protocol(&config).unwrap();
        let b = run_protocol(&config).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.trials_csv(), b.trials_csv());
        let csv = a.to_csv();
        assert!(csv.starts_with("# columns: sigma="));
        assert_eq!(csv.lines().nth(1), Some("sigma,mean_h_star,std_h_star,trials"));
        assert!(csv.lines().nth(2).unwrap().starts_with("0.1,"));
        for row in &a.rows {
            assert!(row.mean_h_star >= 1.0 / 5.0 && row.mean_h_star <= 1.0);
        }
    }

    #[test]
    fn selection_single_k() {
        let r = run_selection(&g4(0.05), &[4], 5, 1, KMeansInit::default(), 100).unwrap();
        assert_eq!(r.profile.selected, 4);
        assert_eq!(r.cluster_sizes[&4].len(), 4);
        assert!(r.cluster_sizes_csv().contains("\n4,1,"));
    }
}

//! `partorbit` command-line interface.

mod svg;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use partorbit::{
    alpha_homogeneity, derive_seed, ensemble, exact_mean_set, generate, load_csv, multi_start_mean,
    parse_partition, run_protocol, run_selection, CsvOptions, DatasetSpec, EnsembleSample, ExperimentConfig,
    GeneratorConfig, GeneratorKind, KMeansConfig, KMeansInit, MeanOptions, Partition, Profile, SweepVar,
};

#[derive(Parser)]
#[command(name = "partorbit", version, about = "Homogeneity, means and model selection for clustering ensembles")]
struct Cli {
    /// Base random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run sizes: desk (trials 20, n 50, m_c 25) or paper (100, 100, 50)
    #[arg(long, global = true, value_enum)]
    profile: Option<ProfileArg>,
    /// Output file or directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Paper => Profile::Paper,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Plusplus,
    Forgy,
}

impl From<InitArg> for KMeansInit {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Plusplus => KMeansInit::PlusPlus,
            InitArg::Forgy => KMeansInit::Forgy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset and print it as CSV
    Generate {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Run a k-means ensemble and write one label file per run
    Cluster {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        km: KMeansArgs,
    },
    /// α-homogeneity of label files, directories of them, or a fresh ensemble
    Homogeneity {
        /// Partition files or directories; empty means cluster the dataset
        inputs: Vec<PathBuf>,
        /// Number of clusters for label files without a header
        #[arg(long)]
        clusters: Option<usize>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        km: KMeansArgs,
    },
    /// Mean partition of a sample
    Mean {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        clusters: Option<usize>,
        /// Enumerate every alignment instead of the multi-start descent
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Choose the number of clusters by maximal α-homogeneity
    Select {
        #[command(flatten)]
        data: DataArgs,
        /// Candidate cluster counts, `a..b` or a comma list
        #[arg(long, default_value = "2..10")]
        ks: String,
        #[arg(short, long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
    },
    /// Repeat ensemble runs over trials and a swept parameter
    Protocol {
        /// `key = value` experiment file; flags override it
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        /// Swept variable: k, sigma or m_c
        #[arg(long)]
        sweep: Option<String>,
        /// Sweep values, `a..b` or a comma list
        #[arg(long)]
        values: Option<String>,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(short, long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Generator: ud, g4, g9, u2 or u4
    #[arg(long, conflicts_with = "data")]
    kind: Option<GeneratorKind>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Points per generator component
    #[arg(long = "m-c")]
    m_c: Option<usize>,
    /// `key = value` generator file
    #[arg(long, conflicts_with = "data")]
    generator: Option<PathBuf>,
    /// Numeric CSV file, one point per row
    #[arg(long)]
    data: Option<PathBuf>,
    /// Skip the first CSV line
    #[arg(long)]
    header: bool,
    /// Zero-based CSV column to drop
    #[arg(long)]
    drop_col: Option<usize>,
    /// Z-score every CSV column
    #[arg(long)]
    standardize: bool,
}

#[derive(Args)]
struct KMeansArgs {
    #[arg(short, long, default_value_t = 4)]
    k: usize,
    /// Ensemble size
    #[arg(short, long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<partorbit::Error> for Failure {
    fn from(e: partorbit::Error) -> Self {
        Self {
            code: if e.is_guard() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        input_error(e)
    }
}

fn input_error(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn at(path: &Path) -> impl Fn(partorbit::Error) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let profile: Profile = cli.profile.map(Into::into).unwrap_or_default();
    let seed = cli.seed.unwrap_or(0);
    let ctx = Ctx {
        profile,
        seed,
        out: cli.out.as_deref(),
        format: cli.format,
    };
    match cli.command {
        Command::Generate { data } => cmd_generate(&ctx, &data),
        Command::Cluster { data, km } => cmd_cluster(&ctx, &data, &km),
        Command::Homogeneity {
            inputs,
            clusters,
            data,
            km,
        } => cmd_homogeneity(&ctx, &inputs, clusters, &data, &km),
        Command::Mean {
            inputs,
            clusters,
            exact,
            max_iter,
            tol,
        } => cmd_mean(&ctx, &inputs, clusters, exact, max_iter, tol),
        Command::Select {
            data,
            ks,
            n,
            init,
            max_iter,
        } => {
            let ks = parse_ks(&ks)?;
            let spec = data.spec(profile)?;
            let report = run_selection(
                &spec,
                &ks,
                n.unwrap_or(profile.ensemble_size()),
                seed,
                init.map(Into::into).unwrap_or_default(),
                max_iter,
            )?;
            eprintln!("selected k = {}", report.profile.selected);
            match ctx.out {
                Some(dir) => {
                    create_dir(dir)?;
                    write(&dir.join("profile.csv"), &report.profile.to_csv())?;
                    write(&dir.join("profile.json"), &to_json(&report)?)?;
                    write(&dir.join("cluster_sizes.csv"), &report.cluster_sizes_csv())?;
                    let xs: Vec<f64> = report.profile.ks.iter().map(|&k| k as f64).collect();
                    write(
                        &dir.join("profile.svg"),
                        &svg::line_chart("h* by number of clusters", "k", "h*", &xs, &report.profile.h_star_k),
                    )
                }
                None => match ctx.format {
                    Format::Csv => emit(None, &report.profile.to_csv()),
                    Format::Json => emit(None, &to_json(&report)?),
                },
            }
        }
        Command::Protocol {
            config,
            data,
            sweep,
            values,
            k,
            n,
            trials,
            init,
            max_iter,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::from_kv_str(&read(path)?).map_err(at(path))?,
                None => ExperimentConfig::new(data.spec(profile)?, profile),
            };
            if config.is_some() && data.is_set() {
                cfg.dataset = data.spec(profile)?;
            }
            if let Some(s) = sweep {
                cfg.sweep = s.parse::<SweepVar>()?;
            }
            if let Some(v) = values {
                cfg.values = partorbit::protocol::parse_values(&v).map_err(input_error)?;
            }
            if let Some(k) = k {
                cfg.k = k;
            }
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(i) = init {
                cfg.init = i.into();
            }
            if let Some(m) = max_iter {
                cfg.max_iter = m;
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cmd_protocol(&ctx, &cfg)
        }
    }
}

struct Ctx<'a> {
    profile: Profile,
    seed: u64,
    out: Option<&'a Path>,
    format: Format,
}

impl DataArgs {
    fn is_set(&self) -> bool {
        self.kind.is_some() || self.sigma.is_some() || self.m_c.is_some() || self.generator.is_some() || self.data.is_some()
    }

    fn generator(&self, profile: Profile) -> std::result::Result<GeneratorConfig, Failure> {
        let mut g = match &self.generator {
            Some(path) => GeneratorConfig::from_kv_str(&read(path)?).map_err(at(path))?,
            None => GeneratorConfig {
                m_c: profile.points_per_component(),
                ..GeneratorConfig::new(self.kind.unwrap_or(GeneratorKind::G4))
            },
        };
        if let Some(kind) = self.kind {
            g.kind = kind;
        }
        if let Some(s) = self.sigma {
            g.sigma = s;
        }
        if let Some(m) = self.m_c {
            g.m_c = m;
        }
        Ok(g)
    }

    fn spec(&self, profile: Profile) -> std::result::Result<DatasetSpec, Failure> {
        match &self.data {
            Some(path) => {
                let options = CsvOptions {
                    header: self.header,
                    drop_col: self.drop_col,
                    standardize: self.standardize,
                    ..CsvOptions::default()
                };
                let data = load_csv(path, &options).map_err(at(path))?;
                eprintln!("{}: m = {}, d = {}", path.display(), data.len(), data.dim());
                Ok(DatasetSpec::fixed(data))
            }
            None => Ok(DatasetSpec::Generator(self.generator(profile)?)),
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Outcome {
    fs::create_dir_all(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| input_error(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> std::result::Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn parse_ks(text: &str) -> std::result::Result<Vec<usize>, Failure> {
    let values = partorbit::protocol::parse_values(text).map_err(input_error)?;
    values
        .iter()
        .map(|&v| {
            if v.fract() == 0.0 && v >= 1.0 {
                Ok(v as usize)
            } else {
                Err(input_error(format!("cluster counts must be positive integers, got {v}")))
            }
        })
        .collect()
}

/// Files named directly, plus the non-hidden files of named directories in
/// name order.
fn expand_inputs(inputs: &[PathBuf]) -> std::result::Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for path in inputs {
        let meta = fs::metadata(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        if meta.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| input_error(format!("{}: {e}", path.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
                .collect();
            entries.sort();
            if entries.is_empty() {
                return Err(input_error(format!("{}: directory holds no partition files", path.display())));
            }
            files.extend(entries);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}

fn load_sample(inputs: &[PathBuf], clusters: Option<usize>) -> std::result::Result<EnsembleSample, Failure> {
    let parts = expand_inputs(inputs)?
        .iter()
        .map(|path| parse_partition(&read(path)?, clusters).map_err(at(path)))
        .collect::<std::result::Result<Vec<Partition>, Failure>>()?;
    Ok(EnsembleSample::new(parts)?)
}

fn cluster_ensemble(ctx: &Ctx, data: &DataArgs, km: &KMeansArgs) -> std::result::Result<EnsembleSample, Failure> {
    let dataset = data.spec(ctx.profile)?.materialize(derive_seed(ctx.seed, &[0, 0]))?;
    let config = KMeansConfig {
        k: km.k,
        max_iter: km.max_iter,
        seed: derive_seed(ctx.seed, &[1, km.k as u64]),
        init: km.init.map(Into::into).unwrap_or_default(),
    };
    Ok(ensemble(&dataset, &config, km.n.unwrap_or(ctx.profile.ensemble_size()))?)
}

fn cmd_generate(ctx: &Ctx, data: &DataArgs) -> Outcome {
    let dataset = match &data.data {
        Some(_) => data.spec(ctx.profile)?.materialize(0)?,
        None => generate(&GeneratorConfig {
            seed: ctx.seed,
            ..data.generator(ctx.profile)?
        })?
        .into(),
    };
    match ctx.format {
        Format::Csv => emit(ctx.out, &dataset.to_csv()),
        Format::Json => emit(ctx.out, &to_json(&*dataset)?),
    }
}

fn cmd_cluster(ctx: &Ctx, data: &DataArgs, km: &KMeansArgs) -> Outcome {
    let sample = cluster_ensemble(ctx, data, km)?;
    match ctx.out {
        Some(dir) => {
            create_dir(dir)?;
            let width = sample.len().saturating_sub(1).to_string().len().max(3);
            for (r, part) in sample.iter().enumerate() {
                write(&dir.join(format!("run_{r:0width$}.labels")), &part.to_label_file()?)?;
            }
            eprintln!("wrote {} label files to {}", sample.len(), dir.display());
            Ok(())
        }
        None => {
            let mut text = String::new();
            for part in &sample {
                text.push_str(&part.to_label_line()?);
                text.push('\n');
            }
            emit(None, &text)
        }
    }
}

fn cmd_homogeneity(ctx: &Ctx, inputs: &[PathBuf], clusters: Option<usize>, data: &DataArgs, km: &KMeansArgs) -> Outcome {
    let sample = if inputs.is_empty() {
        cluster_ensemble(ctx, data, km)?
    } else {
        load_sample(inputs, clusters)?
    };
    let report = alpha_homogeneity(&sample)?;
    eprintln!("h* = {}", report.h_star);
    match ctx.format {
        Format::Csv => emit(ctx.out, &report.to_csv()),
        Format::Json => emit(ctx.out, &to_json(&report)?),
    }
}

fn cmd_mean(ctx: &Ctx, inputs: &[PathBuf], clusters: Option<usize>, exact: bool, max_iter: usize, tol: f64) -> Outcome {
    let sample = load_sample(inputs, clusters)?;
    if exact {
        let set = exact_mean_set(&sample)?;
        eprintln!("{} minimizer(s), value {}", set.minimizers.len(), set.value);
        return match ctx.format {
            Format::Csv => emit(
                ctx.out,
                &set.minimizers.iter().map(Partition::to_dense_csv).collect::<Vec<_>>().join("\n"),
            ),
            Format::Json => emit(ctx.out, &to_json(&set)?),
        };
    }
    let options = MeanOptions {
        max_iter,
        tol,
        ..MeanOptions::default()
    };
    let result = multi_start_mean(&sample, &options)?;
    eprintln!("value {} after {} iterations", result.value, result.iterations);
    match ctx.format {
        Format::Csv => emit(ctx.out, &result.mean.to_dense_csv()),
        Format::Json => emit(ctx.out, &to_json(&result)?),
    }
}

fn cmd_protocol(ctx: &Ctx, cfg: &ExperimentConfig) -> Outcome {
    let report = run_protocol(cfg)?;
    match ctx.out {
        Some(dir) => {
            create_dir(dir)?;
            write(&dir.join("report.csv"), &report.to_csv())?;
            write(&dir.join("trials.csv"), &report.trials_csv())?;
            write(&dir.join("report.json"), &to_json(&report)?)?;
            let xs: Vec<f64> = report.rows.iter().map(|r| r.value).collect();
            let ys: Vec<f64> = report.rows.iter().map(|r| r.mean_h_star).collect();
            let sweep = cfg.sweep.to_string();
            write(
                &dir.join("report.svg"),
                &svg::line_chart(&format!("mean h* by {sweep}"), &sweep, "mean h*", &xs, &ys),
            )?;
        }
        None => match ctx.format {
            Format::Csv => emit(None, &report.to_csv())?,
            Format::Json => emit(None, &to_json(&report)?)?,
        },
    }
    for row in &report.rows {
        eprintln!("{} = {}: mean h* {:.4} (sd {:.4})", cfg.sweep, row.value, row.mean_h_star, row.std_h_star);
    }
    match report.failure {
        Some(f) => Err(input_error(format!("protocol stopped early: {f}"))),
        None => Ok(()),
    }
}

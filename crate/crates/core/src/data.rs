//! Point datasets: synthetic generators and numeric CSV ingestion.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv;
use crate::rng::stream_rng;

/// `m` points in `d` dimensions, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub provenance: Provenance,
    dim: usize,
    points: Vec<f64>,
    /// Ground-truth component of every point, for synthetic data.
    components: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic(GeneratorConfig),
    File(String),
}

impl Dataset {
    pub fn new(name: impl Into<String>, provenance: Provenance, dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if points.len() % dim != 0 {
            return Err(Error::dims(format!("multiple of {dim} values"), points.len()));
        }
        if let Some(i) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "non-finite coordinate in point {}",
                i / dim
            )));
        }
        Ok(Self {
            name: name.into(),
            provenance,
            dim,
            points,
            components: None,
        })
    }

    /// Number of points `m`.
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.dim..(j + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn components(&self) -> Option<&[usize]> {
        self.components.as_deref()
    }

    /// One point per line, comma separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.len() {
            let line: Vec<String> = self.point(j).iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// Uniform on the unit square, scaled by sigma.
    #[serde(rename = "UD")]
    Ud,
    /// Four Gaussians at the vertices of the unit square.
    G4,
    /// Nine Gaussians on the lattice {-1, 0, 1}^2.
    G9,
    /// One concave and one convex noisy sine arc.
    U2,
    /// Two copies of U2 side by side.
    U4,
}

impl GeneratorKind {
    pub fn components(self) -> usize {
        match self {
            GeneratorKind::Ud => 1,
            GeneratorKind::G4 | GeneratorKind::U4 => 4,
            GeneratorKind::G9 => 9,
            GeneratorKind::U2 => 2,
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ud" => Ok(Self::Ud),
            "g4" => Ok(Self::G4),
            "g9" => Ok(Self::G9),
            "u2" => Ok(Self::U2),
            "u4" => Ok(Self::U4),
            other => Err(Error::InvalidConfig(format!("unknown dataset kind {other:?}"))),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::Ud => "UD",
            GeneratorKind::G4 => "G4",
            GeneratorKind::G9 => "G9",
            GeneratorKind::U2 => "U2",
            GeneratorKind::U4 => "U4",
        })
    }
}

/// Placement of the U-shaped components. The concave arc is
/// `(t, sin t + noise)` for `t` uniform on `[0, pi]`; the convex arc is
/// `(t + shift_x, shift_y - sin t + noise)`. U4 repeats both at `x + copy_offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UShape {
    pub shift_x: f64,
    pub shift_y: f64,
    pub copy_offset: f64,
}

impl Default for UShape {
    fn default() -> Self {
        Self {
            shift_x: PI / 2.0,
            shift_y: 1.0,
            copy_offset: 2.0 * PI,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    /// Noise standard deviation (scale factor for UD).
    pub sigma: f64,
    /// Points per component.
    pub m_c: usize,
    pub seed: u64,
    pub u_shape: UShape,
}

impl GeneratorConfig {
    pub fn new(kind: GeneratorKind) -> Self {
        Self {
            kind,
            sigma: 0.1,
            m_c: 50,
            seed: 0,
            u_shape: UShape::default(),
        }
    }

    /// Total number of points.
    pub fn points(&self) -> usize {
        self.kind.components() * self.m_c
    }

    /// Reads `kind`, `sigma`, `m_c`, `seed`, `u_shift_x`, `u_shift_y` and
    /// `u_copy_offset` from `key = value` lines. `kind` is required.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let entries = kv::parse(text)?;
        let kind = entries
            .iter()
            .find(|e| e.key == "kind")
            .ok_or_else(|| Error::InvalidConfig("missing `kind`".into()))?
            .parse::<GeneratorKind>()?;
        let mut config = Self::new(kind);
        for e in &entries {
            match e.key {
                "kind" => {}
                "sigma" => config.sigma = e.parse()?,
                "m_c" | "mc" => config.m_c = e.parse()?,
                "seed" => config.seed = e.parse()?,
                "u_shift_x" => config.u_shape.shift_x = e.parse()?,
                "u_shift_y" => config.u_shape.shift_y = e.parse()?,
                "u_copy_offset" => config.u_shape.copy_offset = e.parse()?,
                _ => return Err(e.unknown()),
            }
        }
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if self.m_c == 0 {
            return Err(Error::InvalidConfig("m_c must be positive".into()));
        }
        Ok(())
    }
}

/// Draws a synthetic dataset. Components are emitted in order, `m_c` points
/// each; the same configuration always yields the same points.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, 0);
    let sigma = config.sigma;
    let mut points = Vec::with_capacity(config.points() * 2);
    let mut components = Vec::with_capacity(config.points());
    let noise = |rng: &mut rand_chacha::ChaCha8Rng| sigma * rng.sample::<f64, _>(StandardNormal);

    match config.kind {
        GeneratorKind::Ud => {
            for _ in 0..config.m_c {
                points.push(sigma * rng.random::<f64>());
                points.push(sigma * rng.random::<f64>());
                components.push(0);
            }
        }
        GeneratorKind::G4 | GeneratorKind::G9 => {
            let means: Vec<(f64, f64)> = if config.kind == GeneratorKind::G4 {
                vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
            } else {
                let grid = [-1.0, 0.0, 1.0];
                grid.iter().flat_map(|&x| grid.iter().map(move |&y| (x, y))).collect()
            };
            for (c, &(mx, my)) in means.iter().enumerate() {
                for _ in 0..config.m_c {
                    points.push(mx + noise(&mut rng));
                    points.push(my + noise(&mut rng));
                    components.push(c);
                }
            }
        }
        GeneratorKind::U2 | GeneratorKind::U4 => {
            let shape = config.u_shape;
            let copies = if config.kind == GeneratorKind::U2 { 1 } else { 2 };
            for copy in 0..copies {
                let offset = copy as f64 * shape.copy_offset;
                for convex in [false, true] {
                    let c = 2 * copy + usize::from(convex);
                    for _ in 0..config.m_c {
                        let t = PI * rng.random::<f64>();
                        let (x, y) = if convex {
                            (t + shape.shift_x, shape.shift_y - t.sin())
                        } else {
                            (t, t.sin())
                        };
                        points.push(x + offset);
                        points.push(y + noise(&mut rng));
                        components.push(c);
                    }
                }
            }
        }
    }

    let mut data = Dataset::new(
        format!("{}(sigma={}, m_c={})", config.kind, config.sigma, config.m_c),
        Provenance::Synthetic(*config),
        2,
        points,
    )?;
    data.components = Some(components);
    Ok(data)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Skip the first line.
    pub header: bool,
    /// Zero-based column to discard, typically a class label.
    pub drop_col: Option<usize>,
    /// Rescale every column to zero mean and unit variance.
    pub standardize: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: false,
            drop_col: None,
            standardize: false,
        }
    }
}

/// Parses a numeric table, one point per record.
pub fn read_csv<R: Read>(reader: R, name: &str, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut points = Vec::new();
    let mut dim = None;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let mut width = 0;
        for (col, field) in record.iter().enumerate() {
            if Some(col) == options.drop_col {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {col}: {field:?} is not numeric"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {col}: {field:?} is not finite"),
                });
            }
            points.push(value);
            width += 1;
        }
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {d} numeric columns, found {width}"),
                })
            }
            _ => {}
        }
    }
    let dim = dim.filter(|&d| d > 0).ok_or(Error::EmptyInput)?;
    if options.standardize {
        standardize(&mut points, dim);
    }
    Dataset::new(name, Provenance::File(name.to_string()), dim, points)
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(std::io::BufReader::new(file), &path.display().to_string(), options)
}

/// Z-scores every column; constant columns are only centered.
fn standardize(points: &mut [f64], dim: usize) {
    let m = (points.len() / dim) as f64;
    for c in 0..dim {
        let column = points.iter().skip(c).step_by(dim);
        let mu = column.clone().sum::<f64>() / m;
        let var = column.map(|v| (v - mu) * (v - mu)).sum::<f64>() / m;
        let sd = var.sqrt();
        for v in points.iter_mut().skip(c).step_by(dim) {
            *v -= mu;
            if sd > 0.0 {
                *v /= sd;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless(kind: GeneratorKind) -> Dataset {
        generate(&GeneratorConfig {
            sigma: 0.0,
            m_c: 1,
            ..GeneratorConfig::new(kind)
        })
        .unwrap()
    }

    #[test]
    fn noiseless_gaussians_sit_on_their_means() {
        let g4 = noiseless(GeneratorKind::G4);
        assert_eq!(g4.points(), &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let g9 = noiseless(GeneratorKind::G9);
        assert_eq!(g9.len(), 9);
        for x in [-1.0, 0.0, 1.0] {
            for y in [-1.0, 0.0, 1.0] {
                assert!((0..9).any(|j| g9.point(j) == [x, y]));
            }
        }
    }

    #[test]
    fn uniform_stays_in_the_unit_square() {
        let ud = generate(&GeneratorConfig {
            sigma: 1.0,
            ..GeneratorConfig::new(GeneratorKind::Ud)
        })
        .unwrap();
        assert_eq!(ud.len(), 50);
        assert!(ud.points().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn sizes_and_balance() {
        for (kind, m) in [
            (GeneratorKind::Ud, 50),
            (GeneratorKind::G4, 200),
            (GeneratorKind::G9, 450),
            (GeneratorKind::U2, 100),
            (GeneratorKind::U4, 200),
        ] {
            let data = generate(&GeneratorConfig::new(kind)).unwrap();
            assert_eq!(data.len(), m, "{kind}");
            let comps = data.components().unwrap();
            for c in 0..kind.components() {
                assert_eq!(comps.iter().filter(|&&x| x == c).count(), 50);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GeneratorConfig {
            seed: 42,
            ..GeneratorConfig::new(GeneratorKind::U4)
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = GeneratorConfig { seed: 43, ..cfg };
        assert_ne!(generate(&cfg).unwrap().points(), generate(&other).unwrap().points());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!("g5".parse::<GeneratorKind>().is_err());
        let cfg = GeneratorConfig {
            sigma: -1.0,
            ..GeneratorConfig::new(GeneratorKind::G4)
        };
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn kv_config() {
        let cfg = GeneratorConfig::from_kv_str("kind = g9 # nine\nsigma=0.2\nm_c = 10\nseed = 3\n").unwrap();
        assert_eq!(cfg.kind, GeneratorKind::G9);
        assert_eq!((cfg.sigma, cfg.m_c, cfg.seed), (0.2, 10, 3));
        assert!(GeneratorConfig::from_kv_str("sigma = 1").is_err());
        assert!(matches!(
            GeneratorConfig::from_kv_str("kind = g4\nfoo = 1"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn csv_ingestion() {
        let text = "a,b,label\n1,2,x\n3,4,y\n";
        let opts = CsvOptions {
            header: true,
            drop_col: Some(2),
            ..CsvOptions::default()
        };
        let data = read_csv(text.as_bytes(), "t", &opts).unwrap();
        assert_eq!((data.len(), data.dim()), (2, 2));
        assert_eq!(data.point(1), &[3.0, 4.0]);

        let err = read_csv("1,2\n3,x\n".as_bytes(), "t", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert_eq!(read_csv("".as_bytes(), "t", &CsvOptions::default()), Err(Error::EmptyInput));
        let header_only = CsvOptions {
            header: true,
            ..CsvOptions::default()
        };
        assert_eq!(read_csv("a,b\n".as_bytes(), "t", &header_only), Err(Error::EmptyInput));
    }

    #[test]
    fn csv_standardization() {
        let opts = CsvOptions {
            standardize: true,
            ..CsvOptions::default()
        };
        let data = read_csv("1,5\n3,5\n".as_bytes(), "t", &opts).unwrap();
        assert_eq!(data.points(), &[-1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn dataset_csv_roundtrip() {
        let data = generate(&GeneratorConfig::new(GeneratorKind::G4)).unwrap();
        let back = read_csv(data.to_csv().as_bytes(), "t", &CsvOptions::default()).unwrap();
        assert_eq!(back.points(), data.points());
    }
}

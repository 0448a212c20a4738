//! Text forms of a partition: a dense CSV matrix (one cluster per line) and a
//! compact label vector (one line of 1-based cluster labels) for hard ones.
//!
//! Lines starting with `#` are comments. A `# clusters=L` comment in a label
//! file fixes the number of clusters, which keeps trailing empty clusters.

use crate::error::{Error, Result};
use crate::partition::Partition;

impl Partition {
    /// Dense CSV, `l` lines of `m` values. Round-trips exactly.
    pub fn to_dense_csv(&self) -> String {
        let mut out = String::new();
        for p in 0..self.rows() {
            let line: Vec<String> = self.row(p).iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_dense_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in data_lines(text) {
            let row = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno,
                        message: format!("{:?}: {e}", tok.trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        Self::from_rows(&rows)
    }

    /// One line of 1-based labels, without a trailing newline.
    pub fn to_label_line(&self) -> Result<String> {
        let labels = self.labels().ok_or(Error::NotHard)?;
        Ok(labels
            .iter()
            .map(|l| (l + 1).to_string())
            .collect::<Vec<_>>()
            .join(","))
    }

    /// Label file with a `# clusters=L` header line.
    pub fn to_label_file(&self) -> Result<String> {
        Ok(format!("# clusters={}\n{}\n", self.rows(), self.to_label_line()?))
    }

    /// Parses a line of 1-based labels.
    pub fn from_label_line(line: &str, clusters: usize) -> Result<Self> {
        let labels = parse_labels(line, 1)?;
        Self::from_labels(&labels, clusters)
    }
}

/// Reads either text form. A single data line of positive integers is a label
/// vector; anything else is a dense matrix. The cluster count comes from
/// `clusters`, else from a `# clusters=L` header, else from the largest label.
pub fn parse_partition(text: &str, clusters: Option<usize>) -> Result<Partition> {
    let header = header_clusters(text)?;
    let lines: Vec<(u64, &str)> = data_lines(text).collect();
    match lines.as_slice() {
        [] => Err(Error::EmptyInput),
        [(lineno, line)] if looks_like_labels(line) => {
            let labels = parse_labels(line, *lineno)?;
            let l = clusters
                .or(header)
                .unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
            Partition::from_labels(&labels, l)
        }
        _ => {
            let part = Partition::from_dense_csv(text)?;
            match clusters.or(header) {
                Some(l) if l != part.rows() => Err(Error::dims(
                    format!("{l} clusters"),
                    format!("{} rows", part.rows()),
                )),
                _ => Ok(part),
            }
        }
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (u64, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn header_clusters(text: &str) -> Result<Option<usize>> {
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.trim().strip_prefix('#') else {
            continue;
        };
        if let Some(value) = comment.trim().strip_prefix("clusters=") {
            return value.trim().parse().map(Some).map_err(|e| Error::Parse {
                line: i as u64 + 1,
                message: format!("bad cluster count {value:?}: {e}"),
            });
        }
    }
    Ok(None)
}

fn looks_like_labels(line: &str) -> bool {
    line.split(',')
        .all(|t| matches!(t.trim().parse::<usize>(), Ok(v) if v >= 1))
}

fn parse_labels(line: &str, lineno: u64) -> Result<Vec<usize>> {
    line.trim()
        .split(',')
        .map(|tok| match tok.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(Error::Parse {
                line: lineno,
                message: format!("{:?} is not a 1-based label", tok.trim()),
            }),
        })
        .collect()
}

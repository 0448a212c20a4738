//! `key = value` configuration text. `#` starts a comment.

use crate::error::{Error, Result};

pub(crate) struct Entry<'a> {
    pub line: u64,
    pub key: &'a str,
    pub value: &'a str,
}

pub(crate) fn parse(text: &str) -> Result<Vec<Entry<'_>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i as u64 + 1,
            message: format!("expected `key = value`, found {line:?}"),
        })?;
        out.push(Entry {
            line: i as u64 + 1,
            key: key.trim(),
            value: value.trim(),
        });
    }
    Ok(out)
}

impl Entry<'_> {
    pub fn parse<T: std::str::FromStr>(&self) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.value.parse().map_err(|e: T::Err| Error::Parse {
            line: self.line,
            message: format!("{}: {e}", self.key),
        })
    }

    pub fn unknown(&self) -> Error {
        Error::Parse {
            line: self.line,
            message: format!("unknown key {:?}", self.key),
        }
    }
}

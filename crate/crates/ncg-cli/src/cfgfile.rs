//! Plain `key=value` configuration files merged beneath command-line
//! flags: a flag given on the command line always wins, a key present in
//! the file fills in for an omitted flag, and built-in defaults cover the
//! rest. Lines starting with `#` (and blank lines) are ignored; keys use
//! the same kebab-case names as the flags.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ncg_core::{NcgError, Result};

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    /// Loads a config file, or an empty config when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| NcgError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut values = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(NcgError::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    msg: format!("expected key=value, got `{line}`"),
                });
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Parses the value for a key; a missing key is `None`, an
    /// unparseable value is a usage error naming the key.
    pub fn get<T: FromStr>(&self, key: &'static str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                NcgError::InvalidParameter {
                    name: key,
                    why: format!("config value `{raw}` does not parse"),
                }
            }),
        }
    }
}

/// Flag > config file > default.
pub fn effective<T: FromStr>(
    flag: Option<T>,
    file: &FileConfig,
    key: &'static str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(file.get::<T>(key)?.unwrap_or(default))
}

/// Like `effective`, but the fallback is itself optional.
pub fn effective_opt<T: FromStr>(
    flag: Option<T>,
    file: &FileConfig,
    key: &'static str,
) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get::<T>(key)
}

/// Parses a comma-separated list of unsigned integers; the empty string
/// is the empty list.
pub fn parse_usize_list(raw: &str, key: &'static str) -> Result<Vec<usize>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| {
                NcgError::InvalidParameter {
                    name: key,
                    why: format!("`{part}` is not an unsigned integer"),
                }
            })
        })
        .collect()
}

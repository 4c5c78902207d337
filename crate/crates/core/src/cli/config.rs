//! Flat `key = value` run configuration.
//!
//! Values resolve as command-line flag, then config file, then built-in
//! default. Every resolved value is recorded so a run can write a snapshot
//! that, fed back through `--config`, reproduces it.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Keys understood by at least one subcommand. Anything else in a config
/// file is rejected, which catches typos early.
pub const KNOWN_KEYS: &[&str] = &[
    // global
    "seed",
    "threads",
    "metric",
    // gen
    "out",
    "n-classes",
    "head-size",
    "ratio",
    "dim",
    "spread",
    "separation",
    "holdout",
    "holdout-per-class",
    // denoise
    "input",
    "output",
    "window",
    "noise-variance",
    // compose
    "sar",
    "denoised",
    "eo",
    "size",
    // fit
    "embeddings",
    "model-dir",
    "subsets",
    "k",
    "per-class-target",
    "shortlist-m",
    "nearmiss-k",
    "normalize",
    // predict
    "model",
    // evaluate
    "predictions",
    "truth",
    "out-dir",
    "auc-average",
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

fn missing(key: &str) -> Error {
    Error::Config(format!("missing required setting `{key}` (flag --{key} or config key)"))
}

/// `snake_case` and `kebab-case` keys are interchangeable.
fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Settings {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut file = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected `key = value`", n + 1)))?;
            let key = normalize_key(key);
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("config line {}: unknown key `{key}`", n + 1)));
            }
            if file.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("config line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(Settings {
            file,
            resolved: BTreeMap::new(),
        })
    }

    /// Reads the file at `path`, or starts empty without one.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Settings::default()),
            Some(p) => Self::from_text(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
        }
    }

    fn from_file<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("config key `{key}` = {v:?}: {e}")))
            })
            .transpose()
    }

    fn record<T: Display>(&mut self, key: &str, value: &T) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    /// Flag value, else file value, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.record(key, &value);
        Ok(value)
    }

    /// Like [`Self::get`] without a default; unset stays `None`.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        if let Some(v) = &value {
            self.record(key, v);
        }
        Ok(value)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.get_opt(key, flag)?.ok_or_else(|| missing(key))
    }

    pub fn path_opt(&mut self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        let value = flag.or_else(|| self.file.get(key).map(PathBuf::from));
        if let Some(p) = &value {
            self.record(key, &p.display());
        }
        value
    }

    pub fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
        self.path_opt(key, flag).ok_or_else(|| missing(key))
    }

    /// Resolved values as a config file, keys sorted.
    pub fn snapshot(&self, command: &str) -> String {
        let mut out = format!("# resolved configuration for `{command}`\n");
        for (k, v) in &self.resolved {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flag_file_default() {
        let mut s = Settings::from_text("k = 5\nseed=9 # trailing comment\n\nnearmiss_k = 2\n").unwrap();
        assert_eq!(s.get("k", Some(7usize), 3).unwrap(), 7);
        assert_eq!(s.get("seed", None, 0u64).unwrap(), 9);
        assert_eq!(s.get("nearmiss-k", None, 3usize).unwrap(), 2);
        assert_eq!(s.get("subsets", None, 7usize).unwrap(), 7);
        assert_eq!(s.get_opt::<usize>("per-class-target", None).unwrap(), None);
        let snap = s.snapshot("fit");
        assert!(snap.contains("k = 7\n") && snap.contains("seed = 9\n") && snap.contains("subsets = 7\n"));
        assert!(!snap.contains("per-class-target"));
    }

    #[test]
    fn snapshot_round_trips() {
        let mut s = Settings::from_text("ratio = 100\nmetric = cosine\n").unwrap();
        s.get("ratio", None, 1000.0f64).unwrap();
        s.get("metric", None, crate::knn::Metric::Euclidean).unwrap();
        s.get("dim", Some(4usize), 16).unwrap();
        let mut again = Settings::from_text(&s.snapshot("gen")).unwrap();
        assert_eq!(again.get("dim", None, 16usize).unwrap(), 4);
        assert_eq!(again.get("ratio", None, 0.0f64).unwrap(), 100.0);
    }

    #[test]
    fn bad_files() {
        for text in ["k 3", "colour = red", "k = 1\nk = 2"] {
            assert!(matches!(Settings::from_text(text), Err(Error::Config(_))), "{text}");
        }
        let mut s = Settings::from_text("k = three").unwrap();
        assert!(matches!(s.get("k", None, 3usize), Err(Error::Config(_))));
        assert!(matches!(Settings::default().require::<usize>("k", None), Err(Error::Config(_))));
        assert!(matches!(Settings::default().path("embeddings", None), Err(Error::Config(_))));
    }
}

//! Soft-voting ensemble of per-subset KNN classifiers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::knn::{Metric, NeighborIndex};

pub const MANIFEST_MAGIC: &str = "LTEM1";

/// Mean class distribution plus its argmax (lowest class index on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub proba: Vec<f64>,
    pub label: usize,
}

impl Prediction {
    pub fn from_proba(proba: Vec<f64>) -> Self {
        let mut label = 0;
        for (c, &p) in proba.iter().enumerate() {
            if p > proba[label] {
                label = c;
            }
        }
        Prediction { proba, label }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleModel {
    members: Vec<NeighborIndex>,
    k: usize,
    n_classes: usize,
}

impl EnsembleModel {
    /// All members must agree on dimensionality, metric and class count.
    pub fn new(members: Vec<NeighborIndex>, k: usize) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Degenerate("ensemble needs at least one member".into()))?;
        if k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        let (dim, metric, n_classes) = (first.dim(), first.metric(), first.n_classes());
        for (i, m) in members.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            if m.metric() != metric || m.n_classes() != n_classes {
                return Err(Error::Validation(format!("member {i} disagrees on metric or class count")));
            }
        }
        Ok(EnsembleModel { members, k, n_classes })
    }

    pub fn members(&self) -> &[NeighborIndex] {
        &self.members
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn metric(&self) -> Metric {
        self.members[0].metric()
    }

    /// Arithmetic mean of the members' `predict_proba`, summed in member order.
    pub fn predict(&self, q: &[f32]) -> Result<Prediction> {
        let mut acc = vec![0.0; self.n_classes];
        for m in &self.members {
            for (a, p) in acc.iter_mut().zip(m.predict_proba(q, self.k)?) {
                *a += p;
            }
        }
        let n = self.members.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(Prediction::from_proba(acc))
    }

    /// Predicts every row of a row-major matrix, parallel over rows, results
    /// in row order.
    pub fn predict_batch(&self, rows: &[f32]) -> Result<Vec<Prediction>> {
        let dim = self.dim();
        if rows.len() % dim != 0 {
            return Err(Error::DimMismatch {
                expected: dim,
                got: rows.len() % dim,
            });
        }
        rows.par_chunks_exact(dim).map(|q| self.predict(q)).collect()
    }

    /// Writes `member_XX.ltix` files and `manifest.txt` into `dir`.
    pub fn save(&self, dir: &Path, normalize: bool) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut members = Vec::with_capacity(self.members.len());
        for (i, m) in self.members.iter().enumerate() {
            let name = PathBuf::from(format!("member_{i:02}.ltix"));
            m.save(&dir.join(&name))?;
            members.push(name);
        }
        let manifest = ModelManifest {
            k: self.k,
            n_classes: self.n_classes,
            metric: self.metric(),
            normalize,
            members,
        };
        let path = dir.join("manifest.txt");
        fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Loads a model from its manifest; member paths resolve relative to the
    /// manifest's directory.
    pub fn load(manifest_path: &Path) -> Result<(EnsembleModel, ModelManifest)> {
        let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
        let manifest = ModelManifest::from_text(&text)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let members = manifest
            .members
            .iter()
            .map(|p| NeighborIndex::load(&base.join(p), manifest.n_classes))
            .collect::<Result<Vec<_>>>()?;
        if members.iter().any(|m| m.metric() != manifest.metric) {
            return Err(Error::Validation("member metric differs from manifest".into()));
        }
        Ok((EnsembleModel::new(members, manifest.k)?, manifest))
    }
}

/// Text model manifest:
///
/// ```text
/// LTEM1
/// k 3
/// n_classes 10
/// metric euclidean
/// normalize false
/// member member_00.ltix
/// ...
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ModelManifest {
    pub k: usize,
    pub n_classes: usize,
    pub metric: Metric,
    /// Whether queries must be L2-normalized before prediction.
    pub normalize: bool,
    pub members: Vec<PathBuf>,
}

impl ModelManifest {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{MANIFEST_MAGIC}\nk {}\nn_classes {}\nmetric {}\nnormalize {}\n",
            self.k, self.n_classes, self.metric, self.normalize
        );
        for m in &self.members {
            writeln!(s, "member {}", m.display()).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(MANIFEST_MAGIC) {
            return Err(Error::Format("model manifest must start with LTEM1".into()));
        }
        let (mut k, mut n_classes, mut metric, mut normalize) = (None, None, None, false);
        let mut members = Vec::new();
        for line in lines {
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::Format(format!("bad manifest line {line:?}")))?;
            let bad = || Error::Format(format!("bad manifest value in {line:?}"));
            match key {
                "k" => k = Some(value.parse::<usize>().map_err(|_| bad())?),
                "n_classes" => n_classes = Some(value.parse::<usize>().map_err(|_| bad())?),
                "metric" => metric = Some(value.parse::<Metric>()?),
                "normalize" => normalize = value.parse::<bool>().map_err(|_| bad())?,
                "member" => members.push(PathBuf::from(value)),
                _ => return Err(Error::Format(format!("unknown manifest key {key:?}"))),
            }
        }
        let missing = |what: &str| Error::Format(format!("manifest is missing `{what}`"));
        Ok(ModelManifest {
            k: k.ok_or_else(|| missing("k"))?,
            n_classes: n_classes.ok_or_else(|| missing("n_classes"))?,
            metric: metric.ok_or_else(|| missing("metric"))?,
            normalize,
            members,
        })
    }
}

/// CSV with header `query_id,label,p_0,...,p_{C-1}`.
pub fn predictions_to_csv(predictions: &[Prediction], n_classes: usize) -> String {
    let mut out = String::from("query_id,label");
    for c in 0..n_classes {
        write!(out, ",p_{c}").unwrap();
    }
    out.push('\n');
    for (i, p) in predictions.iter().enumerate() {
        write!(out, "{i},{}", p.label).unwrap();
        for v in &p.proba {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn predictions_from_csv(text: &str) -> Result<Vec<Prediction>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty predictions CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "query_id" || cols[1] != "label" {
        return Err(Error::Format("predictions CSV header must be query_id,label,p_0,...".into()));
    }
    let n_classes = cols.len() - 2;
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || Error::Format(format!("bad predictions row {}", row + 1));
        if fields.len() != n_classes + 2 {
            return Err(bad());
        }
        if fields[0].parse::<usize>().map_err(|_| bad())? != out.len() {
            return Err(Error::Format(format!("query ids must be consecutive, row {}", row + 1)));
        }
        let label = fields[1].parse::<usize>().map_err(|_| bad())?;
        let proba = fields[2..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if label >= n_classes || proba.iter().any(|p| !p.is_finite()) {
            return Err(bad());
        }
        out.push(Prediction { proba, label });
    }
    Ok(out)
}

//! Exact k-nearest-neighbour search and the per-subset KNN classifier.
//!
//! [`NeighborIndex`] is an accelerator only: it returns exactly what a
//! brute-force scan would, including the tie order (ascending sample
//! index). Above [`DEFAULT_TREE_MAX_DIM`] dimensions the tree degenerates to
//! a single scanned leaf.

mod persist;
mod tree;

use std::str::FromStr;

use rayon::prelude::*;

use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};

pub use persist::INDEX_MAGIC;
use tree::KdTree;

/// Above this dimensionality the index scans instead of using the tree.
pub const DEFAULT_TREE_MAX_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 − cos(a, b)`; a zero vector is at distance 1 from everything.
    Cosine,
}

impl Metric {
    /// Maps a raw vector into the space the index searches in. Cosine rows
    /// are L2-normalized.
    pub(crate) fn prepare(self, v: &[f32]) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        if self == Metric::Cosine {
            let norm = tree::dot(&out, &out).sqrt();
            if norm > 0.0 {
                out.iter_mut().for_each(|x| *x /= norm);
            }
        }
        out
    }

    /// Ordering key between prepared vectors: squared distance for
    /// Euclidean, the distance itself for cosine.
    #[inline]
    pub(crate) fn key(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => tree::sq_dist(a, b),
            Metric::Cosine => (1.0 - tree::dot(a, b)).max(0.0),
        }
    }

    /// Lower bound on `key` given a lower bound on the squared Euclidean
    /// distance between prepared vectors.
    #[inline]
    pub(crate) fn lower_bound(self, sq_dist: f64) -> f64 {
        match self {
            Metric::Euclidean => sq_dist,
            // unit vectors: 1 − cos = |a − b|² / 2; zero vectors only raise the key
            Metric::Cosine => 0.5 * sq_dist - 1e-12,
        }
    }

    #[inline]
    pub(crate) fn key_to_distance(self, key: f64) -> f64 {
        match self {
            Metric::Euclidean => key.sqrt(),
            Metric::Cosine => key,
        }
    }

    /// True metric distance between two raw vectors.
    pub fn distance(self, a: &[f32], b: &[f32]) -> f64 {
        self.key_to_distance(self.key(&self.prepare(a), &self.prepare(b)))
    }

    pub(crate) fn to_byte(self) -> u8 {
        match self {
            Metric::Euclidean => 0,
            Metric::Cosine => 1,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Metric::Euclidean),
            1 => Some(Metric::Cosine),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The `k` nearest stored samples of a query, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    /// Sample indices into the set the index was built from.
    pub indices: Vec<usize>,
    /// True metric distances, ascending; ties ordered by index.
    pub distances: Vec<f64>,
    /// Class label of each neighbour.
    pub labels: Vec<u32>,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Exact nearest-neighbour index over a subset of an [`EmbeddingSet`].
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    metric: Metric,
    dim: usize,
    n_classes: usize,
    /// Sample index of each row, ascending.
    sample_ids: Vec<usize>,
    /// Raw rows in `sample_ids` order.
    raw: Vec<f32>,
    labels: Vec<u32>,
    tree: KdTree,
}

impl NeighborIndex {
    /// Indexes the rows of `set` listed in `subset`, using the default tree
    /// dimensionality threshold.
    pub fn build(set: &EmbeddingSet, subset: &[usize], metric: Metric) -> Result<Self> {
        Self::build_with_threshold(set, subset, metric, DEFAULT_TREE_MAX_DIM)
    }

    /// Indexes every row of `set`.
    pub fn build_full(set: &EmbeddingSet, metric: Metric) -> Result<Self> {
        let all: Vec<usize> = (0..set.len()).collect();
        Self::build(set, &all, metric)
    }

    pub fn build_with_threshold(set: &EmbeddingSet, subset: &[usize], metric: Metric, tree_max_dim: usize) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::Degenerate("cannot index an empty subset".into()));
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= set.len()) {
            return Err(Error::Validation(format!("subset index {bad} out of range for {} rows", set.len())));
        }
        let mut ids = subset.to_vec();
        ids.sort_unstable();
        let mut raw = Vec::with_capacity(ids.len() * set.dim());
        for &i in &ids {
            raw.extend_from_slice(set.row(i));
        }
        let labels = ids.iter().map(|&i| set.labels()[i]).collect();
        Ok(Self::from_parts(metric, set.dim(), set.n_classes(), ids, raw, labels, tree_max_dim))
    }

    fn from_parts(
        metric: Metric,
        dim: usize,
        n_classes: usize,
        sample_ids: Vec<usize>,
        raw: Vec<f32>,
        labels: Vec<u32>,
        tree_max_dim: usize,
    ) -> Self {
        let prepared: Vec<f64> = raw.chunks_exact(dim).flat_map(|r| metric.prepare(r)).collect();
        let tree = KdTree::build(&prepared, dim, dim > tree_max_dim);
        NeighborIndex {
            metric,
            dim,
            n_classes,
            sample_ids,
            raw,
            labels,
            tree,
        }
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_ids.is_empty()
    }

    /// Sample indices covered by the index, ascending.
    pub fn sample_ids(&self) -> &[usize] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    fn check_dim(&self, q: &[f32]) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: q.len(),
            });
        }
        Ok(())
    }

    /// Ranks and keys of the `k` nearest rows.
    pub(crate) fn search(&self, q: &[f32], k: usize) -> Result<Vec<(f64, u32)>> {
        self.check_dim(q)?;
        if k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        Ok(self.tree.knn(self.metric, &self.metric.prepare(q), k))
    }

    /// Exact `k` nearest neighbours; returns `min(k, len)` entries.
    pub fn query(&self, q: &[f32], k: usize) -> Result<Neighborhood> {
        let hits = self.search(q, k)?;
        Ok(Neighborhood {
            indices: hits.iter().map(|&(_, r)| self.sample_ids[r as usize]).collect(),
            distances: hits.iter().map(|&(key, _)| self.metric.key_to_distance(key)).collect(),
            labels: hits.iter().map(|&(_, r)| self.labels[r as usize]).collect(),
        })
    }

    /// Fraction of each class among the `k` nearest neighbours.
    pub fn predict_proba(&self, q: &[f32], k: usize) -> Result<Vec<f64>> {
        let hits = self.search(q, k)?;
        let mut proba = vec![0.0; self.n_classes];
        for &(_, r) in &hits {
            proba[self.labels[r as usize] as usize] += 1.0;
        }
        let m = hits.len() as f64;
        proba.iter_mut().for_each(|p| *p /= m);
        Ok(proba)
    }

    /// [`Self::query`] for every row of `queries`, parallel over rows with
    /// results in input order.
    pub fn query_batch(&self, queries: &EmbeddingSet, k: usize) -> Result<Vec<Neighborhood>> {
        self.check_dim(queries.row(0))?;
        (0..queries.len())
            .into_par_iter()
            .map(|i| self.query(queries.row(i), k))
            .collect()
    }

    pub fn predict_proba_batch(&self, queries: &EmbeddingSet, k: usize) -> Result<Vec<Vec<f64>>> {
        self.check_dim(queries.row(0))?;
        (0..queries.len())
            .into_par_iter()
            .map(|i| self.predict_proba(queries.row(i), k))
            .collect()
    }
}

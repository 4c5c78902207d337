//! On-disk index: `"LTIX1"`, metric byte, `u32` n, `u32` dim, then
//! `n × dim` little-endian `f32` rows followed by `n` `u32` labels. The tree
//! layout is rebuilt on load.

use std::fs;
use std::path::Path;

use super::{Metric, NeighborIndex, DEFAULT_TREE_MAX_DIM};
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &[u8; 5] = b"LTIX1";
const HEADER_LEN: usize = 5 + 1 + 8;

impl NeighborIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len();
        let mut out = Vec::with_capacity(HEADER_LEN + n * (self.dim + 1) * 4);
        out.extend_from_slice(INDEX_MAGIC);
        out.push(self.metric.to_byte());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in &self.raw {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for l in &self.labels {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out
    }

    /// Decodes an index; `n_classes` comes from the model manifest. Rows of
    /// a loaded index are numbered `0..n` in stored order.
    pub fn from_bytes(bytes: &[u8], n_classes: usize) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..5] != INDEX_MAGIC {
            return Err(Error::Format("not an LTIX1 index".into()));
        }
        let metric = Metric::from_byte(bytes[5]).ok_or_else(|| Error::Format(format!("unknown metric byte {}", bytes[5])))?;
        let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as u128;
        let dim = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as u128;
        let expected = HEADER_LEN as u128 + n * (dim + 1) * 4;
        if bytes.len() as u128 != expected {
            return Err(Error::Format(format!("index length {} does not match header", bytes.len())));
        }
        let (n, dim) = (n as usize, dim as usize);
        if n == 0 || dim == 0 {
            return Err(Error::Validation("index must hold at least one row of dim >= 1".into()));
        }
        let split = HEADER_LEN + n * dim * 4;
        let raw: Vec<f32> = bytes[HEADER_LEN..split]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        let labels: Vec<u32> = bytes[split..]
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite component in index".into()));
        }
        if let Some(l) = labels.iter().find(|&&l| l as usize >= n_classes) {
            return Err(Error::Validation(format!("index label {l} outside [0, {n_classes})")));
        }
        Ok(NeighborIndex::from_parts(
            metric,
            dim,
            n_classes,
            (0..n).collect(),
            raw,
            labels,
            DEFAULT_TREE_MAX_DIM,
        ))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, n_classes: usize) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, n_classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::EmbeddingSet;

    #[test]
    fn reload_answers_identically() {
        let rows: Vec<Vec<f32>> = (0..40).map(|i| vec![(i % 7) as f32, (i / 7) as f32, 0.5]).collect();
        let labels = (0..40).map(|i| (i % 3) as u32).collect();
        let set = EmbeddingSet::from_rows(&rows, labels, 3).unwrap();
        let subset: Vec<usize> = (0..40).rev().step_by(2).collect();
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let idx = NeighborIndex::build(&set, &subset, metric).unwrap();
            let bytes = idx.to_bytes();
            assert_eq!(&bytes[..5], b"LTIX1");
            assert_eq!(bytes.len(), 14 + 20 * 4 * 4);
            let back = NeighborIndex::from_bytes(&bytes, 3).unwrap();
            assert_eq!(back.metric(), metric);
            assert_eq!(back.to_bytes(), bytes);
            for q in set.rows() {
                assert_eq!(idx.predict_proba(q, 3).unwrap(), back.predict_proba(q, 3).unwrap());
                assert_eq!(idx.query(q, 3).unwrap().distances, back.query(q, 3).unwrap().distances);
            }
        }
    }

    #[test]
    fn rejects_bad_index_files() {
        let set = EmbeddingSet::from_rows(&[vec![1.0], vec![2.0]], vec![0, 1], 2).unwrap();
        let bytes = NeighborIndex::build_full(&set, Metric::Euclidean).unwrap().to_bytes();
        assert!(matches!(NeighborIndex::from_bytes(&bytes[..bytes.len() - 2], 2), Err(Error::Format(_))));
        assert!(matches!(NeighborIndex::from_bytes(&bytes, 1), Err(Error::Validation(_))));
        let mut bad_metric = bytes.clone();
        bad_metric[5] = 9;
        assert!(matches!(NeighborIndex::from_bytes(&bad_metric, 2), Err(Error::Format(_))));
    }
}

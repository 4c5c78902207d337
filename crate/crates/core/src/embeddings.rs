//! Labeled feature vectors and their binary interchange format.
//!
//! File layout, little-endian, no padding:
//!
//! ```text
//! "LTEB1"                    5 bytes
//! n, dim, n_classes          3 × u32
//! n × { label: u32, dim × f32 }
//! ```
//!
//! Any feature extractor that writes this layout can feed the balancing and
//! classification stages.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const EMBEDDING_MAGIC: &[u8; 5] = b"LTEB1";
const HEADER_LEN: usize = 5 + 12;

/// Upper bound on the class vocabulary accepted from files.
pub const MAX_CLASSES: usize = 1 << 16;

/// Row-major `n × dim` matrix of `f32` features with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    n_classes: usize,
    vectors: Vec<f32>,
    labels: Vec<u32>,
}

impl EmbeddingSet {
    pub fn new(dim: usize, n_classes: usize, vectors: Vec<f32>, labels: Vec<u32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("dim must be >= 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::Validation("embedding set must hold at least one vector".into()));
        }
        if n_classes > MAX_CLASSES {
            return Err(Error::Validation(format!("n_classes {n_classes} exceeds {MAX_CLASSES}")));
        }
        if vectors.len() != labels.len() * dim {
            return Err(Error::Validation(format!(
                "{} labels need {} components, got {}",
                labels.len(),
                labels.len() * dim,
                vectors.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l as usize >= n_classes) {
            return Err(Error::Validation(format!(
                "label {} of row {i} is outside [0, {n_classes})",
                labels[i]
            )));
        }
        if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite component in row {}", i / dim)));
        }
        Ok(EmbeddingSet {
            dim,
            n_classes,
            vectors,
            labels,
        })
    }

    /// Convenience constructor from per-row vectors.
    pub fn from_rows(rows: &[Vec<f32>], labels: Vec<u32>, n_classes: usize) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Validation("rows have differing lengths".into()));
        }
        EmbeddingSet::new(dim, n_classes, rows.concat(), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false for a constructed set; provided for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.vectors.chunks_exact(self.dim)
    }

    /// Per-class sample counts, length `n_classes`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Row indices of class `c`, ascending.
    pub fn indices_of_class(&self, c: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.label(i) == c).collect()
    }

    /// New set containing `indices` in the given order. Fails on an empty
    /// or out-of-range selection.
    pub fn select(&self, indices: &[usize]) -> Result<EmbeddingSet> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Validation(format!("row {bad} out of range for {} rows", self.len())));
        }
        let mut vectors = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            vectors.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        EmbeddingSet::new(self.dim, self.n_classes, vectors, labels)
    }

    /// Scales every row to unit L2 norm; zero rows stay zero.
    pub fn l2_normalized(&self) -> EmbeddingSet {
        let mut vectors = self.vectors.clone();
        for row in vectors.chunks_exact_mut(self.dim) {
            let norm = row.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in row.iter_mut() {
                    *v = (*v as f64 / norm) as f32;
                }
            }
        }
        EmbeddingSet {
            vectors,
            ..self.clone()
        }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.len() * (4 + 4 * self.dim)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(EMBEDDING_MAGIC)?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.n_classes as u32).to_le_bytes())?;
        for (label, row) in self.labels.iter().zip(self.rows()) {
            w.write_all(&label.to_le_bytes())?;
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Parses and validates an encoded set. Structural problems (magic,
    /// truncation, trailing bytes) are `Format` errors; invariant violations
    /// are `Validation` errors.
    pub fn from_bytes(bytes: &[u8]) -> Result<EmbeddingSet> {
        if bytes.len() < 5 || &bytes[..5] != EMBEDDING_MAGIC {
            return Err(Error::Format("bad magic, expected LTEB1".into()));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format("truncated header".into()));
        }
        // u128: n and dim both near u32::MAX overflow u64
        let word = |i: usize| u32::from_le_bytes(bytes[5 + 4 * i..9 + 4 * i].try_into().unwrap()) as u128;
        let (n, dim, n_classes) = (word(0), word(1), word(2));
        let expected = HEADER_LEN as u128 + n * (4 + 4 * dim);
        if bytes.len() as u128 != expected {
            return Err(Error::Format(format!(
                "payload length {} does not match header (n={n}, dim={dim}, expected {expected})",
                bytes.len()
            )));
        }
        let (n, dim, n_classes) = (n as usize, dim as usize, n_classes as usize);
        let mut labels = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * dim);
        for rec in bytes[HEADER_LEN..].chunks_exact(4 + 4 * dim) {
            labels.push(u32::from_le_bytes(rec[..4].try_into().unwrap()));
            vectors.extend(rec[4..].chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())));
        }
        EmbeddingSet::new(dim, n_classes, vectors, labels)
    }
}

pub fn write_embedding_set(set: &EmbeddingSet, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    set.write_to(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_embedding_set(path: &Path) -> Result<EmbeddingSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    EmbeddingSet::from_bytes(&bytes)
}

/// Per-class counts and the head/tail ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassHistogram {
    pub counts: Vec<usize>,
    /// `max / min` over classes with a nonzero count.
    pub imbalance_ratio: f64,
}

impl ClassHistogram {
    pub fn from_counts(counts: Vec<usize>) -> Result<Self> {
        let max = counts.iter().copied().max().unwrap_or(0);
        let min = counts.iter().copied().filter(|&c| c > 0).min();
        let Some(min) = min else {
            return Err(Error::Degenerate("histogram has no samples".into()));
        };
        Ok(ClassHistogram {
            imbalance_ratio: max as f64 / min as f64,
            counts,
        })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn class_histogram(set: &EmbeddingSet) -> ClassHistogram {
    ClassHistogram::from_counts(set.class_counts()).expect("a valid set has at least one sample")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_record_size() {
        let set = EmbeddingSet::new(2, 1, vec![1.0, 2.0], vec![0]).unwrap();
        let bytes = set.to_bytes();
        assert_eq!(bytes.len(), 29);
        assert_eq!(bytes.len(), set.encoded_len());
        assert_eq!(&bytes[..5], b"LTEB1");
        assert_eq!(&bytes[17..21], &0u32.to_le_bytes());
        assert_eq!(&bytes[21..25], &1.0f32.to_le_bytes());
    }

    #[test]
    fn label_equal_to_n_classes_is_invalid() {
        let mut bytes = EmbeddingSet::new(1, 10, vec![0.5], vec![9]).unwrap().to_bytes();
        bytes[17..21].copy_from_slice(&10u32.to_le_bytes());
        assert!(matches!(EmbeddingSet::from_bytes(&bytes), Err(Error::Validation(_))));
    }

    #[test]
    fn nan_component_is_invalid() {
        let mut bytes = EmbeddingSet::new(2, 2, vec![0.5, 0.25], vec![1]).unwrap().to_bytes();
        bytes[25..29].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(EmbeddingSet::from_bytes(&bytes), Err(Error::Validation(_))));
    }

    #[test]
    fn truncation_and_trailing_bytes_are_format_errors() {
        let bytes = EmbeddingSet::new(3, 2, vec![0.0; 6], vec![0, 1]).unwrap().to_bytes();
        for cut in [0, 3, 5, 12, 17, 20, bytes.len() - 1] {
            assert!(matches!(EmbeddingSet::from_bytes(&bytes[..cut]), Err(Error::Format(_))), "cut {cut}");
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(EmbeddingSet::from_bytes(&extra), Err(Error::Format(_))));
    }

    #[test]
    fn empty_and_zero_dim_are_invalid() {
        let mut bytes = b"LTEB1".to_vec();
        bytes.extend_from_slice(&0u32.to_le_bytes());
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        assert!(matches!(EmbeddingSet::from_bytes(&bytes), Err(Error::Validation(_))));
    }

    #[test]
    fn file_io() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.lteb");
        let set = EmbeddingSet::new(2, 3, vec![1.0, -1.0, 0.5, 2.5], vec![2, 0]).unwrap();
        write_embedding_set(&set, &path).unwrap();
        assert_eq!(read_embedding_set(&path).unwrap(), set);
        let bad = dir.path().join("missing").join("set.lteb");
        assert!(matches!(write_embedding_set(&set, &bad), Err(Error::Io { .. })));
        assert!(matches!(read_embedding_set(&bad), Err(Error::Io { .. })));
    }

    #[test]
    fn histogram_small() {
        let set = EmbeddingSet::new(1, 2, vec![0.0; 3], vec![0, 0, 1]).unwrap();
        let h = class_histogram(&set);
        assert_eq!(h.counts, vec![2, 1]);
        assert_eq!(h.imbalance_ratio, 2.0);
    }

    #[test]
    fn histogram_reported_extremes() {
        let h = ClassHistogram::from_counts(vec![364_291, 20_000, 5_000, 353]).unwrap();
        assert!((h.imbalance_ratio - 1032.0).abs() < 0.05);
        let h = ClassHistogram::from_counts(vec![10_000, 0, 10]).unwrap();
        assert_eq!(h.imbalance_ratio, 1000.0);
    }

    #[test]
    fn select_and_normalize() {
        let set = EmbeddingSet::new(2, 2, vec![3.0, 4.0, 0.0, 0.0, 1.0, 0.0], vec![0, 1, 1]).unwrap();
        let sub = set.select(&[2, 0]).unwrap();
        assert_eq!(sub.labels(), &[1, 0]);
        assert_eq!(sub.row(1), &[3.0, 4.0]);
        assert!(set.select(&[]).is_err());
        assert!(set.select(&[3]).is_err());
        let n = set.l2_normalized();
        assert_eq!(n.row(0), &[0.6, 0.8]);
        assert_eq!(n.row(1), &[0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(n in 1usize..20, dim in 1usize..6, n_classes in 1usize..5, seed in any::<u64>()) {
            let mut s = seed;
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); s };
            let vectors: Vec<f32> = (0..n * dim).map(|_| f32::from_bits((next() >> 32) as u32 & 0x7f7f_ffff)).collect();
            let labels: Vec<u32> = (0..n).map(|_| (next() >> 40) as u32 % n_classes as u32).collect();
            let set = EmbeddingSet::new(dim, n_classes, vectors, labels).unwrap();
            let bytes = set.to_bytes();
            let back = EmbeddingSet::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
            prop_assert_eq!(back, set);
        }
    }
}

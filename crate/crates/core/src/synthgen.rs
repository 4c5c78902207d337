//! Seeded long-tail Gaussian-cluster datasets.
//!
//! Class `c` receives `round(head · ratio^(−c / (C − 1)))` samples, so sizes
//! decay geometrically from the head class to a tail `ratio` times smaller.
//! Every class is an isotropic Gaussian around a random centroid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal};

use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_classes: usize,
    pub head_size: usize,
    /// Head size over tail size.
    pub imbalance_ratio: f64,
    pub dim: usize,
    /// Within-class standard deviation per coordinate.
    pub cluster_spread: f64,
    /// Standard deviation of centroid coordinates.
    pub cluster_separation: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_classes: 10,
            head_size: 10_000,
            imbalance_ratio: 1000.0,
            dim: 16,
            cluster_spread: 1.0,
            cluster_separation: 1.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_classes < 2 {
            return fail(format!("n_classes must be >= 2, got {}", self.n_classes));
        }
        if !(self.imbalance_ratio.is_finite() && self.imbalance_ratio >= 1.0) {
            return fail(format!("imbalance ratio must be >= 1, got {}", self.imbalance_ratio));
        }
        if (self.head_size as f64) / self.imbalance_ratio < 1.0 {
            return fail(format!(
                "head size {} with ratio {} leaves an empty tail class",
                self.head_size, self.imbalance_ratio
            ));
        }
        if self.dim == 0 {
            return fail("dim must be >= 1".into());
        }
        for (name, v) in [("spread", self.cluster_spread), ("separation", self.cluster_separation)] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("cluster {name} must be finite and >= 0, got {v}"));
            }
        }
        Ok(())
    }

    /// Per-class sample counts, head first.
    pub fn class_sizes(&self) -> Result<Vec<usize>> {
        self.validate()?;
        let last = (self.n_classes - 1) as f64;
        Ok((0..self.n_classes)
            .map(|c| (self.head_size as f64 * self.imbalance_ratio.powf(-(c as f64) / last)).round() as usize)
            .collect())
    }

    fn centroids(&self) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_classes)
            .map(|_| {
                (0..self.dim)
                    .map(|_| self.cluster_separation * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect()
    }

    fn sample_classes(&self, sizes: &[usize], stream: u64) -> Result<EmbeddingSet> {
        let centroids = self.centroids();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        let noise = Normal::new(0.0, self.cluster_spread).map_err(|e| Error::Config(e.to_string()))?;
        let total: usize = sizes.iter().sum();
        let mut vectors = Vec::with_capacity(total * self.dim);
        let mut labels = Vec::with_capacity(total);
        for (c, &size) in sizes.iter().enumerate() {
            for _ in 0..size {
                vectors.extend(centroids[c].iter().map(|&mu| (mu + rng.sample(noise)) as f32));
                labels.push(c as u32);
            }
        }
        EmbeddingSet::new(self.dim, self.n_classes, vectors, labels)
    }
}

/// The long-tail training set, rows grouped by class.
pub fn generate_longtail(cfg: &GeneratorConfig) -> Result<EmbeddingSet> {
    let sizes = cfg.class_sizes()?;
    cfg.sample_classes(&sizes, 1)
}

/// `per_class` fresh samples of every class from the same centroids as
/// [`generate_longtail`]; distinct `stream`s give independent draws.
pub fn generate_balanced(cfg: &GeneratorConfig, per_class: usize, stream: u64) -> Result<EmbeddingSet> {
    cfg.validate()?;
    if per_class == 0 {
        return Err(Error::Config("per_class must be >= 1".into()));
    }
    cfg.sample_classes(&vec![per_class; cfg.n_classes], 2 + stream)
}

/// `class,count` CSV.
pub fn counts_csv(counts: &[usize]) -> String {
    let mut s = String::from("class,count\n");
    for (c, n) in counts.iter().enumerate() {
        s.push_str(&format!("{c},{n}\n"));
    }
    s
}

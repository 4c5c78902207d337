//! Feature-space balancing: Tomek-link cleaning, NearMiss-3 undersampling
//! and balanced subset construction.
//!
//! Everything here is a pure function of `(set, config)`; internal
//! parallelism never changes a result.

mod nearmiss;
mod subsets;
mod tomek;

pub use nearmiss::nearmiss3_select;
pub use subsets::{build_balanced_subsets, SubsetPlan, PLAN_MAGIC};
pub use tomek::{find_tomek_links, nearest_other, remove_tomek_majority, TomekLink};

use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};
use crate::knn::Metric;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub metric: Metric,
    /// NearMiss-3 shortlist size per minority sample.
    pub nearmiss_shortlist_m: usize,
    /// Minority neighbours averaged when ranking the shortlist.
    pub nearmiss_k: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(metric: Metric, nearmiss_shortlist_m: usize, nearmiss_k: usize, seed: u64) -> Result<Self> {
        if nearmiss_shortlist_m == 0 || nearmiss_k == 0 {
            return Err(Error::Config("NearMiss-3 m and k must be >= 1".into()));
        }
        Ok(SamplerConfig {
            metric,
            nearmiss_shortlist_m,
            nearmiss_k,
            seed,
        })
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            metric: Metric::Euclidean,
            nearmiss_shortlist_m: 3,
            nearmiss_k: 3,
            seed: 0,
        }
    }
}

/// A reduced set plus, for each of its rows, the row it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub set: EmbeddingSet,
    pub kept: Vec<usize>,
}

impl Resampled {
    pub(crate) fn from_kept(source: &EmbeddingSet, kept: Vec<usize>) -> Result<Self> {
        Ok(Resampled {
            set: source.select(&kept)?,
            kept,
        })
    }
}

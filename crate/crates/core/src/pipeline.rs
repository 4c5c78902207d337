//! End-to-end balancing and ensemble training.
//!
//! `fit` chains Tomek cleaning, NearMiss-3, balanced subset drawing and one
//! KNN index per subset. Every step is seeded; the same set and config
//! always give the same model.

use std::fmt::Write as _;

use crate::embeddings::EmbeddingSet;
use crate::ensemble::{EnsembleModel, Prediction};
use crate::error::{Error, Result};
use crate::imageproc::{LeeConfig, DEFAULT_TARGET_SIZE};
use crate::knn::NeighborIndex;
use crate::metrics::AucAverage;
use crate::sampling::{
    build_balanced_subsets, find_tomek_links, nearmiss3_select, remove_tomek_majority, SamplerConfig, SubsetPlan,
    TomekLink,
};

pub const DEFAULT_SUBSETS: usize = 7;
pub const DEFAULT_K: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub n_subsets: usize,
    pub k_neighbors: usize,
    /// Side length of composite rasters.
    pub target_size: usize,
    pub lee: LeeConfig,
    pub sampler: SamplerConfig,
    /// Samples per class per subset; defaults to the smallest class after
    /// Tomek cleaning.
    pub per_class_target: Option<usize>,
    /// L2-normalize embeddings before anything else.
    pub normalize: bool,
    pub auc_average: AucAverage,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_subsets: DEFAULT_SUBSETS,
            k_neighbors: DEFAULT_K,
            target_size: DEFAULT_TARGET_SIZE,
            lee: LeeConfig::default(),
            sampler: SamplerConfig::default(),
            per_class_target: None,
            normalize: false,
            auc_average: AucAverage::Macro,
        }
    }
}

/// Per-class bookkeeping of the balancing stages.
#[derive(Debug, Clone, PartialEq)]
pub struct CleaningReport {
    pub links: Vec<TomekLink>,
    pub input: Vec<usize>,
    /// Links with at least one endpoint in the class.
    pub links_touching: Vec<usize>,
    pub tomek_removed: Vec<usize>,
    pub after_tomek: Vec<usize>,
    pub nearmiss_target: Vec<usize>,
    pub after_nearmiss: Vec<usize>,
    pub per_subset: Vec<usize>,
}

impl CleaningReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,input,tomek_links,tomek_removed,after_tomek,nearmiss_target,after_nearmiss,per_subset\n");
        for c in 0..self.input.len() {
            writeln!(
                s,
                "{c},{},{},{},{},{},{},{}",
                self.input[c],
                self.links_touching[c],
                self.tomek_removed[c],
                self.after_tomek[c],
                self.nearmiss_target[c],
                self.after_nearmiss[c],
                self.per_subset[c]
            )
            .unwrap();
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub model: EnsembleModel,
    /// Subsets as row indices of the input set.
    pub plan: SubsetPlan,
    pub report: CleaningReport,
}

/// Runs the whole balancing pipeline and builds one index per subset.
pub fn fit(input: &EmbeddingSet, cfg: &PipelineConfig) -> Result<FitOutput> {
    if cfg.n_subsets == 0 || cfg.k_neighbors == 0 {
        return Err(Error::Config("subset count and k must be >= 1".into()));
    }
    let normalized;
    let set = if cfg.normalize {
        normalized = input.l2_normalized();
        &normalized
    } else {
        input
    };
    let sampler = &cfg.sampler;

    let links = find_tomek_links(set, sampler).map_err(|e| e.in_stage("tomek"))?;
    let cleaned = remove_tomek_majority(set, &links).map_err(|e| e.in_stage("tomek"))?;
    let after_tomek = cleaned.set.class_counts();

    let smallest = after_tomek.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
    let per_class_target = match cfg.per_class_target {
        None => smallest,
        Some(t) if t == 0 || t > smallest => {
            return Err(Error::Target(format!(
                "per-class target {t} must be in [1, {smallest}] (smallest class after cleaning)"
            ))
            .in_stage("nearmiss"))
        }
        Some(t) => t,
    };
    let pool = cfg.n_subsets.saturating_mul(per_class_target);
    let nearmiss_target: Vec<usize> = after_tomek.iter().map(|&c| c.min(pool).max(1)).collect();
    let balanced = nearmiss3_select(&cleaned.set, &nearmiss_target, sampler).map_err(|e| e.in_stage("nearmiss"))?;
    let after_nearmiss = balanced.set.class_counts();

    let plan = build_balanced_subsets(&balanced.set, cfg.n_subsets, per_class_target, sampler)
        .map_err(|e| e.in_stage("subsets"))?;
    let members = plan
        .subsets
        .iter()
        .map(|s| NeighborIndex::build(&balanced.set, s, sampler.metric))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("index"))?;
    let model = EnsembleModel::new(members, cfg.k_neighbors).map_err(|e| e.in_stage("index"))?;

    let to_input: Vec<usize> = balanced.kept.iter().map(|&i| cleaned.kept[i]).collect();
    let plan = plan.remap(&to_input);

    let n_classes = set.n_classes();
    let mut links_touching = vec![0; n_classes];
    for l in &links {
        let (ca, cb) = (set.label(l.a), set.label(l.b));
        links_touching[ca] += 1;
        if cb != ca {
            links_touching[cb] += 1;
        }
    }
    let input_counts = set.class_counts();
    let report = CleaningReport {
        tomek_removed: input_counts.iter().zip(&after_tomek).map(|(a, b)| a - b).collect(),
        input: input_counts,
        links_touching,
        links,
        after_tomek,
        nearmiss_target,
        per_subset: after_nearmiss.iter().map(|&c| c.min(per_class_target)).collect(),
        after_nearmiss,
    };
    Ok(FitOutput { model, plan, report })
}

/// Ensemble predictions for every row of `queries`, normalizing first when
/// the model was trained on normalized embeddings.
pub fn predict(model: &EnsembleModel, queries: &EmbeddingSet, normalize: bool) -> Result<Vec<Prediction>> {
    if queries.dim() != model.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            got: queries.dim(),
        });
    }
    if normalize {
        model.predict_batch(queries.l2_normalized().vectors())
    } else {
        model.predict_batch(queries.vectors())
    }
}

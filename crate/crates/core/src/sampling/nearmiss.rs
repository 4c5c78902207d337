//! NearMiss-3 undersampling, one class at a time against everything else.
//!
//! For an oversized class `c`:
//! 1. shortlist the union of the `m` nearest `c`-samples of every other
//!    sample, padded by ascending index if it is shorter than the target;
//! 2. keep the `target` shortlisted samples whose mean distance to their `k`
//!    nearest non-`c` samples is largest (ties to the lowest index).

use rayon::prelude::*;

use super::{Resampled, SamplerConfig};
use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};
use crate::knn::NeighborIndex;

pub fn nearmiss3_select(set: &EmbeddingSet, targets: &[usize], cfg: &SamplerConfig) -> Result<Resampled> {
    if targets.len() != set.n_classes() {
        return Err(Error::Target(format!(
            "{} targets given for {} classes",
            targets.len(),
            set.n_classes()
        )));
    }
    let counts = set.class_counts();
    let mut kept = Vec::with_capacity(set.len());
    for (c, (&count, &target)) in counts.iter().zip(targets).enumerate() {
        if count == 0 {
            continue;
        }
        if target == 0 {
            return Err(Error::Target(format!("class {c} has {count} samples but target 0")));
        }
        if count <= target {
            kept.extend(set.indices_of_class(c));
        } else {
            kept.extend(select_class(set, c, target, cfg)?);
        }
    }
    kept.sort_unstable();
    Resampled::from_kept(set, kept)
}

/// Mean distance from each shortlisted sample to its `k` nearest samples of
/// other classes, paired with the sample index.
pub(crate) fn shortlist_scores(set: &EmbeddingSet, class: usize, cfg: &SamplerConfig, target: usize) -> Result<Vec<(usize, f64)>> {
    let (majority, minority): (Vec<usize>, Vec<usize>) = (0..set.len()).partition(|&i| set.label(i) == class);

    let mut in_shortlist = vec![false; set.len()];
    if !minority.is_empty() {
        let maj_index = NeighborIndex::build(set, &majority, cfg.metric)?;
        let hits: Vec<Vec<usize>> = minority
            .par_iter()
            .map(|&i| maj_index.query(set.row(i), cfg.nearmiss_shortlist_m).map(|nb| nb.indices))
            .collect::<Result<_>>()?;
        for j in hits.into_iter().flatten() {
            in_shortlist[j] = true;
        }
    }
    let mut shortlist: Vec<usize> = majority.iter().copied().filter(|&i| in_shortlist[i]).collect();
    if shortlist.len() < target {
        let pad = majority.iter().copied().filter(|&i| !in_shortlist[i]).take(target - shortlist.len());
        shortlist.extend(pad);
        shortlist.sort_unstable();
    }

    if minority.is_empty() {
        return Ok(shortlist.into_iter().map(|i| (i, 0.0)).collect());
    }
    let min_index = NeighborIndex::build(set, &minority, cfg.metric)?;
    shortlist
        .par_iter()
        .map(|&i| {
            let nb = min_index.query(set.row(i), cfg.nearmiss_k)?;
            let mean = nb.distances.iter().sum::<f64>() / nb.len() as f64;
            Ok((i, mean))
        })
        .collect()
}

fn select_class(set: &EmbeddingSet, class: usize, target: usize, cfg: &SamplerConfig) -> Result<Vec<usize>> {
    let mut scored = shortlist_scores(set, class, cfg, target)?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().take(target).map(|(i, _)| i).collect())
}

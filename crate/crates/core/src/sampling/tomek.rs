use rayon::prelude::*;

use super::{Resampled, SamplerConfig};
use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};
use crate::knn::NeighborIndex;

/// A mutual nearest-neighbour pair with different labels, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TomekLink {
    pub a: usize,
    pub b: usize,
}

/// Nearest other sample of every row (ties to the lowest index).
pub fn nearest_other(set: &EmbeddingSet, cfg: &SamplerConfig) -> Result<Vec<usize>> {
    if set.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 samples, got {}", set.len())));
    }
    let index = NeighborIndex::build_full(set, cfg.metric)?;
    (0..set.len())
        .into_par_iter()
        .map(|i| {
            // self is among the two best unless two lower-indexed duplicates
            // beat it, in which case the first of them is the answer anyway
            let nb = index.query(set.row(i), 2)?;
            Ok(*nb.indices.iter().find(|&&j| j != i).expect("two rows queried"))
        })
        .collect()
}

/// All mutual cross-class 1-NN pairs, sorted by `(a, b)`.
pub fn find_tomek_links(set: &EmbeddingSet, cfg: &SamplerConfig) -> Result<Vec<TomekLink>> {
    let nn = nearest_other(set, cfg)?;
    Ok((0..set.len())
        .filter_map(|a| {
            let b = nn[a];
            (a < b && nn[b] == a && set.label(a) != set.label(b)).then_some(TomekLink { a, b })
        })
        .collect())
}

/// Drops the member of each link whose class is strictly larger in `set`;
/// links between equally sized classes are left alone. Single pass.
pub fn remove_tomek_majority(set: &EmbeddingSet, links: &[TomekLink]) -> Result<Resampled> {
    let counts = set.class_counts();
    let mut remove = vec![false; set.len()];
    for link in links {
        if link.a >= set.len() || link.b >= set.len() {
            return Err(Error::Validation(format!("link {link:?} out of range")));
        }
        let (ca, cb) = (counts[set.label(link.a)], counts[set.label(link.b)]);
        if ca > cb {
            remove[link.a] = true;
        } else if cb > ca {
            remove[link.b] = true;
        }
    }
    let kept: Vec<usize> = (0..set.len()).filter(|&i| !remove[i]).collect();
    Resampled::from_kept(set, kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points_1d(xs: &[f32], labels: &[u32], n_classes: usize) -> EmbeddingSet {
        let rows: Vec<Vec<f32>> = xs.iter().map(|&x| vec![x]).collect();
        EmbeddingSet::from_rows(&rows, labels.to_vec(), n_classes).unwrap()
    }

    #[test]
    fn one_dimensional_link() {
        let set = points_1d(&[0.0, 0.4, 5.0], &[0, 1, 1], 2);
        let links = find_tomek_links(&set, &SamplerConfig::default()).unwrap();
        assert_eq!(links, vec![TomekLink { a: 0, b: 1 }]);
    }

    #[test]
    fn single_class_has_no_links() {
        let set = points_1d(&[0.0, 0.4, 5.0, 5.1], &[0, 0, 0, 0], 1);
        assert!(find_tomek_links(&set, &SamplerConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn coincident_pair() {
        let set = points_1d(&[9.0, 2.0, 2.0], &[0, 0, 1], 2);
        let links = find_tomek_links(&set, &SamplerConfig::default()).unwrap();
        assert_eq!(links, vec![TomekLink { a: 1, b: 2 }]);
    }

    #[test]
    fn too_small() {
        let set = points_1d(&[1.0], &[0], 1);
        assert!(matches!(find_tomek_links(&set, &SamplerConfig::default()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn removal_rules() {
        // class 0 has 5 members, class 1 has 2
        let set = points_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 10.0, 20.0], &[0, 0, 0, 0, 0, 1, 1], 2);
        let out = remove_tomek_majority(&set, &[TomekLink { a: 4, b: 5 }]).unwrap();
        assert_eq!(out.kept, vec![0, 1, 2, 3, 5, 6]);
        assert_eq!(out.set.len(), 6);

        let tie = points_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], &[0, 0, 0, 1, 1, 1], 2);
        let out = remove_tomek_majority(&tie, &[TomekLink { a: 2, b: 3 }]).unwrap();
        assert_eq!(out.kept, (0..6).collect::<Vec<_>>());
    }
}

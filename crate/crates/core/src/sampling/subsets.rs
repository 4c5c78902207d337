use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SamplerConfig;
use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};

pub const PLAN_MAGIC: &str = "LTSP1";

/// `N` balanced index lists over one embedding set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPlan {
    /// Each subset sorted ascending.
    pub subsets: Vec<Vec<usize>>,
    pub per_class_target: usize,
}

impl SubsetPlan {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Rewrites every index through `map` (e.g. back to rows of an
    /// earlier, larger set).
    pub fn remap(&self, map: &[usize]) -> SubsetPlan {
        SubsetPlan {
            subsets: self
                .subsets
                .iter()
                .map(|s| s.iter().map(|&i| map[i]).collect())
                .collect(),
            per_class_target: self.per_class_target,
        }
    }

    /// Text manifest: `LTSP1 <N> <target>` followed by one line of
    /// space-separated indices per subset.
    pub fn to_text(&self) -> String {
        let mut out = format!("{PLAN_MAGIC} {} {}\n", self.subsets.len(), self.per_class_target);
        for s in &self.subsets {
            let mut line = String::with_capacity(s.len() * 6);
            for (j, i) in s.iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                write!(line, "{i}").unwrap();
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SubsetPlan> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
        let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad integer {s:?} in subset plan")));
        if header.len() != 3 || header[0] != PLAN_MAGIC {
            return Err(Error::Format("subset plan must start with `LTSP1 <N> <target>`".into()));
        }
        let n = parse(header[1])?;
        let per_class_target = parse(header[2])?;
        let subsets: Vec<Vec<usize>> = lines
            .map(|l| l.split_whitespace().map(parse).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        if subsets.len() != n {
            return Err(Error::Format(format!("plan header says {n} subsets, found {}", subsets.len())));
        }
        Ok(SubsetPlan {
            subsets,
            per_class_target,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<SubsetPlan> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Seed for shuffle round `round` of class `class`.
fn derive_seed(seed: u64, class: usize, round: u64) -> u64 {
    // splitmix64 over the combined words
    let mut z = seed ^ (class as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ round.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `n_subsets` class-balanced subsets.
///
/// Classes larger than `per_class_target` are dealt out from a shuffled pool
/// without replacement across subsets; when a pool runs dry it is reshuffled
/// under a fresh seed. Smaller classes appear whole in every subset.
pub fn build_balanced_subsets(set: &EmbeddingSet, n_subsets: usize, per_class_target: usize, cfg: &SamplerConfig) -> Result<SubsetPlan> {
    if n_subsets == 0 {
        return Err(Error::Config("n_subsets must be >= 1".into()));
    }
    if per_class_target == 0 {
        return Err(Error::Target("per-class target must be >= 1".into()));
    }
    let mut subsets = vec![Vec::new(); n_subsets];
    for c in 0..set.n_classes() {
        let members = set.indices_of_class(c);
        if members.len() <= per_class_target {
            for s in subsets.iter_mut() {
                s.extend_from_slice(&members);
            }
            continue;
        }
        let mut round = 0u64;
        let mut pool = members.clone();
        pool.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, c, round)));
        let mut cursor = 0;
        for s in subsets.iter_mut() {
            let start = s.len();
            let mut deferred = Vec::new();
            while s.len() - start < per_class_target {
                if cursor == pool.len() {
                    round += 1;
                    pool = members.clone();
                    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, c, round)));
                    cursor = 0;
                }
                let i = pool[cursor];
                cursor += 1;
                // only possible right after a mid-subset reshuffle
                if s[start..].contains(&i) {
                    deferred.push(i);
                } else {
                    s.push(i);
                }
            }
            if !deferred.is_empty() {
                let rest = pool.split_off(cursor);
                pool = deferred;
                pool.extend(rest);
                cursor = 0;
            }
        }
    }
    for s in subsets.iter_mut() {
        s.sort_unstable();
    }
    Ok(SubsetPlan {
        subsets,
        per_class_target,
    })
}

//! Brute-force reference implementations and random instance builders shared
//! by the integration tests and the acceptance run.
//!
//! Nothing here calls into the library's search or sampling code; each
//! oracle recomputes its answer from pairwise distances.

#![allow(dead_code)]

use longtail_sar::embeddings::EmbeddingSet;
use longtail_sar::knn::Metric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn distance(metric: Metric, a: &[f32], b: &[f32]) -> f64 {
    match metric {
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (*x as f64 - *y as f64).powi(2))
            .sum::<f64>()
            .sqrt(),
        Metric::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
            let na = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                1.0
            } else {
                (1.0 - dot / (na * nb)).max(0.0)
            }
        }
    }
}

/// `k` nearest of `candidates` to `q`, ordered by (distance, index).
pub fn brute_knn(set: &EmbeddingSet, candidates: &[usize], q: &[f32], k: usize, metric: Metric) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = candidates.iter().map(|&i| (i, distance(metric, set.row(i), q))).collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Mutual nearest-neighbour pairs `(a, b)`, `a < b`, with different labels.
pub fn tomek_oracle(set: &EmbeddingSet, metric: Metric) -> Vec<(usize, usize)> {
    let n = set.len();
    let nn: Vec<Option<usize>> = (0..n)
        .map(|i| {
            let mut best: Option<(f64, usize)> = None;
            for j in (0..n).filter(|&j| j != i) {
                let d = distance(metric, set.row(i), set.row(j));
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            best.map(|(_, j)| j)
        })
        .collect();
    let mut links = Vec::new();
    for a in 0..n {
        if let Some(b) = nn[a] {
            if a < b && nn[b] == Some(a) && set.label(a) != set.label(b) {
                links.push((a, b));
            }
        }
    }
    links
}

/// Rows surviving link removal: the endpoint from the globally larger class
/// goes, equal classes keep both.
pub fn removal_oracle(set: &EmbeddingSet, links: &[(usize, usize)]) -> Vec<usize> {
    let mut counts = vec![0usize; set.n_classes()];
    for i in 0..set.len() {
        counts[set.label(i)] += 1;
    }
    let mut drop = vec![false; set.len()];
    for &(a, b) in links {
        let (ca, cb) = (counts[set.label(a)], counts[set.label(b)]);
        if ca > cb {
            drop[a] = true;
        } else if cb > ca {
            drop[b] = true;
        }
    }
    (0..set.len()).filter(|&i| !drop[i]).collect()
}

/// NearMiss-3 kept rows, computed class by class from the full distance
/// matrix.
pub fn nearmiss_oracle(set: &EmbeddingSet, targets: &[usize], metric: Metric, m: usize, k: usize) -> Vec<usize> {
    let n = set.len();
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| distance(metric, set.row(i), set.row(j))).collect())
        .collect();
    let nearest = |from: usize, pool: &[usize], count: usize| -> Vec<usize> {
        let mut p: Vec<usize> = pool.to_vec();
        p.sort_by(|&a, &b| dist[from][a].total_cmp(&dist[from][b]).then(a.cmp(&b)));
        p.truncate(count);
        p
    };
    let mut kept = Vec::new();
    for c in 0..set.n_classes() {
        let members: Vec<usize> = (0..n).filter(|&i| set.label(i) == c).collect();
        let others: Vec<usize> = (0..n).filter(|&i| set.label(i) != c).collect();
        let target = targets[c];
        if members.len() <= target {
            kept.extend(members);
            continue;
        }
        let mut short = vec![false; n];
        for &o in &others {
            for j in nearest(o, &members, m) {
                short[j] = true;
            }
        }
        let mut shortlist: Vec<usize> = members.iter().copied().filter(|&i| short[i]).collect();
        let mut pad = members.iter().copied().filter(|&i| !short[i]);
        while shortlist.len() < target {
            shortlist.push(pad.next().unwrap());
        }
        let mut scored: Vec<(usize, f64)> = shortlist
            .iter()
            .map(|&i| {
                if others.is_empty() {
                    return (i, 0.0);
                }
                let nb = nearest(i, &others, k);
                (i, nb.iter().map(|&j| dist[i][j]).sum::<f64>() / nb.len() as f64)
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        kept.extend(scored.into_iter().take(target).map(|(i, _)| i));
    }
    kept.sort_unstable();
    kept
}

/// One randomized sampling instance.
pub struct Instance {
    pub set: EmbeddingSet,
    pub metric: Metric,
    pub targets: Vec<usize>,
    pub m: usize,
    pub k: usize,
}

/// Skewed labels, and for Euclidean half of the instances on a small integer
/// grid so exact distance ties are common. Cosine instances stay continuous:
/// parallel grid vectors would tie only in exact arithmetic.
pub fn random_instance(seed: u64, max_n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_n);
    let dim = rng.random_range(2..=32);
    let n_classes = rng.random_range(2..=5);
    let metric = if rng.random_bool(0.5) { Metric::Euclidean } else { Metric::Cosine };
    let grid = metric == Metric::Euclidean && rng.random_bool(0.5);
    let weights: Vec<f64> = (0..n_classes).map(|c| 0.4f64.powi(c as i32)).collect();
    let total: f64 = weights.iter().sum();
    let labels: Vec<u32> = (0..n)
        .map(|_| {
            let mut u = rng.random_range(0.0..total);
            let mut c = 0;
            while c + 1 < n_classes && u >= weights[c] {
                u -= weights[c];
                c += 1;
            }
            c as u32
        })
        .collect();
    let vectors: Vec<f32> = labels
        .iter()
        .flat_map(|&l| (0..dim).map(move |d| (l as usize, d)).collect::<Vec<_>>())
        .map(|(l, d)| {
            if grid {
                rng.random_range(0..4) as f32
            } else {
                let shift = if d % n_classes == l { 1.0 } else { 0.0 };
                shift + rng.random_range(-1.0f32..1.0)
            }
        })
        .collect();
    let set = EmbeddingSet::new(dim, n_classes, vectors, labels).unwrap();
    let targets = set
        .class_counts()
        .iter()
        .map(|&c| if c == 0 { 1 } else { rng.random_range(1..=c) })
        .collect();
    Instance {
        set,
        metric,
        targets,
        m: rng.random_range(1..=4),
        k: rng.random_range(1..=4),
    }
}

/// Classification of an encoded embedding file derived from the byte
/// layout alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Valid,
    Format,
    Validation,
}

pub fn classify_embedding_bytes(bytes: &[u8]) -> Expected {
    if bytes.len() < 5 || &bytes[..5] != b"LTEB1" || bytes.len() < 17 {
        return Expected::Format;
    }
    let word = |at: usize| u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]) as u128;
    let (n, dim, n_classes) = (word(5), word(9), word(13));
    if bytes.len() as u128 != 17 + n * (4 + 4 * dim) {
        return Expected::Format;
    }
    if n == 0 || dim == 0 || n_classes > 65_536 {
        return Expected::Validation;
    }
    let rec = 4 + 4 * dim as usize;
    for r in 0..n as usize {
        let at = 17 + r * rec;
        if word(at) >= n_classes {
            return Expected::Validation;
        }
        for d in 0..dim as usize {
            let f = f32::from_le_bytes(bytes[at + 4 + 4 * d..at + 8 + 4 * d].try_into().unwrap());
            if !f.is_finite() {
                return Expected::Validation;
            }
        }
    }
    Expected::Valid
}

/// A fuzzed embedding file: random bytes, or a valid encoding with one
/// structural or content defect (or none).
pub fn fuzz_embedding_bytes(rng: &mut ChaCha8Rng) -> Vec<u8> {
    if rng.random_bool(0.1) {
        let len = rng.random_range(0..64);
        let mut b: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        if rng.random_bool(0.5) && b.len() >= 5 {
            b[..5].copy_from_slice(b"LTEB1");
        }
        return b;
    }
    let n = rng.random_range(1..6usize);
    let dim = rng.random_range(1..5usize);
    let n_classes = rng.random_range(1..5u32);
    let mut b = b"LTEB1".to_vec();
    for v in [n as u32, dim as u32, n_classes] {
        b.extend_from_slice(&v.to_le_bytes());
    }
    for _ in 0..n {
        b.extend_from_slice(&rng.random_range(0..n_classes).to_le_bytes());
        for _ in 0..dim {
            b.extend_from_slice(&rng.random_range(-10.0f32..10.0).to_le_bytes());
        }
    }
    let float_at = |rng: &mut ChaCha8Rng| {
        let r = rng.random_range(0..n);
        17 + r * (4 + 4 * dim) + 4 + 4 * rng.random_range(0..dim)
    };
    match rng.random_range(0..11) {
        0 => {}
        1 => b.truncate(rng.random_range(0..b.len())),
        2 => b.extend((0..rng.random_range(1..9)).map(|_| rng.random::<u8>())),
        3 => {
            let i = rng.random_range(0..5);
            b[i] ^= 1 << rng.random_range(0..8);
        }
        4 => {
            // header word replaced by a random or extreme value
            let at = 5 + 4 * rng.random_range(0..3);
            let v: u32 = match rng.random_range(0..3) {
                0 => 0,
                1 => u32::MAX,
                _ => rng.random_range(0..100_000),
            };
            b[at..at + 4].copy_from_slice(&v.to_le_bytes());
        }
        5 => {
            let r = rng.random_range(0..n);
            let at = 17 + r * (4 + 4 * dim);
            let v = n_classes + rng.random_range(0..3);
            b[at..at + 4].copy_from_slice(&v.to_le_bytes());
        }
        6 => {
            let at = float_at(rng);
            let v = [f32::NAN, f32::INFINITY, f32::NEG_INFINITY][rng.random_range(0..3)];
            b[at..at + 4].copy_from_slice(&v.to_le_bytes());
        }
        7 => {
            // raw exponent bits all set: NaN or infinity
            let at = float_at(rng);
            b[at + 3] |= 0x7f;
            b[at + 2] |= 0x80;
        }
        8 => {
            let at = rng.random_range(0..b.len());
            b[at] ^= 1 << rng.random_range(0..8);
        }
        9 => {
            let at = 13;
            let v = 65_536 + rng.random_range(0..3u32);
            b[at..at + 4].copy_from_slice(&v.to_le_bytes());
        }
        _ => {
            let extra = rng.random_range(1..3) * (4 + 4 * dim);
            b.extend(std::iter::repeat_n(0u8, extra));
        }
    }
    b
}

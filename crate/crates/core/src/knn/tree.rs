//! Bucketed kd-tree over prepared `f64` points.
//!
//! Points are permuted into tree order at build time so every node covers a
//! contiguous slice. The search keeps the exact `k` best `(key, rank)` pairs
//! and prunes a subtree only when its lower bound is strictly worse than the
//! current k-th candidate, so ties are always resolved by rank.

use super::Metric;

pub(crate) const LEAF_SIZE: usize = 16;

// relative slack on pruning bounds, absorbs rounding in the incremental
// offset distance
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
    Leaf { start: usize, end: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct KdTree {
    pub dim: usize,
    pub nodes: Vec<Node>,
    /// Prepared coordinates in tree order.
    pub points: Vec<f64>,
    /// Rank (position in the index's sorted row order) of each tree slot.
    pub ranks: Vec<u32>,
}

impl KdTree {
    /// Builds over `points` (row-major). With `brute_force` the tree is a
    /// single leaf.
    pub fn build(points: &[f64], dim: usize, brute_force: bool) -> KdTree {
        let n = points.len() / dim;
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::new();
        if brute_force {
            nodes.push(Node::Leaf { start: 0, end: n });
        } else {
            build_node(points, dim, &mut order, 0, &mut nodes);
        }
        let mut tree_points = Vec::with_capacity(points.len());
        for &i in &order {
            let i = i as usize;
            tree_points.extend_from_slice(&points[i * dim..(i + 1) * dim]);
        }
        KdTree {
            dim,
            nodes,
            points: tree_points,
            ranks: order,
        }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    /// The `k` smallest `(key, rank)` pairs, ascending.
    pub fn knn(&self, metric: Metric, q: &[f64], k: usize) -> Vec<(f64, u32)> {
        let mut best = Candidates::new(k.min(self.len()));
        let mut off = vec![0.0; self.dim];
        self.search(0, metric, q, 0.0, &mut off, &mut best);
        best.items
    }

    /// `rd` is a lower bound on the squared distance from `q` to any point
    /// under `node`, built from the per-axis offsets in `off`.
    fn search(&self, node: usize, metric: Metric, q: &[f64], rd: f64, off: &mut [f64], best: &mut Candidates) {
        match self.nodes[node] {
            Node::Leaf { start, end } => self.scan(start, end, metric, q, best),
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, metric, q, rd, off, best);
                let old = off[axis];
                let far_rd = rd - old * old + diff * diff;
                if best.admits(metric.lower_bound(far_rd * (1.0 - BOUND_SLACK))) {
                    off[axis] = diff;
                    self.search(far, metric, q, far_rd, off, best);
                    off[axis] = old;
                }
            }
        }
    }

    #[inline]
    fn scan(&self, start: usize, end: usize, metric: Metric, q: &[f64], best: &mut Candidates) {
        let points = &self.points[start * self.dim..end * self.dim];
        let ranks = &self.ranks[start..end];
        if metric == Metric::Euclidean {
            let mut limit = best.worst();
            for (p, &rank) in points.chunks_exact(self.dim).zip(ranks) {
                if let Some(d) = bounded_sq_dist(q, p, limit) {
                    best.offer(d, rank);
                    limit = best.worst();
                }
            }
        } else {
            for (p, &rank) in points.chunks_exact(self.dim).zip(ranks) {
                best.offer(metric.key(q, p), rank);
            }
        }
    }
}

/// Squared Euclidean distance with four interleaved accumulators, or
/// `None` once a partial sum exceeds `limit`. Accumulators only grow, so
/// `None` means the full sum is `> limit` as well. [`sq_dist`] runs the same
/// arithmetic, so both agree bitwise.
#[inline]
pub(crate) fn bounded_sq_dist(a: &[f64], b: &[f64], limit: f64) -> Option<f64> {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in ca.by_ref().zip(cb.by_ref()) {
        for i in 0..4 {
            let d = x[i] - y[i];
            acc[i] += d * d;
        }
        if (acc[0] + acc[1]) + (acc[2] + acc[3]) > limit {
            return None;
        }
    }
    for (i, (x, y)) in ca.remainder().iter().zip(cb.remainder()).enumerate() {
        acc[i] += (x - y) * (x - y);
    }
    let total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    (total <= limit).then_some(total)
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    bounded_sq_dist(a, b, f64::INFINITY).unwrap_or(f64::INFINITY)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in ca.by_ref().zip(cb.by_ref()) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    for (i, (x, y)) in ca.remainder().iter().zip(cb.remainder()).enumerate() {
        acc[i] += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

fn build_node(points: &[f64], dim: usize, order: &mut [u32], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    let n = order.len();
    let leaf = Node::Leaf {
        start: offset,
        end: offset + n,
    };
    if n <= LEAF_SIZE {
        nodes.push(leaf);
        return id;
    }
    let coord = |i: u32, a: usize| points[i as usize * dim + a];
    let mut axis = 0;
    let mut widest = -1.0;
    for a in 0..dim {
        let (lo, hi) = order
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(coord(i, a)), hi.max(coord(i, a))));
        if hi - lo > widest {
            widest = hi - lo;
            axis = a;
        }
    }
    if widest <= 0.0 {
        // all points coincide
        nodes.push(leaf);
        return id;
    }
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&a, &b| coord(a, axis).total_cmp(&coord(b, axis)).then(a.cmp(&b)));
    let value = coord(order[mid], axis);
    nodes.push(leaf);
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(points, dim, lo, offset, nodes);
    let right = build_node(points, dim, hi, offset + mid, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}

/// Sorted, bounded list of the best candidates seen so far.
struct Candidates {
    cap: usize,
    items: Vec<(f64, u32)>,
}

impl Candidates {
    fn new(cap: usize) -> Self {
        Candidates {
            cap,
            items: Vec::with_capacity(cap + 1),
        }
    }

    #[inline]
    fn less(a: (f64, u32), b: (f64, u32)) -> bool {
        a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
    }

    #[inline]
    fn offer(&mut self, key: f64, rank: u32) {
        if self.cap == 0 {
            return;
        }
        let cand = (key, rank);
        if self.items.len() == self.cap && !Self::less(cand, self.items[self.cap - 1]) {
            return;
        }
        let pos = self.items.partition_point(|&it| Self::less(it, cand));
        self.items.insert(pos, cand);
        self.items.truncate(self.cap);
    }

    /// Largest key that can still enter: the k-th best once full.
    #[inline]
    fn worst(&self) -> f64 {
        if self.cap > 0 && self.items.len() == self.cap {
            self.items[self.cap - 1].0
        } else {
            f64::INFINITY
        }
    }

    /// Whether a subtree whose keys are all `>= bound` might still contribute.
    #[inline]
    fn admits(&self, bound: f64) -> bool {
        self.cap > 0 && (self.items.len() < self.cap || bound <= self.items[self.cap - 1].0)
    }
}

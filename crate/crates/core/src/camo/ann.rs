//! Nearest-neighbour search over patch descriptors.
//!
//! `eps == 0` runs an exhaustive scan, which is exact and breaks distance
//! ties by the lowest corpus index. `eps > 0` searches a k-d tree and
//! returns an index within `(1 + eps)` of the true nearest distance.

use alloc::vec::Vec;

use crate::{Error, Result};

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest corpus vector for each query.
pub fn nn_match<Q, C>(queries: &[Q], corpus: &[C], eps: f64) -> Result<Vec<usize>>
where
    Q: AsRef<[f64]>,
    C: AsRef<[f64]>,
{
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter("eps must be a finite non-negative number"));
    }
    if eps == 0.0 {
        return Ok(queries.iter().map(|q| exhaustive(q.as_ref(), corpus)).collect());
    }
    let tree = KdTree::build(corpus);
    Ok(queries.iter().map(|q| tree.nearest(q.as_ref(), eps)).collect())
}

/// Exact scan; the first index wins among equal distances.
pub fn exhaustive<C: AsRef<[f64]>>(query: &[f64], corpus: &[C]) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for (i, c) in corpus.iter().enumerate() {
        let d = dist_sq(query, c.as_ref());
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

const LEAF_SIZE: usize = 8;

enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

/// A k-d tree over borrowed vectors, split on the dimension of largest spread.
pub struct KdTree<'a, C> {
    corpus: &'a [C],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a, C: AsRef<[f64]>> KdTree<'a, C> {
    pub fn build(corpus: &'a [C]) -> Self {
        let mut tree = Self { corpus, order: (0..corpus.len()).collect(), nodes: Vec::new() };
        if !corpus.is_empty() {
            tree.build_node(0, corpus.len());
        }
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dims = self.corpus[self.order[start]].as_ref().len();
        let (mut best_dim, mut best_spread) = (0, -1.0);
        for d in 0..dims {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let v = self.corpus[i].as_ref()[d];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_dim = d;
            }
        }
        if best_spread <= 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let corpus = self.corpus;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            corpus[a].as_ref()[best_dim].total_cmp(&corpus[b].as_ref()[best_dim]).then(a.cmp(&b))
        });
        let value = corpus[self.order[mid]].as_ref()[best_dim];
        self.nodes.push(Node::Split { dim: best_dim, value, left: 0, right: 0 });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split { dim: best_dim, value, left, right };
        id
    }

    /// Approximate nearest neighbour within factor `1 + eps` of the optimum.
    pub fn nearest(&self, query: &[f64], eps: f64) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        let shrink = 1.0 / ((1.0 + eps) * (1.0 + eps));
        self.search(0, query, shrink, &mut best);
        best.1
    }

    fn search(&self, node: usize, query: &[f64], shrink: f64, best: &mut (f64, usize)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = dist_sq(query, self.corpus[i].as_ref());
                    if d < best.0 || (d == best.0 && i < best.1) {
                        *best = (d, i);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = query[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, shrink, best);
                if diff * diff <= best.0 * shrink {
                    self.search(far, query, shrink, best);
                }
            }
        }
    }
}

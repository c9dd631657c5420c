//! Seriation of the VIVI matrix.
//!
//! Interactions are treated as similarities: dissimilarity is
//! `max_kl(s_kl) - s_ij`, clustered agglomeratively. The resulting dendrogram
//! fixes which variables may sit next to each other; flipping internal nodes
//! then sorts the leaves so that a combined weight
//!
//! ```text
//! w_i = lambda1 * v~_i + lambda2 * max_{j!=i} s~_ij
//! ```
//!
//! (importance and interaction rescaled to unit range) is generally
//! decreasing left to right. At each internal node the subtree with the
//! larger maximum weight comes first; ties fall back to the subtree mean,
//! then the smallest leaf index. With `lambda2 = 0` (or `lambda1 = 0`) the
//! dendrogram constraint is bypassed entirely and variables sort purely by
//! descending importance (resp. max interaction), since pure descending
//! order is not generally reachable through flips.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::vivi::ViviMatrix;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Linkage {
    Average,
    Complete,
    Single,
}

/// One agglomeration step. Node ids: `0..n_leaves` are leaves, `n_leaves + i`
/// is the cluster created by merge `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn root(&self) -> usize {
        self.n_leaves + self.merges.len() - 1
    }

    /// Leaf indices under a node, in current (unflipped) order.
    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        if node < self.n_leaves {
            return vec![node];
        }
        let m = &self.merges[node - self.n_leaves];
        let mut out = self.leaves_under(m.a);
        out.extend(self.leaves_under(m.b));
        out
    }
}

/// Agglomerative clustering of a dissimilarity matrix (row-major n x n).
/// Ties pick the pair whose smallest leaf index is smallest.
pub fn linkage_cluster(d: &[f64], n: usize, linkage: Linkage) -> Result<Dendrogram> {
    if n < 2 {
        return Err(Error::arg("clustering needs at least 2 items"));
    }
    debug_assert_eq!(d.len(), n * n);

    struct Cluster {
        node: usize,
        members: Vec<usize>,
        min_leaf: usize,
    }
    let mut active: Vec<Cluster> = (0..n)
        .map(|i| Cluster { node: i, members: vec![i], min_leaf: i })
        .collect();
    let mut merges = Vec::with_capacity(n - 1);

    let cluster_distance = |a: &Cluster, b: &Cluster| -> f64 {
        let mut acc = match linkage {
            Linkage::Average => 0.0,
            Linkage::Complete => f64::NEG_INFINITY,
            Linkage::Single => f64::INFINITY,
        };
        for &i in &a.members {
            for &j in &b.members {
                let dij = d[i * n + j];
                match linkage {
                    Linkage::Average => acc += dij,
                    Linkage::Complete => acc = acc.max(dij),
                    Linkage::Single => acc = acc.min(dij),
                }
            }
        }
        if linkage == Linkage::Average {
            acc /= (a.members.len() * b.members.len()) as f64;
        }
        acc
    };

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in 0..active.len() {
            for y in (x + 1)..active.len() {
                let dist = cluster_distance(&active[x], &active[y]);
                let better = match &best {
                    None => true,
                    Some((bd, bx, by)) => {
                        let key = |p: usize, q: usize| {
                            let (lp, lq) = (active[p].min_leaf, active[q].min_leaf);
                            (lp.min(lq), lp.max(lq))
                        };
                        dist < *bd || (dist == *bd && key(x, y) < key(*bx, *by))
                    }
                };
                if better {
                    best = Some((dist, x, y));
                }
            }
        }
        let (height, x, y) = best.expect("at least one pair");
        let (x, y) = (x.min(y), x.max(y));
        let cy = active.swap_remove(y);
        let cx = active.swap_remove(x);
        // Child with the smaller leading leaf goes first.
        let (first, second) =
            if cx.min_leaf <= cy.min_leaf { (&cx, &cy) } else { (&cy, &cx) };
        merges.push(Merge { a: first.node, b: second.node, height });
        let mut members = cx.members.clone();
        members.extend(&cy.members);
        active.push(Cluster {
            node: n + merges.len() - 1,
            members,
            min_leaf: cx.min_leaf.min(cy.min_leaf),
        });
    }

    Ok(Dendrogram { n_leaves: n, merges })
}

/// Clusters the matrix's interactions as similarities:
/// `d_ij = max_kl(s_kl) - s_ij`.
pub fn cluster_interactions(m: &ViviMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let p = m.p();
    if p < 2 {
        return Err(Error::arg("seriation clustering needs at least 2 variables"));
    }
    let mut max_s = f64::NEG_INFINITY;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                max_s = max_s.max(m.get(i, j));
            }
        }
    }
    let mut d = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            if i != j {
                d[i * p + j] = max_s - m.get(i, j);
            }
        }
    }
    linkage_cluster(&d, p, linkage)
}

/// A display ordering of the matrix variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ordering {
    /// Variable indices, first-to-display first.
    pub order: Vec<usize>,
    /// Combined weight per variable (original index).
    pub weights: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Ordering {
    pub fn names(&self, m: &ViviMatrix) -> Vec<String> {
        self.order.iter().map(|&i| m.names[i].clone()).collect()
    }
}

fn unit_range(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > min {
        values.iter().map(|v| (v - min) / (max - min)).collect()
    } else {
        vec![0.0; values.len()]
    }
}

fn sort_desc_by(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[b].partial_cmp(&keys[a]).unwrap().then(a.cmp(&b)));
    idx
}

/// Weighted leaf sort. The dendrogram's internal nodes are flipped so the
/// subtree with the larger maximum weight comes first; the resulting
/// left-to-right leaf order is returned. Pure importance (`lambda2 = 0`) and
/// pure interaction (`lambda1 = 0`) orderings bypass the dendrogram.
pub fn leaf_sort(d: &Dendrogram, m: &ViviMatrix, lambda1: f64, lambda2: f64) -> Result<Ordering> {
    let p = m.p();
    if d.n_leaves != p {
        return Err(Error::arg("dendrogram and matrix disagree on variable count"));
    }
    if lambda1 < 0.0 || lambda2 < 0.0 || lambda1 + lambda2 <= 0.0 {
        return Err(Error::arg("lambda weights must be non-negative and not both zero"));
    }
    let importance: Vec<f64> = (0..p).map(|i| m.importance(i)).collect();
    let max_inter: Vec<f64> = (0..p).map(|i| m.max_interaction(i)).collect();
    let v = unit_range(&importance);
    let s = unit_range(&max_inter);
    let weights: Vec<f64> =
        (0..p).map(|i| lambda1 * v[i] + lambda2 * s[i]).collect();

    let order = if lambda2 == 0.0 {
        sort_desc_by(&importance)
    } else if lambda1 == 0.0 {
        sort_desc_by(&max_inter)
    } else {
        flip_order(d, &weights)
    };
    Ok(Ordering { order, weights, lambda1, lambda2 })
}

fn flip_order(d: &Dendrogram, weights: &[f64]) -> Vec<usize> {
    // (max weight, mean weight, min leaf) per node, computed bottom-up.
    struct Summary {
        max: f64,
        sum: f64,
        count: usize,
        min_leaf: usize,
    }
    let total = d.n_leaves + d.merges.len();
    let mut info: Vec<Summary> = Vec::with_capacity(total);
    for (leaf, &w) in weights.iter().enumerate().take(d.n_leaves) {
        info.push(Summary { max: w, sum: w, count: 1, min_leaf: leaf });
    }
    for merge in &d.merges {
        let (a, b) = (merge.a, merge.b);
        info.push(Summary {
            max: info[a].max.max(info[b].max),
            sum: info[a].sum + info[b].sum,
            count: info[a].count + info[b].count,
            min_leaf: info[a].min_leaf.min(info[b].min_leaf),
        });
    }
    let first_cmp = |a: usize, b: usize| -> bool {
        // True when node a should precede node b.
        let (ia, ib) = (&info[a], &info[b]);
        if ia.max != ib.max {
            return ia.max > ib.max;
        }
        let (ma, mb) = (ia.sum / ia.count as f64, ib.sum / ib.count as f64);
        if ma != mb {
            return ma > mb;
        }
        ia.min_leaf < ib.min_leaf
    };
    let mut out = Vec::with_capacity(d.n_leaves);
    let mut stack = vec![d.root()];
    while let Some(node) = stack.pop() {
        if node < d.n_leaves {
            out.push(node);
            continue;
        }
        let m = &d.merges[node - d.n_leaves];
        let (first, second) = if first_cmp(m.a, m.b) { (m.a, m.b) } else { (m.b, m.a) };
        // Stack is LIFO: push the second child first.
        stack.push(second);
        stack.push(first);
    }
    out
}

/// True when every internal node's leaves occupy a contiguous block of the
/// ordering (i.e. the ordering is reachable from the dendrogram by flips).
pub fn is_dendrogram_consistent(d: &Dendrogram, order: &[usize]) -> bool {
    let mut position = vec![usize::MAX; d.n_leaves];
    for (pos, &leaf) in order.iter().enumerate() {
        if leaf >= d.n_leaves || position[leaf] != usize::MAX {
            return false;
        }
        position[leaf] = pos;
    }
    for i in 0..d.merges.len() {
        let leaves = d.leaves_under(d.n_leaves + i);
        let mut pos: Vec<usize> = leaves.iter().map(|&l| position[l]).collect();
        pos.sort_unstable();
        if pos[pos.len() - 1] - pos[0] + 1 != pos.len() {
            return false;
        }
    }
    true
}

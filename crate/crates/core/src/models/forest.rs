//! Random forest: bagged CART trees with impurity-decrease importance.
//!
//! Regression splits minimize the summed squared error of the children,
//! classification splits minimize Gini impurity. Categorical features use a
//! binary level-subset split, greedily scanned along levels ordered by mean
//! response (regression) or first-class proportion (classification).
//!
//! Determinism: all random choices (bootstrap rows, per-node candidate
//! features) come from per-tree ChaCha streams, and candidate features are
//! drawn over the name-sorted feature order, so refitting with the same seed
//! reproduces the forest exactly and permuting the training columns does not
//! change predictions.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::models::{
    encode_response, resolve_features, FeatView, Feature, FeatureKind, Predictions, Predictor,
    ResponseStore, Task,
};
use crate::rng;
use crate::tabular::Table;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Minimum rows in each child; a node splits only when it holds at least
    /// `2 * min_node` rows.
    pub min_node: usize,
    /// Candidate features per node; 0 selects ceil(p/3) for regression and
    /// ceil(sqrt(p)) for classification.
    pub mtry: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 100, min_node: 5, mtry: 0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum SplitRule {
    /// Go left when value <= threshold.
    Numeric { threshold: f64 },
    /// Go left when the level code is flagged.
    Levels { left: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    /// Regression: one value. Classification: class proportions.
    Leaf { value: Vec<f64> },
    Split { feature: usize, rule: SplitRule, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    /// Seed of the ChaCha stream that produced this tree's bootstrap and
    /// candidate draws.
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Forest {
    task: Task,
    features: Vec<Feature>,
    feature_names: Vec<String>,
    trees: Vec<Tree>,
    /// Total impurity decrease per feature, summed over trees.
    impurity_acc: Vec<f64>,
    pub config: ForestConfig,
}

/// Response values gathered for one tree node.
struct NodeStats {
    n: f64,
    sum: f64,
    sumsq: f64,
    counts: Vec<f64>,
}

impl NodeStats {
    fn new(n_classes: usize) -> Self {
        NodeStats { n: 0.0, sum: 0.0, sumsq: 0.0, counts: vec![0.0; n_classes] }
    }

    fn add(&mut self, y: &ResponseStore, row: usize) {
        self.n += 1.0;
        match y {
            ResponseStore::Reg(v) => {
                self.sum += v[row];
                self.sumsq += v[row] * v[row];
            }
            ResponseStore::Cls { codes, .. } => {
                self.counts[codes[row] as usize] += 1.0;
            }
        }
    }

    fn remove(&mut self, y: &ResponseStore, row: usize) {
        self.n -= 1.0;
        match y {
            ResponseStore::Reg(v) => {
                self.sum -= v[row];
                self.sumsq -= v[row] * v[row];
            }
            ResponseStore::Cls { codes, .. } => {
                self.counts[codes[row] as usize] -= 1.0;
            }
        }
    }

    /// SSE for regression, n * Gini for classification. Both are summed-over-
    /// rows impurities, so parent - left - right is the decrease.
    fn impurity(&self, regression: bool) -> f64 {
        if self.n <= 0.0 {
            return 0.0;
        }
        let imp = if regression {
            self.sumsq - self.sum * self.sum / self.n
        } else {
            self.n - self.counts.iter().map(|c| c * c).sum::<f64>() / self.n
        };
        imp.max(0.0)
    }

    fn merged(a: &NodeStats, b: &NodeStats) -> NodeStats {
        NodeStats {
            n: a.n + b.n,
            sum: a.sum + b.sum,
            sumsq: a.sumsq + b.sumsq,
            counts: a.counts.iter().zip(&b.counts).map(|(x, y)| x + y).collect(),
        }
    }
}

struct TreeBuilder<'a> {
    views: &'a [FeatView<'a>],
    features: &'a [Feature],
    /// Feature indices in name-sorted order; RNG draws operate on this order.
    sorted_feats: &'a [usize],
    y: &'a ResponseStore,
    regression: bool,
    n_classes: usize,
    min_node: usize,
    mtry: usize,
    nodes: Vec<Node>,
    acc: Vec<f64>,
}

struct BestSplit {
    decrease: f64,
    feature: usize,
    rule: SplitRule,
}

impl TreeBuilder<'_> {
    fn stats_of(&self, rows: &[usize]) -> NodeStats {
        let mut s = NodeStats::new(self.n_classes);
        for &r in rows {
            s.add(self.y, r);
        }
        s
    }

    fn leaf(&mut self, rows: &[usize], stats: &NodeStats) -> usize {
        let value = if self.regression {
            let y = match self.y {
                ResponseStore::Reg(v) => v,
                _ => unreachable!(),
            };
            let first = y[rows[0]];
            // Exact constant leaves for constant responses.
            let v = if rows.iter().all(|&r| y[r] == first) {
                first
            } else {
                stats.sum / stats.n
            };
            vec![v]
        } else {
            stats.counts.iter().map(|c| c / stats.n).collect()
        };
        self.nodes.push(Node::Leaf { value });
        self.nodes.len() - 1
    }

    fn grow(&mut self, rows: Vec<usize>, rng: &mut rng::Rng) -> usize {
        let stats = self.stats_of(&rows);
        let parent_impurity = stats.impurity(self.regression);
        if rows.len() < 2 * self.min_node || parent_impurity <= 1e-12 {
            return self.leaf(&rows, &stats);
        }
        let picks =
            rng::sample_without_replacement(rng, self.sorted_feats.len(), self.mtry);
        let mut best: Option<BestSplit> = None;
        for pick in picks {
            let feature = self.sorted_feats[pick];
            let cand = match &self.views[feature] {
                FeatView::Num(values) => {
                    self.best_numeric_split(&rows, &stats, parent_impurity, feature, values)
                }
                FeatView::Cat(codes) => {
                    let n_levels = match &self.features[feature].kind {
                        FeatureKind::Categorical { levels } => levels.len(),
                        _ => unreachable!(),
                    };
                    self.best_level_split(&rows, &stats, parent_impurity, feature, codes, n_levels)
                }
            };
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.decrease > b.decrease) {
                    best = Some(c);
                }
            }
        }
        let Some(best) = best else {
            return self.leaf(&rows, &stats);
        };
        if best.decrease <= 1e-12 {
            return self.leaf(&rows, &stats);
        }
        self.acc[best.feature] += best.decrease;

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| goes_left(&best.rule, &self.views[best.feature], r));
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

        let placeholder = self.nodes.len();
        self.nodes.push(Node::Leaf { value: vec![] });
        let left = self.grow(left_rows, rng);
        let right = self.grow(right_rows, rng);
        self.nodes[placeholder] =
            Node::Split { feature: best.feature, rule: best.rule, left, right };
        placeholder
    }

    fn best_numeric_split(
        &self,
        rows: &[usize],
        stats: &NodeStats,
        parent_impurity: f64,
        feature: usize,
        values: &[f64],
    ) -> Option<BestSplit> {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| {
            values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b))
        });
        let m = order.len();
        let mut left = NodeStats::new(self.n_classes);
        let mut right =
            NodeStats { n: stats.n, sum: stats.sum, sumsq: stats.sumsq, counts: stats.counts.clone() };
        let mut best: Option<(f64, f64)> = None; // (decrease, threshold)
        for i in 1..m {
            left.add(self.y, order[i - 1]);
            right.remove(self.y, order[i - 1]);
            let (prev, cur) = (values[order[i - 1]], values[order[i]]);
            if prev == cur {
                continue;
            }
            if i < self.min_node || m - i < self.min_node {
                continue;
            }
            let decrease =
                parent_impurity - left.impurity(self.regression) - right.impurity(self.regression);
            if best.is_none_or(|(d, _)| decrease > d) {
                let mut threshold = prev + (cur - prev) / 2.0;
                // Keep the realized partition identical to the scored one.
                if threshold >= cur {
                    threshold = prev;
                }
                best = Some((decrease, threshold));
            }
        }
        best.map(|(decrease, threshold)| BestSplit {
            decrease,
            feature,
            rule: SplitRule::Numeric { threshold },
        })
    }

    fn best_level_split(
        &self,
        rows: &[usize],
        stats: &NodeStats,
        parent_impurity: f64,
        feature: usize,
        codes: &[u32],
        n_levels: usize,
    ) -> Option<BestSplit> {
        let mut per_level: Vec<NodeStats> =
            (0..n_levels).map(|_| NodeStats::new(self.n_classes)).collect();
        for &r in rows {
            per_level[codes[r] as usize].add(self.y, r);
        }
        // Greedy subset scan over levels ordered by mean response
        // (regression) or first-class proportion (classification).
        let mut present: Vec<usize> = (0..n_levels).filter(|&l| per_level[l].n > 0.0).collect();
        if present.len() < 2 {
            return None;
        }
        let key = |l: usize| -> f64 {
            let s = &per_level[l];
            if self.regression {
                s.sum / s.n
            } else {
                s.counts[0] / s.n
            }
        };
        present.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap().then(a.cmp(&b)));

        let mut left = NodeStats::new(self.n_classes);
        let mut right =
            NodeStats { n: stats.n, sum: stats.sum, sumsq: stats.sumsq, counts: stats.counts.clone() };
        let mut best: Option<(f64, usize)> = None; // (decrease, prefix length)
        for t in 1..present.len() {
            let moved = &per_level[present[t - 1]];
            left = NodeStats::merged(&left, moved);
            right.n -= moved.n;
            right.sum -= moved.sum;
            right.sumsq -= moved.sumsq;
            for (rc, mc) in right.counts.iter_mut().zip(&moved.counts) {
                *rc -= mc;
            }
            if (left.n as usize) < self.min_node || (right.n as usize) < self.min_node {
                continue;
            }
            let decrease =
                parent_impurity - left.impurity(self.regression) - right.impurity(self.regression);
            if best.is_none_or(|(d, _)| decrease > d) {
                best = Some((decrease, t));
            }
        }
        best.map(|(decrease, t)| {
            let mut left_set = vec![false; n_levels];
            for &l in &present[..t] {
                left_set[l] = true;
            }
            BestSplit { decrease, feature, rule: SplitRule::Levels { left: left_set } }
        })
    }
}

fn goes_left(rule: &SplitRule, view: &FeatView<'_>, row: usize) -> bool {
    match (rule, view) {
        (SplitRule::Numeric { threshold }, FeatView::Num(v)) => v[row] <= *threshold,
        (SplitRule::Levels { left }, FeatView::Cat(codes)) => left[codes[row] as usize],
        _ => unreachable!("rule kind matches feature kind by construction"),
    }
}

/// Fits a bagged CART forest. Deterministic given the config seed.
pub fn forest_fit(train: &Table, config: ForestConfig) -> Result<Forest> {
    if config.n_trees == 0 {
        return Err(Error::arg("n_trees must be at least 1"));
    }
    let (task, y) = encode_response(train)?;
    let features = Feature::list_from_table(train);
    let p = features.len();
    if p == 0 {
        return Err(Error::data("no feature columns"));
    }
    let mtry = if config.mtry == 0 {
        if task.is_classification() {
            (p as f64).sqrt().ceil() as usize
        } else {
            (p as f64 / 3.0).ceil() as usize
        }
    } else {
        config.mtry
    };
    if mtry > p {
        return Err(Error::arg(format!("mtry {mtry} exceeds feature count {p}")));
    }
    let min_node = config.min_node.max(1);
    let views = resolve_features(&features, train)?;
    let mut sorted_feats: Vec<usize> = (0..p).collect();
    sorted_feats.sort_by(|&a, &b| features[a].name.cmp(&features[b].name));

    let n = train.n();
    let n_classes = task.n_classes();
    let regression = !task.is_classification();

    let mut trees = Vec::with_capacity(config.n_trees);
    let mut impurity_acc = vec![0.0; p];
    for t in 0..config.n_trees {
        let tree_seed = config.seed;
        let mut tree_rng = rng::stream(tree_seed, "tree", t as u64);
        let rows: Vec<usize> = (0..n).map(|_| rng::index(&mut tree_rng, n)).collect();
        let mut builder = TreeBuilder {
            views: &views,
            features: &features,
            sorted_feats: &sorted_feats,
            y: &y,
            regression,
            n_classes,
            min_node,
            mtry,
            nodes: Vec::new(),
            acc: vec![0.0; p],
        };
        builder.grow(rows, &mut tree_rng);
        for (a, d) in impurity_acc.iter_mut().zip(&builder.acc) {
            *a += d;
        }
        trees.push(Tree { nodes: builder.nodes, seed: tree_seed });
    }

    Ok(Forest {
        task,
        feature_names: features.iter().map(|f| f.name.clone()).collect(),
        features,
        trees,
        impurity_acc,
        config: ForestConfig { mtry, min_node, ..config },
    })
}

impl Forest {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Total impurity decrease credited to each feature, divided by the
    /// number of trees. Features never split on score exactly 0.
    pub fn embedded_importance_values(&self) -> Vec<f64> {
        let t = self.trees.len() as f64;
        self.impurity_acc.iter().map(|a| a / t).collect()
    }

    /// Concatenates two forests fitted on the same schema; importance
    /// accumulators add, so the merged importance is the tree-count-weighted
    /// mean of the parts.
    pub fn merge(mut self, other: Forest) -> Result<Forest> {
        if self.task != other.task || self.features != other.features {
            return Err(Error::model("cannot merge forests with different schemas"));
        }
        self.trees.extend(other.trees);
        for (a, b) in self.impurity_acc.iter_mut().zip(&other.impurity_acc) {
            *a += b;
        }
        Ok(self)
    }

    fn predict_row<'t>(&self, tree: &'t Tree, views: &[FeatView<'_>], row: usize) -> &'t [f64] {
        let mut at = 0usize;
        loop {
            match &tree.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split { feature, rule, left, right } => {
                    at = if goes_left(rule, &views[*feature], row) { *left } else { *right };
                }
            }
        }
    }
}

impl Predictor for Forest {
    fn task(&self) -> &Task {
        &self.task
    }

    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, rows: &Table) -> Result<Predictions> {
        let views = resolve_features(&self.features, rows)?;
        let m = rows.n();
        let t = self.trees.len() as f64;
        if self.task.is_classification() {
            let k = self.task.n_classes();
            let mut out = Vec::with_capacity(m);
            for row in 0..m {
                let mut probs = vec![0.0; k];
                for tree in &self.trees {
                    for (p, v) in probs.iter_mut().zip(self.predict_row(tree, &views, row)) {
                        *p += v;
                    }
                }
                for p in &mut probs {
                    *p /= t;
                }
                out.push(probs);
            }
            Ok(Predictions::Classification(out))
        } else {
            let mut out = Vec::with_capacity(m);
            for row in 0..m {
                let first = self.predict_row(&self.trees[0], &views, row)[0];
                let mut sum = 0.0;
                let mut constant = true;
                for tree in &self.trees {
                    let v = self.predict_row(tree, &views, row)[0];
                    constant &= v == first;
                    sum += v;
                }
                out.push(if constant { first } else { sum / t });
            }
            Ok(Predictions::Regression(out))
        }
    }

    fn embedded_importance(&self) -> Option<Vec<f64>> {
        Some(self.embedded_importance_values())
    }
}

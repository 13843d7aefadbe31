//! Random-forest regression surrogate built from scratch.
//!
//! Trees are grown with the CART criterion (exhaustive scan over midpoint
//! thresholds, minimizing summed child squared error) and expose their
//! axis-aligned leaf partitions, which is what makes exact marginal
//! integration possible downstream. Fitting is a pure function of
//! `(X, y, params)`: tree `t` draws from RNG substream `(params.seed, t)`,
//! so the forest is identical no matter how tree construction is scheduled.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::substream;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    /// Number of trees.
    pub n_trees: usize,
    /// Features considered per split; `None` means `max(1, d/3)`.
    pub mtry: Option<usize>,
    pub min_samples_leaf: usize,
    /// `None` grows trees until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            mtry: None,
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn resolved_mtry(&self, d: usize) -> usize {
        self.mtry.unwrap_or_else(|| (d / 3).max(1))
    }
}

/// One node of a regression tree. `x[dim] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        dim: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree stored as a flat node arena with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

/// An axis-aligned box of one leaf, with the leaf's prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafBox {
    pub bounds: Vec<(f64, f64)>,
    pub value: f64,
}

impl LeafBox {
    /// Fraction of the domain's volume covered by this box.
    pub fn volume_fraction(&self, domain: &[(f64, f64)]) -> f64 {
        self.bounds
            .iter()
            .zip(domain)
            .map(|(&(lo, hi), &(dlo, dhi))| (hi - lo) / (dhi - dlo))
            .product()
    }
}

impl RegressionTree {
    /// Builds a tree from a flat node list (root at 0), checking that child
    /// indices are in range and each node is referenced at most once.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ShapeMismatch("tree has no nodes".into()));
        }
        let mut seen = vec![false; nodes.len()];
        seen[0] = true;
        for node in &nodes {
            if let Node::Split { left, right, .. } = node {
                for &child in [left, right] {
                    if child >= nodes.len() {
                        return Err(Error::ShapeMismatch(format!(
                            "child index {child} out of range ({} nodes)",
                            nodes.len()
                        )));
                    }
                    if seen[child] {
                        return Err(Error::ShapeMismatch(format!(
                            "node {child} referenced more than once"
                        )));
                    }
                    seen[child] = true;
                }
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Predicts by walking from the root; ties at a threshold go left.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split { dim, threshold, left, right } => {
                    idx = if x[*dim] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// The leaf boxes obtained by intersecting split half-spaces with
    /// `domain`. Boxes partition the domain; their volumes sum to its volume.
    pub fn leaf_partition(&self, domain: &[(f64, f64)]) -> Vec<LeafBox> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, domain.to_vec())];
        while let Some((idx, bounds)) = stack.pop() {
            match &self.nodes[idx] {
                Node::Leaf { value } => out.push(LeafBox { bounds, value: *value }),
                Node::Split { dim, threshold, left, right } => {
                    let mut lb = bounds.clone();
                    lb[*dim].1 = lb[*dim].1.min(*threshold);
                    let mut rb = bounds;
                    rb[*dim].0 = rb[*dim].0.max(*threshold);
                    // Right first so left subtrees pop first: boxes come out
                    // in depth-first (prediction) order.
                    stack.push((*right, rb));
                    stack.push((*left, lb));
                }
            }
        }
        out
    }

    /// Split thresholds used along `dim`, unsorted, duplicates included.
    pub fn thresholds_on(&self, dim: usize) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { dim: d, threshold, .. } if *d == dim => Some(*threshold),
                _ => None,
            })
            .collect()
    }
}

/// A fitted forest: prediction is the arithmetic mean of tree predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<RegressionTree>,
    params: ForestParams,
    domain: Vec<(f64, f64)>,
}

impl Forest {
    /// Fits a forest on `x` (n rows of d features) and targets `y` over the
    /// given integration `domain` (one `(lo, hi)` per dimension).
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &ForestParams, domain: Vec<(f64, f64)>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} rows vs {} targets",
                n,
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::DegenerateTarget { rows: n });
        }
        let d = x[0].len();
        if x.iter().any(|row| row.len() != d) {
            return Err(Error::ShapeMismatch("ragged feature matrix".into()));
        }
        if domain.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "domain has {} dimensions, data has {}",
                domain.len(),
                d
            )));
        }
        if params.n_trees == 0 {
            return Err(Error::ShapeMismatch("n_trees must be >= 1".into()));
        }
        let mtry = params.resolved_mtry(d);
        if mtry == 0 || mtry > d {
            return Err(Error::ShapeMismatch(format!(
                "mtry {mtry} not in 1..={d}"
            )));
        }

        let mut params = params.clone();
        params.mtry = Some(mtry);

        let trees: Vec<RegressionTree> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = substream(params.seed, t as u64);
                let indices: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let mut builder = TreeBuilder {
                    x,
                    y,
                    d,
                    mtry,
                    min_samples_leaf: params.min_samples_leaf.max(1),
                    max_depth: params.max_depth,
                    nodes: Vec::new(),
                };
                builder.grow(indices, 0, &mut rng);
                RegressionTree { nodes: builder.nodes }
            })
            .collect();

        Ok(Self { trees, params, domain })
    }

    /// Assembles a forest from already-built trees (e.g. for tests or
    /// deserialization paths that bypass fitting).
    pub fn from_parts(
        trees: Vec<RegressionTree>,
        params: ForestParams,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::ShapeMismatch("forest has no trees".into()));
        }
        Ok(Self { trees, params, domain })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    /// Mean of per-tree predictions.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.domain.len() {
            return Err(Error::ShapeMismatch(format!(
                "input has {} coordinates, forest expects {}",
                x.len(),
                self.domain.len()
            )));
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// Serializes to the versioned surrogate JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ForestDocument {
            version: FOREST_SCHEMA_VERSION,
            params: self.params.clone(),
            domain: self.domain.clone(),
            trees: self.trees.clone(),
        })
        .expect("forest serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ForestDocument = serde_json::from_str(text)?;
        if doc.version != FOREST_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported surrogate schema version {}",
                doc.version
            )));
        }
        Ok(Self {
            trees: doc.trees,
            params: doc.params,
            domain: doc.domain,
        })
    }
}

pub const FOREST_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ForestDocument {
    version: u32,
    params: ForestParams,
    domain: Vec<(f64, f64)>,
    trees: Vec<RegressionTree>,
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    d: usize,
    mtry: usize,
    min_samples_leaf: usize,
    max_depth: Option<usize>,
    nodes: Vec<Node>,
}

struct BestSplit {
    cost: f64,
    dim: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    /// Grows the subtree for `indices`, returning its node id.
    fn grow(&mut self, indices: Vec<usize>, depth: usize, rng: &mut impl Rng) -> usize {
        let m = indices.len();
        let mean = indices.iter().map(|&i| self.y[i]).sum::<f64>() / m as f64;

        let constant = indices.iter().all(|&i| self.y[i] == self.y[indices[0]]);
        let depth_capped = self.max_depth.is_some_and(|cap| depth >= cap);
        if constant || depth_capped || m < 2 * self.min_samples_leaf {
            return self.push_leaf(mean);
        }

        let best = self.best_split(&indices, rng);
        let Some(best) = best else {
            // No feature admits a valid split (all constant on this node).
            return self.push_leaf(mean);
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.x[i][best.dim] <= best.threshold);

        let id = self.nodes.len();
        self.nodes.push(Node::Split {
            dim: best.dim,
            threshold: best.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(left_idx, depth + 1, rng);
        let right = self.grow(right_idx, depth + 1, rng);
        if let Node::Split { left: l, right: r, .. } = &mut self.nodes[id] {
            *l = left;
            *r = right;
        }
        id
    }

    fn push_leaf(&mut self, value: f64) -> usize {
        self.nodes.push(Node::Leaf { value });
        self.nodes.len() - 1
    }

    /// Scans a random permutation of the features, evaluating candidates
    /// until `mtry` features that admit a valid split have been seen (a
    /// feature constant on this node does not count), and returns the
    /// lowest-cost split found. Ties keep the first candidate encountered.
    fn best_split(&self, indices: &[usize], rng: &mut impl Rng) -> Option<BestSplit> {
        let mut perm: Vec<usize> = (0..self.d).collect();
        perm.shuffle(rng);

        let mut best: Option<BestSplit> = None;
        let mut informative_seen = 0;
        let mut sorted: Vec<usize> = indices.to_vec();
        for &dim in &perm {
            if informative_seen >= self.mtry {
                break;
            }
            sorted.sort_unstable_by(|&a, &b| {
                self.x[a][dim].partial_cmp(&self.x[b][dim]).expect("finite features")
            });

            // Prefix sums over the sorted order give each boundary's child
            // SSE in O(1): sse = sum_sq - sum^2 / count.
            let mut found_for_dim = false;
            let total_sum: f64 = sorted.iter().map(|&i| self.y[i]).sum();
            let total_sq: f64 = sorted.iter().map(|&i| self.y[i] * self.y[i]).sum();
            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            let m = sorted.len();
            for k in 0..m - 1 {
                let yi = self.y[sorted[k]];
                left_sum += yi;
                left_sq += yi * yi;
                let a = self.x[sorted[k]][dim];
                let b = self.x[sorted[k + 1]][dim];
                if a == b {
                    continue; // boundary inside a tied group
                }
                let n_left = k + 1;
                let n_right = m - n_left;
                if n_left < self.min_samples_leaf || n_right < self.min_samples_leaf {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let right_sq = total_sq - left_sq;
                let cost = (left_sq - left_sum * left_sum / n_left as f64)
                    + (right_sq - right_sum * right_sum / n_right as f64);
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    // Adjacent floats: fall back to the left value so the
                    // right child stays non-empty under the <= rule.
                    threshold = a;
                }
                found_for_dim = true;
                if best.as_ref().is_none_or(|s| cost < s.cost) {
                    best = Some(BestSplit { cost, dim, threshold });
                }
            }
            if found_for_dim {
                informative_seen += 1;
            }
        }
        best
    }
}

//! Functional-ANOVA variance decomposition over regression-tree partitions,
//! and the multi-objective sweep that recomputes it per objective weighting.
//!
//! All integrals are exact: a tree is piecewise constant over its leaf boxes,
//! so marginal means and variances reduce to finite sums over the partition
//! under the independent uniform measure on the encoded domain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::MetaDataset;
use crate::error::Error;
use crate::forest::{Forest, ForestParams, LeafBox, RegressionTree};
use crate::pareto::WeightVector;
use crate::rng::derive_seed;
use crate::Result;

/// Total variance below this fraction of the tree's second moment counts as
/// zero; ratios of catastrophically cancelled variances are meaningless.
const DEGENERATE_REL_EPS: f64 = 1e-14;

/// Elementwise weighted sum of the two normalized objectives (the per-weight
/// regression target).
pub fn scalarize(o1: &[f64], o2: &[f64], w: &WeightVector) -> Result<Vec<f64>> {
    if o1.len() != o2.len() {
        return Err(Error::ShapeMismatch(format!(
            "objective lengths differ: {} vs {}",
            o1.len(),
            o2.len()
        )));
    }
    Ok(o1
        .iter()
        .zip(o2)
        .map(|(&a, &b)| w.w1 * a + w.w2 * b)
        .collect())
}

/// Importance of one dimension within one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeImportance {
    /// Main-effect variance fraction, in [0, 1]; 0 when degenerate.
    pub fraction: f64,
    /// The tree's total variance.
    pub total_variance: f64,
    /// True when the tree has (numerically) zero total variance.
    pub degenerate: bool,
}

/// Per-dimension importance aggregated over a forest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestImportance {
    pub mean: f64,
    pub std: f64,
    /// True when every tree in the forest was degenerate.
    pub degenerate: bool,
}

/// One tree's leaf partition with the precomputed measure, mean, and
/// variance needed for exact marginalization.
pub struct TreePartition {
    domain: Vec<(f64, f64)>,
    leaves: Vec<LeafBox>,
    mu: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl TreePartition {
    pub fn new(tree: &RegressionTree, domain: &[(f64, f64)]) -> Self {
        let leaves = tree.leaf_partition(domain);
        let mu: Vec<f64> = leaves.iter().map(|l| l.volume_fraction(domain)).collect();
        let mean: f64 = leaves.iter().zip(&mu).map(|(l, m)| m * l.value).sum();
        let variance: f64 = leaves
            .iter()
            .zip(&mu)
            .map(|(l, m)| m * (l.value - mean) * (l.value - mean))
            .sum();
        Self {
            domain: domain.to_vec(),
            leaves,
            mu,
            mean,
            variance,
        }
    }

    /// The constant term f_0 (mean of the tree over the domain).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Total variance of the tree over the domain.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Total measure of the partition; 1 up to floating-point rounding.
    pub fn total_measure(&self) -> f64 {
        self.mu.iter().sum()
    }

    pub fn is_degenerate(&self) -> bool {
        let second_moment: f64 = self
            .leaves
            .iter()
            .zip(&self.mu)
            .map(|(l, m)| m * l.value * l.value)
            .sum();
        self.variance <= 0.0 || self.variance < DEGENERATE_REL_EPS * second_moment
    }

    /// Exact marginal prediction: the tree integrated over all dimensions not
    /// in `dims`, evaluated at `values` (one value per entry of `dims`).
    pub fn marginal(&self, dims: &[usize], values: &[f64]) -> f64 {
        assert_eq!(dims.len(), values.len());
        let mut acc = 0.0;
        'leaf: for leaf in &self.leaves {
            let mut weight = 1.0;
            for (j, &(lo, hi)) in leaf.bounds.iter().enumerate() {
                if let Some(k) = dims.iter().position(|&d| d == j) {
                    if !self.contains(j, lo, hi, values[k]) {
                        continue 'leaf;
                    }
                } else {
                    let (dlo, dhi) = self.domain[j];
                    weight *= (hi - lo) / (dhi - dlo);
                }
            }
            acc += weight * leaf.value;
        }
        acc
    }

    /// Half-open membership matching the prediction tie rule: a leaf covers
    /// (lo, hi], except at the domain's lower edge where lo is included.
    fn contains(&self, dim: usize, lo: f64, hi: f64, v: f64) -> bool {
        v <= hi && (v > lo || lo == self.domain[dim].0)
    }

    /// Breakpoints of the piecewise-constant marginal along `dim`: the domain
    /// edges plus every split threshold strictly inside them.
    pub fn breakpoints(&self, dim: usize) -> Vec<f64> {
        let (dlo, dhi) = self.domain[dim];
        let mut cuts: Vec<f64> = self
            .leaves
            .iter()
            .flat_map(|l| [l.bounds[dim].0, l.bounds[dim].1])
            .filter(|&t| t > dlo && t < dhi)
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut breakpoints = Vec::with_capacity(cuts.len() + 2);
        breakpoints.push(dlo);
        breakpoints.extend(cuts);
        breakpoints.push(dhi);
        breakpoints
    }

    /// The marginal mean over each breakpoint interval of `dim` (the value of
    /// a_dim on that interval).
    pub fn marginal_profile(&self, dim: usize) -> (Vec<f64>, Vec<f64>) {
        let breakpoints = self.breakpoints(dim);
        let mut acc = vec![0.0; breakpoints.len() - 1];
        let (dlo, dhi) = self.domain[dim];
        let dim_len = dhi - dlo;
        for leaf in &self.leaves {
            let (lo, hi) = leaf.bounds[dim];
            if hi <= lo {
                continue;
            }
            // Leaf edges are themselves breakpoints, so the covered intervals
            // form a contiguous index range.
            let start = breakpoints.partition_point(|&b| b < lo);
            let end = breakpoints.partition_point(|&b| b < hi);
            let weight_rest = leaf.volume_fraction(&self.domain) * dim_len / (hi - lo);
            for slot in &mut acc[start.min(end)..end] {
                *slot += weight_rest * leaf.value;
            }
        }
        (breakpoints, acc)
    }

    /// Exact main-effect variance of `dim`: the variance of
    /// `a_dim(v) - mean` integrated over the interval decomposition.
    pub fn main_effect_variance(&self, dim: usize) -> f64 {
        let (breakpoints, profile) = self.marginal_profile(dim);
        let (dlo, dhi) = self.domain[dim];
        let dim_len = dhi - dlo;
        profile
            .iter()
            .enumerate()
            .map(|(m, &a)| {
                let w = (breakpoints[m + 1] - breakpoints[m]) / dim_len;
                let dev = a - self.mean;
                w * dev * dev
            })
            .sum()
    }

    /// Main-effect importance of `dim` within this tree.
    pub fn importance(&self, dim: usize) -> TreeImportance {
        if self.is_degenerate() {
            return TreeImportance {
                fraction: 0.0,
                total_variance: self.variance,
                degenerate: true,
            };
        }
        TreeImportance {
            fraction: self.main_effect_variance(dim) / self.variance,
            total_variance: self.variance,
            degenerate: false,
        }
    }

    /// Exact pairwise-interaction variance fraction of dimensions `i` and
    /// `j`: the variance of `a_ij - a_i - a_j + mean` over the 2-D grid
    /// induced by both dimensions' thresholds.
    pub fn pairwise_importance(&self, i: usize, j: usize) -> TreeImportance {
        assert_ne!(i, j, "pairwise importance needs two distinct dimensions");
        if self.is_degenerate() {
            return TreeImportance {
                fraction: 0.0,
                total_variance: self.variance,
                degenerate: true,
            };
        }
        let (bi, profile_i) = self.marginal_profile(i);
        let (bj, profile_j) = self.marginal_profile(j);
        let mut grid = vec![0.0; profile_i.len() * profile_j.len()];
        let (ilo, ihi) = self.domain[i];
        let (jlo, jhi) = self.domain[j];
        let len_i = ihi - ilo;
        let len_j = jhi - jlo;
        for leaf in &self.leaves {
            let (lo_i, hi_i) = leaf.bounds[i];
            let (lo_j, hi_j) = leaf.bounds[j];
            if hi_i <= lo_i || hi_j <= lo_j {
                continue;
            }
            let si = bi.partition_point(|&b| b < lo_i);
            let ei = bi.partition_point(|&b| b < hi_i);
            let sj = bj.partition_point(|&b| b < lo_j);
            let ej = bj.partition_point(|&b| b < hi_j);
            let weight_rest = leaf.volume_fraction(&self.domain) * len_i / (hi_i - lo_i) * len_j
                / (hi_j - lo_j);
            for mi in si..ei {
                for mj in sj..ej {
                    grid[mi * profile_j.len() + mj] += weight_rest * leaf.value;
                }
            }
        }
        let mut v_ij = 0.0;
        for (mi, &ai) in profile_i.iter().enumerate() {
            let wi = (bi[mi + 1] - bi[mi]) / len_i;
            for (mj, &aj) in profile_j.iter().enumerate() {
                let wj = (bj[mj + 1] - bj[mj]) / len_j;
                let f = grid[mi * profile_j.len() + mj] - ai - aj + self.mean;
                v_ij += wi * wj * f * f;
            }
        }
        TreeImportance {
            fraction: v_ij / self.variance,
            total_variance: self.variance,
            degenerate: false,
        }
    }
}

/// Marginal prediction of one tree (see [`TreePartition::marginal`]).
pub fn tree_marginal(
    tree: &RegressionTree,
    domain: &[(f64, f64)],
    dims: &[usize],
    values: &[f64],
) -> f64 {
    TreePartition::new(tree, domain).marginal(dims, values)
}

/// Main-effect importance of `dim` in one tree.
pub fn tree_importance(tree: &RegressionTree, domain: &[(f64, f64)], dim: usize) -> TreeImportance {
    TreePartition::new(tree, domain).importance(dim)
}

/// Per-dimension mean and standard deviation of main-effect fractions over
/// the forest's trees. Degenerate trees are excluded from the statistics;
/// a dimension is flagged degenerate only when every tree is.
pub fn forest_importance(forest: &Forest) -> Vec<ForestImportance> {
    let d = forest.dim();
    let per_tree: Vec<Vec<TreeImportance>> = forest
        .trees()
        .par_iter()
        .map(|tree| {
            let partition = TreePartition::new(tree, forest.domain());
            (0..d).map(|dim| partition.importance(dim)).collect()
        })
        .collect();
    aggregate(per_tree, d)
}

/// Pairwise-interaction importance of `(i, j)` aggregated over the forest.
pub fn pairwise_importance(forest: &Forest, i: usize, j: usize) -> ForestImportance {
    let per_tree: Vec<Vec<TreeImportance>> = forest
        .trees()
        .par_iter()
        .map(|tree| vec![TreePartition::new(tree, forest.domain()).pairwise_importance(i, j)])
        .collect();
    aggregate(per_tree, 1).pop().unwrap()
}

fn aggregate(per_tree: Vec<Vec<TreeImportance>>, d: usize) -> Vec<ForestImportance> {
    (0..d)
        .map(|dim| {
            let fractions: Vec<f64> = per_tree
                .iter()
                .filter(|t| !t[dim].degenerate)
                .map(|t| t[dim].fraction)
                .collect();
            if fractions.is_empty() {
                return ForestImportance {
                    mean: 0.0,
                    std: 0.0,
                    degenerate: true,
                };
            }
            // Bitwise-identical trees must report exactly zero spread.
            if fractions.iter().all(|&f| f == fractions[0]) {
                return ForestImportance {
                    mean: fractions[0],
                    std: 0.0,
                    degenerate: false,
                };
            }
            let k = fractions.len() as f64;
            let mean = fractions.iter().sum::<f64>() / k;
            let var = fractions.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / k;
            ForestImportance {
                mean,
                std: var.sqrt(),
                degenerate: false,
            }
        })
        .collect()
}

/// One hyperparameter's importance as a function of the objective weighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceCurve {
    pub hyperparameter: String,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub w1: f64,
    pub importance: f64,
    pub std: f64,
    pub degenerate: bool,
}

/// Interaction importance of one dimension pair across the weight grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseCurve {
    pub pair: (String, String),
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone)]
pub struct FanovaOptions {
    pub forest: ForestParams,
    /// Also compute pairwise interaction fractions (off by default; it is
    /// quadratic in the dimension count).
    pub pairwise: bool,
    pub weights: Vec<WeightVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoFanovaResult {
    pub weights: Vec<WeightVector>,
    pub curves: Vec<ImportanceCurve>,
    pub pairwise: Option<Vec<PairwiseCurve>>,
}

/// The multi-objective fANOVA sweep: for every weighting, scalarize the
/// normalized objectives, fit a forest with a per-weight derived seed, and
/// decompose its variance per hyperparameter.
pub fn mo_fanova(ds: &MetaDataset, opts: &FanovaOptions) -> Result<MoFanovaResult> {
    if opts.weights.is_empty() {
        return Err(Error::ShapeMismatch(
            "fANOVA needs at least one weighting".into(),
        ));
    }
    let (c1, c2) = ds.objective_pair()?;
    let o1 = c1.normalized();
    let o2 = c2.normalized();
    let domain = ds.space().encoded_domain();

    type PerWeight = (Vec<ForestImportance>, Option<Vec<ForestImportance>>);
    let per_weight: Vec<PerWeight> = opts
        .weights
        .par_iter()
        .enumerate()
        .map(|(idx, w)| -> Result<PerWeight> {
            let y = scalarize(&o1, &o2, w)?;
            let params = ForestParams {
                seed: derive_seed(opts.forest.seed, idx as u64),
                ..opts.forest.clone()
            };
            let forest = Forest::fit(ds.x(), &y, &params, domain.clone())?;
            let main = forest_importance(&forest);
            let pairs = opts.pairwise.then(|| {
                let d = ds.dim();
                let mut out = Vec::new();
                for i in 0..d {
                    for j in i + 1..d {
                        out.push(pairwise_importance(&forest, i, j));
                    }
                }
                out
            });
            Ok((main, pairs))
        })
        .collect::<Result<Vec<_>>>()?;

    let curves = (0..ds.dim())
        .map(|dim| ImportanceCurve {
            hyperparameter: ds.space().spec(dim).name.clone(),
            points: opts
                .weights
                .iter()
                .zip(&per_weight)
                .map(|(w, (main, _))| CurvePoint {
                    w1: w.w1,
                    importance: main[dim].mean,
                    std: main[dim].std,
                    degenerate: main[dim].degenerate,
                })
                .collect(),
        })
        .collect();

    let pairwise = opts.pairwise.then(|| {
        let d = ds.dim();
        let mut out = Vec::new();
        let mut k = 0;
        for i in 0..d {
            for j in i + 1..d {
                out.push(PairwiseCurve {
                    pair: (
                        ds.space().spec(i).name.clone(),
                        ds.space().spec(j).name.clone(),
                    ),
                    points: opts
                        .weights
                        .iter()
                        .zip(&per_weight)
                        .map(|(w, (_, pairs))| {
                            let s = pairs.as_ref().expect("pairwise enabled")[k];
                            CurvePoint {
                                w1: w.w1,
                                importance: s.mean,
                                std: s.std,
                                degenerate: s.degenerate,
                            }
                        })
                        .collect(),
                });
                k += 1;
            }
        }
        out
    });

    Ok(MoFanovaResult {
        weights: opts.weights.clone(),
        curves,
        pairwise,
    })
}

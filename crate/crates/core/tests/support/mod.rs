//! Independent oracles shared by the integration and acceptance tests.
//!
//! Everything here deliberately avoids the partition-based marginalization
//! under test: Pareto masks come from the O(n^2) dominance scan, and ANOVA
//! quantities come from dense-grid evaluation of the tree's pointwise
//! prediction semantics.

// Each including test binary uses a subset of these oracles.
#![allow(dead_code)]

use mohpi_core::forest::{Node, RegressionTree};
use rand::seq::SliceRandom;
use rand::Rng;

/// Quadratic-time dominance oracle (minimization, weak dominance with at
/// least one strict inequality; duplicates stay efficient).
pub fn brute_force_pareto_mask(points: &[[f64; 2]]) -> Vec<bool> {
    let n = points.len();
    let mut mask = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dominates = points[j][0] <= points[i][0]
                && points[j][1] <= points[i][1]
                && (points[j][0] < points[i][0] || points[j][1] < points[i][1]);
            if dominates {
                mask[i] = false;
                break;
            }
        }
    }
    mask
}

/// A random tree over [0, 1]^d whose split thresholds all lie on the
/// `grid`-cell lattice (j / grid), so midpoint quadrature with `grid` cells
/// per dimension is exact for it.
pub fn random_lattice_tree(rng: &mut impl Rng, d: usize, max_leaves: usize, grid: usize) -> RegressionTree {
    #[derive(Clone)]
    struct IdxBox {
        lo: Vec<usize>,
        hi: Vec<usize>,
    }

    fn build(rng: &mut impl Rng, nodes: &mut Vec<Node>, bounds: IdxBox, budget: usize, grid: usize) -> usize {
        let splittable: Vec<usize> = (0..bounds.lo.len())
            .filter(|&dim| bounds.hi[dim] - bounds.lo[dim] >= 2)
            .collect();
        if budget <= 1 || splittable.is_empty() {
            nodes.push(Node::Leaf { value: rng.gen_range(-1.0..1.0) });
            return nodes.len() - 1;
        }
        let dim = *splittable.choose(rng).unwrap();
        let cut = rng.gen_range(bounds.lo[dim] + 1..bounds.hi[dim]);
        let left_budget = rng.gen_range(1..budget);

        let id = nodes.len();
        nodes.push(Node::Split {
            dim,
            threshold: cut as f64 / grid as f64,
            left: 0,
            right: 0,
        });
        let mut left_bounds = bounds.clone();
        left_bounds.hi[dim] = cut;
        let mut right_bounds = bounds;
        right_bounds.lo[dim] = cut;
        let left = build(rng, nodes, left_bounds, left_budget, grid);
        let right = build(rng, nodes, right_bounds, budget - left_budget, grid);
        if let Node::Split { left: l, right: r, .. } = &mut nodes[id] {
            *l = left;
            *r = right;
        }
        id
    }

    let mut nodes = Vec::new();
    let bounds = IdxBox { lo: vec![0; d], hi: vec![grid; d] };
    let target = rng.gen_range(2..=max_leaves);
    build(rng, &mut nodes, bounds, target, grid);
    RegressionTree::from_nodes(nodes).unwrap()
}

pub struct GridAnova {
    pub mean: f64,
    pub variance: f64,
    pub fractions: Vec<f64>,
}

/// Dense-grid numerical ANOVA over `points` midpoint cells per dimension.
///
/// The value at every grid point is exactly what `tree.predict` returns
/// there; the restriction sweep along the last dimension only batches those
/// pointwise lookups so the full grid stays affordable at d = 4.
pub fn grid_anova(tree: &RegressionTree, d: usize, points: usize) -> GridAnova {
    let nodes = tree.nodes();
    let last = d - 1;
    let prefix_total: usize = points.pow((d - 1) as u32);
    let total = prefix_total * points;

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut marginal = vec![vec![0.0; points]; d];
    let mut diff_last = vec![0.0; points + 1];
    let mut x = vec![0.0; d];
    let mut pieces: Vec<(usize, f64)> = Vec::new();

    for flat in 0..prefix_total {
        let mut rest = flat;
        for coord in x.iter_mut().take(d - 1) {
            let idx = rest % points;
            rest /= points;
            *coord = (idx as f64 + 0.5) / points as f64;
        }
        pieces.clear();
        restrict_last(nodes, 0, &x, last, points, 0, points, &mut pieces);

        let mut start = 0usize;
        for &(end, value) in &pieces {
            let count = (end - start) as f64;
            sum += value * count;
            sum_sq += value * value * count;
            let mut rest = flat;
            for marg in marginal.iter_mut().take(d - 1) {
                let idx = rest % points;
                rest /= points;
                marg[idx] += value * count;
            }
            diff_last[start] += value;
            diff_last[end] -= value;
            start = end;
        }
        assert_eq!(start, points, "pieces must cover the grid row");
    }

    let mut acc = 0.0;
    for k in 0..points {
        acc += diff_last[k];
        marginal[last][k] = acc;
    }

    let mean = sum / total as f64;
    let variance = sum_sq / total as f64 - mean * mean;
    let per_value = (total / points) as f64;
    let fractions = marginal
        .iter()
        .map(|marg| {
            if variance <= 0.0 {
                return 0.0;
            }
            let v_dim = marg
                .iter()
                .map(|&s| {
                    let dev = s / per_value - mean;
                    dev * dev
                })
                .sum::<f64>()
                / points as f64;
            v_dim / variance
        })
        .collect();
    GridAnova { mean, variance, fractions }
}

/// The tree restricted to a line along `last`: the contiguous grid-index
/// pieces `[start, end)` with their constant values, equivalent to calling
/// `predict` at every midpoint of that line.
#[allow(clippy::too_many_arguments)]
fn restrict_last(
    nodes: &[Node],
    idx: usize,
    x: &[f64],
    last: usize,
    points: usize,
    lo: usize,
    hi: usize,
    out: &mut Vec<(usize, f64)>,
) {
    match &nodes[idx] {
        Node::Leaf { value } => out.push((hi, *value)),
        Node::Split { dim, threshold, left, right } => {
            if *dim != last {
                let child = if x[*dim] <= *threshold { *left } else { *right };
                restrict_last(nodes, child, x, last, points, lo, hi, out);
            } else {
                // Grid midpoint k goes left iff (k + 0.5) / points <= t.
                let boundary = ((*threshold * points as f64 - 0.5).floor() as i64 + 1)
                    .clamp(lo as i64, hi as i64) as usize;
                if boundary > lo {
                    restrict_last(nodes, *left, x, last, points, lo, boundary, out);
                }
                if boundary < hi {
                    restrict_last(nodes, *right, x, last, points, boundary, hi, out);
                }
            }
        }
    }
}

/// Paired-sample Monte-Carlo estimate of a main-effect variance fraction:
/// V_dim = Cov(f(x), f(x')) where x and x' share coordinate `dim` and draw
/// the rest independently. Returns (fraction, standard error of fraction).
pub fn mc_main_effect_fraction(
    tree: &RegressionTree,
    d: usize,
    dim: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let mut mean_acc = 0.0;
    let mut products = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples * 2);
    let mut x = vec![0.0; d];
    let mut x2 = vec![0.0; d];
    for _ in 0..samples {
        for j in 0..d {
            x[j] = rng.gen::<f64>();
            x2[j] = rng.gen::<f64>();
        }
        x2[dim] = x[dim];
        let f1 = tree.predict(&x);
        let f2 = tree.predict(&x2);
        mean_acc += f1 + f2;
        products.push(f1 * f2);
        values.push(f1);
        values.push(f2);
    }
    let mean = mean_acc / (2 * samples) as f64;
    let e_prod = products.iter().sum::<f64>() / samples as f64;
    let v_dim = e_prod - mean * mean;
    let var_total =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (2 * samples) as f64;
    // Delta-method error bar on the covariance term dominates.
    let prod_var = products
        .iter()
        .map(|p| (p - e_prod) * (p - e_prod))
        .sum::<f64>()
        / samples as f64;
    let se = (prod_var / samples as f64).sqrt() / var_total;
    (v_dim / var_total, se)
}

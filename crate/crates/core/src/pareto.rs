//! Pareto-efficient points under bi-objective minimization and the weighting
//! vectors derived from them.
//!
//! A point is removed only if some other point is at least as good in both
//! objectives and strictly better in one, so duplicated identical points all
//! stay efficient.

use serde::{Deserialize, Serialize};

/// A tradeoff between the two objectives, derived from a Pareto-efficient
/// point (`source_index` is its dataset row) or from an explicit grid
/// (`source_index` is `None`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w1: f64,
    pub w2: f64,
    pub source_index: Option<usize>,
}

impl WeightVector {
    pub fn new(w1: f64, w2: f64) -> Self {
        debug_assert!((w1 + w2 - 1.0).abs() <= 1e-12);
        Self { w1, w2, source_index: None }
    }
}

/// Marks the Pareto-efficient rows of a bi-objective (minimization) matrix.
///
/// Sort-and-sweep, O(n log n); the brute-force O(n^2) dominance scan is kept
/// as a test oracle.
pub fn pareto_mask(points: &[[f64; 2]]) -> Vec<bool> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .expect("finite objective values")
    });

    let mut mask = vec![false; n];
    // Minimum o2 over all points with strictly smaller o1.
    let mut best_before = f64::INFINITY;
    let mut i = 0;
    while i < n {
        // Group of equal o1 values.
        let o1 = points[order[i]][0];
        let mut j = i;
        let mut group_min = f64::INFINITY;
        while j < n && points[order[j]][0] == o1 {
            group_min = group_min.min(points[order[j]][1]);
            j += 1;
        }
        for &idx in &order[i..j] {
            let o2 = points[idx][1];
            // Any earlier point with o2 <= ours dominates (strictly better o1);
            // within the group only the minimal o2 survives (ties included).
            mask[idx] = o2 < best_before && o2 == group_min;
        }
        best_before = best_before.min(group_min);
        i = j;
    }
    mask
}

/// Derives one weighting per Pareto-efficient row: `w1 = o1 / (o1 + o2)` on
/// the normalized objective pair. The degenerate row (0, 0) maps to
/// (0.5, 0.5). The result is deduplicated (equality after rounding to 12
/// decimals) and sorted ascending by `w1`.
pub fn derive_weights(points: &[[f64; 2]], source_rows: &[usize]) -> Vec<WeightVector> {
    assert_eq!(points.len(), source_rows.len());
    let mut weights: Vec<WeightVector> = points
        .iter()
        .zip(source_rows)
        .map(|(p, &row)| {
            let sum = p[0] + p[1];
            let (w1, w2) = if sum == 0.0 {
                (0.5, 0.5)
            } else {
                (p[0] / sum, p[1] / sum)
            };
            WeightVector { w1, w2, source_index: Some(row) }
        })
        .collect();
    sort_dedup(&mut weights);
    weights
}

/// Convenience: Pareto mask + weight derivation on two normalized columns.
pub fn pareto_weights(o1: &[f64], o2: &[f64]) -> Vec<WeightVector> {
    let points: Vec<[f64; 2]> = o1.iter().zip(o2).map(|(&a, &b)| [a, b]).collect();
    let mask = pareto_mask(&points);
    let efficient: Vec<[f64; 2]> = points
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(p, _)| *p)
        .collect();
    let rows: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| i)
        .collect();
    derive_weights(&efficient, &rows)
}

/// Adds `k` uniformly spaced weights on [0, 1] to a Pareto-derived set
/// (sparse fronts produce sparse curves otherwise), then re-sorts and
/// deduplicates.
pub fn add_grid_weights(weights: &mut Vec<WeightVector>, k: usize) {
    if k == 0 {
        return;
    }
    if k == 1 {
        weights.push(WeightVector { w1: 0.5, w2: 0.5, source_index: None });
    } else {
        for i in 0..k {
            let w1 = i as f64 / (k - 1) as f64;
            weights.push(WeightVector { w1, w2: 1.0 - w1, source_index: None });
        }
    }
    sort_dedup(weights);
}

/// Swaps the roles of w1 and w2 for every weight and re-sorts.
pub fn invert_weights(weights: &mut Vec<WeightVector>) {
    for w in weights.iter_mut() {
        std::mem::swap(&mut w.w1, &mut w.w2);
    }
    sort_dedup(weights);
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn sort_dedup(weights: &mut Vec<WeightVector>) {
    weights.sort_by(|a, b| {
        round12(a.w1)
            .partial_cmp(&round12(b.w1))
            .unwrap()
            .then(a.source_index.cmp(&b.source_index))
    });
    weights.dedup_by_key(|w| round12(w.w1));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_mask() {
        let mask = pareto_mask(&[[1.0, 2.0], [2.0, 1.0], [2.0, 2.0]]);
        assert_eq!(mask, vec![true, true, false]);
    }

    #[test]
    fn single_point_is_efficient() {
        assert_eq!(pareto_mask(&[[3.0, 4.0]]), vec![true]);
    }

    #[test]
    fn duplicates_are_all_efficient() {
        let mask = pareto_mask(&[[1.0, 1.0], [1.0, 1.0], [2.0, 0.5], [1.0, 1.5]]);
        assert_eq!(mask, vec![true, true, true, false]);
    }

    #[test]
    fn weak_domination_removes() {
        // (1,2) dominates (1,3): equal in o1, strictly better in o2.
        let mask = pareto_mask(&[[1.0, 2.0], [1.0, 3.0]]);
        assert_eq!(mask, vec![true, false]);
    }

    #[test]
    fn derives_and_sorts_weights() {
        let weights = derive_weights(&[[0.0, 1.0], [1.0, 0.0], [0.25, 0.25]], &[0, 1, 2]);
        let pairs: Vec<(f64, f64)> = weights.iter().map(|w| (w.w1, w.w2)).collect();
        assert_eq!(pairs, vec![(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]);
        assert_eq!(weights[1].source_index, Some(2));
    }

    #[test]
    fn weight_arithmetic() {
        let weights = derive_weights(&[[0.3, 0.1]], &[7]);
        assert!((weights[0].w1 - 0.75).abs() < 1e-15);
        assert!((weights[0].w2 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identical_rows_dedup_to_one_weight() {
        let weights = derive_weights(&[[0.2, 0.2], [0.2, 0.2], [0.2, 0.2]], &[0, 1, 2]);
        assert_eq!(weights.len(), 1);
        assert_eq!(weights[0].source_index, Some(0));
    }

    #[test]
    fn degenerate_origin_maps_to_half() {
        let weights = derive_weights(&[[0.0, 0.0]], &[0]);
        assert_eq!((weights[0].w1, weights[0].w2), (0.5, 0.5));
    }

    #[test]
    fn grid_weights_cover_unit_interval() {
        let mut weights = Vec::new();
        add_grid_weights(&mut weights, 5);
        let w1s: Vec<f64> = weights.iter().map(|w| w.w1).collect();
        assert_eq!(w1s, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(weights.iter().all(|w| (w.w1 + w.w2 - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn invert_swaps_and_resorts() {
        let mut weights = derive_weights(&[[0.75, 0.25], [0.0, 1.0]], &[0, 1]);
        invert_weights(&mut weights);
        let pairs: Vec<(f64, f64)> = weights.iter().map(|w| (w.w1, w.w2)).collect();
        assert_eq!(pairs, vec![(0.25, 0.75), (1.0, 0.0)]);
    }
}

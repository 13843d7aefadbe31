//! Exact-oracle checks for the tree marginalization: dense-grid numerical
//! ANOVA, grid integration of marginals, and a paired-sample Monte-Carlo
//! estimator must all agree with the partition-based computation.

mod support;

use mohpi_core::fanova::{tree_importance, TreePartition};
use mohpi_core::rng::substream;
use rand::Rng;
use support::{grid_anova, mc_main_effect_fraction, random_lattice_tree};

const GRID: usize = 200;

fn unit_domain(d: usize) -> Vec<(f64, f64)> {
    vec![(0.0, 1.0); d]
}

#[test]
fn tree_importance_matches_grid_anova_on_random_trees() {
    let mut rng = substream(2024, 0);
    for case in 0..12 {
        let d = 1 + case % 3;
        let tree = random_lattice_tree(&mut rng, d, 32, GRID);
        let oracle = grid_anova(&tree, d, GRID);
        for dim in 0..d {
            let imp = tree_importance(&tree, &unit_domain(d), dim);
            assert!(
                (imp.fraction - oracle.fractions[dim]).abs() <= 1e-6,
                "case {case} dim {dim}: exact {} vs grid {}",
                imp.fraction,
                oracle.fractions[dim]
            );
        }
    }
}

#[test]
fn marginal_matches_grid_integration_on_random_8_leaf_trees() {
    let mut rng = substream(7, 0);
    for _ in 0..5 {
        let tree = random_lattice_tree(&mut rng, 2, 8, GRID);
        let partition = TreePartition::new(&tree, &unit_domain(2));
        for k in 0..10 {
            let v = (k as f64 + 0.5) / 10.0;
            let exact = partition.marginal(&[0], &[v]);
            // Brute-force integration over x1 at the same midpoint resolution.
            let numeric: f64 = (0..GRID)
                .map(|j| tree.predict(&[v, (j as f64 + 0.5) / GRID as f64]))
                .sum::<f64>()
                / GRID as f64;
            assert!(
                (exact - numeric).abs() <= 1e-9,
                "marginal at {v}: {exact} vs {numeric}"
            );
        }
    }
}

#[test]
fn grid_mean_and_variance_match_partition() {
    let mut rng = substream(9, 0);
    for _ in 0..6 {
        let d = 1 + rng.gen_range(0..3);
        let tree = random_lattice_tree(&mut rng, d, 24, GRID);
        let partition = TreePartition::new(&tree, &unit_domain(d));
        let oracle = grid_anova(&tree, d, GRID);
        assert!((partition.mean() - oracle.mean).abs() <= 1e-9);
        assert!((partition.variance() - oracle.variance).abs() <= 1e-9);
    }
}

#[test]
fn monte_carlo_estimate_brackets_exact_fraction() {
    let mut rng = substream(31, 0);
    for case in 0..3 {
        let d = 2 + case % 2;
        let tree = random_lattice_tree(&mut rng, d, 20, GRID);
        let domain = unit_domain(d);
        for dim in 0..d {
            let exact = tree_importance(&tree, &domain, dim).fraction;
            let (estimate, se) = mc_main_effect_fraction(&tree, d, dim, 1_000_000, &mut rng);
            let tolerance = 3.0 * se + 1e-9;
            assert!(
                (estimate - exact).abs() <= tolerance,
                "case {case} dim {dim}: exact {exact}, MC {estimate} +- {se}"
            );
        }
    }
}

#[test]
fn leaf_volumes_match_monte_carlo_membership() {
    let mut rng = substream(77, 0);
    let tree = random_lattice_tree(&mut rng, 2, 6, GRID);
    let domain = unit_domain(2);
    let boxes = tree.leaf_partition(&domain);
    let volumes: Vec<f64> = boxes.iter().map(|b| b.volume_fraction(&domain)).collect();
    assert!((volumes.iter().sum::<f64>() - 1.0).abs() <= 1e-9);

    // Membership counts over uniform samples agree within 3 sigma.
    let samples = 200_000;
    let mut counts = vec![0usize; boxes.len()];
    for _ in 0..samples {
        let p = [rng.gen::<f64>(), rng.gen::<f64>()];
        let hit = boxes
            .iter()
            .position(|b| {
                b.bounds
                    .iter()
                    .zip(&p)
                    .all(|(&(lo, hi), &v)| v <= hi && (v > lo || lo == 0.0))
            })
            .expect("every point lies in exactly one box");
        counts[hit] += 1;
    }
    for (leaf, (&count, &vol)) in counts.iter().zip(&volumes).enumerate() {
        let freq = count as f64 / samples as f64;
        let sigma = (vol * (1.0 - vol) / samples as f64).sqrt();
        assert!(
            (freq - vol).abs() <= 3.0 * sigma + 1e-12,
            "leaf {leaf}: frequency {freq} vs volume {vol}"
        );
    }
}

#[test]
fn partition_invariants_on_random_trees() {
    let mut rng = substream(55, 0);
    for _ in 0..20 {
        let d = 1 + rng.gen_range(0..4);
        let tree = random_lattice_tree(&mut rng, d, 32, GRID);
        let partition = TreePartition::new(&tree, &unit_domain(d));

        // Unit measure.
        assert!((partition.total_measure() - 1.0).abs() <= 1e-9);

        // Law of total variance: main effects cannot exceed the total.
        let sum: f64 = (0..d).map(|dim| partition.importance(dim).fraction).sum();
        assert!(sum <= 1.0 + 1e-9, "main-effect fractions sum to {sum}");

        // Marginal consistency: integrating the marginal recovers the mean.
        for dim in 0..d {
            let (breakpoints, profile) = partition.marginal_profile(dim);
            let integral: f64 = profile
                .iter()
                .enumerate()
                .map(|(m, &a)| (breakpoints[m + 1] - breakpoints[m]) * a)
                .sum();
            assert!(
                (integral - partition.mean()).abs() <= 1e-9,
                "dim {dim}: integral {integral} vs mean {}",
                partition.mean()
            );
        }
    }
}

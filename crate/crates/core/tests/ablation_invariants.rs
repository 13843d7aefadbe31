//! Path-level invariants of the ablation analysis on synthetic problems:
//! telescoping, greedy dominance under replay, path length, and invariance
//! to dataset row order once the surrogates are fixed.

use mohpi_core::ablation::{
    ablation_path, encoded_hamming, fit_objective_surrogates, incumbent, mo_ablation,
    weighted_prediction, AblationOptions,
};
use mohpi_core::dataset::{MetaDataset, ObjectiveColumn};
use mohpi_core::forest::ForestParams;
use mohpi_core::pareto;
use mohpi_core::synthetic::{make_problem, sample_runs};

const PROBLEM: &str = r#"{
    "dims": ["a", "b", "c"],
    "objectives": [
        {"name": "err", "terms": [
            {"dim": "a", "basis": "quadratic", "coef": 1.0},
            {"dim": "c", "basis": "linear", "coef": 0.3}]},
        {"name": "cost", "terms": [
            {"dim": "b", "basis": "quadratic", "coef": 1.0},
            {"dim": "c", "basis": "linear", "coef": -0.2}]}
    ]
}"#;

fn weights_for(ds: &MetaDataset) -> Vec<pareto::WeightVector> {
    let mut weights = pareto::pareto_weights(
        &ds.objective(0).normalized(),
        &ds.objective(1).normalized(),
    );
    pareto::add_grid_weights(&mut weights, 21);
    weights
}

#[test]
fn greedy_dominance_and_telescoping_replay() {
    let problem = make_problem(PROBLEM).unwrap();
    let ds = sample_runs(&problem, 400, 17).unwrap();
    let params = ForestParams { n_trees: 30, ..Default::default() }.with_seed(99);
    let weights = weights_for(&ds);
    assert!(weights.len() >= 20);

    let opts = AblationOptions { forest: params.clone(), weights, raw_incumbent: false };
    let paths = mo_ablation(&ds, &opts).unwrap();

    let (s1, s2) = fit_objective_surrogates(&ds, &params).unwrap();
    let (c1, c2) = ds.objective_pair().unwrap();
    let (n1, n2) = (c1.normalizer(), c2.normalizer());
    let space = ds.space();
    let default = space.default_config();

    for path in &paths {
        let w = &path.weight;
        let incumbent_cfg = ds.config(path.incumbent_index);
        let enc_inc = space.encode(incumbent_cfg).unwrap();

        // Path length equals the default<->incumbent Hamming distance.
        let hamming = encoded_hamming(space, &default, incumbent_cfg).unwrap();
        assert_eq!(path.steps.len(), hamming, "w1 = {}", w.w1);

        // Replay: at every step the committed flip must beat (or tie, with
        // the earlier canonical index) every alternative candidate.
        let mut current = space.encode(&default).unwrap();
        let mut performance = weighted_prediction(&s1, &s2, n1, n2, w, &current).unwrap();
        assert_eq!(performance, path.default_performance);
        for step in &path.steps {
            let committed_dim = space.position(&step.hyperparameter).unwrap();
            let candidates: Vec<usize> =
                (0..space.len()).filter(|&d| current[d] != enc_inc[d]).collect();
            assert!(candidates.contains(&committed_dim));
            for &dim in &candidates {
                let mut trial = current.clone();
                trial[dim] = enc_inc[dim];
                let p = weighted_prediction(&s1, &s2, n1, n2, w, &trial).unwrap();
                if dim < committed_dim {
                    assert!(p > step.performance_after, "dim {dim} ties or beats committed");
                } else {
                    assert!(p >= step.performance_after, "dim {dim} beats committed");
                }
            }
            current[committed_dim] = enc_inc[committed_dim];
            let p = weighted_prediction(&s1, &s2, n1, n2, w, &current).unwrap();
            assert_eq!(p, step.performance_after);
            assert_eq!(step.delta, performance - p);
            performance = p;
        }
        assert_eq!(current, enc_inc);

        // Telescoping down to 1e-12.
        let deltas: f64 = path.steps.iter().map(|s| s.delta).sum();
        let predicted = weighted_prediction(&s1, &s2, n1, n2, w, &enc_inc).unwrap();
        assert!((path.default_performance - deltas - predicted).abs() <= 1e-12);
    }
}

#[test]
fn paths_are_invariant_to_row_order_given_fixed_surrogates() {
    let problem = make_problem(PROBLEM).unwrap();
    let ds = sample_runs(&problem, 200, 5).unwrap();
    let params = ForestParams { n_trees: 20, ..Default::default() }.with_seed(4);
    let (s1, s2) = fit_objective_surrogates(&ds, &params).unwrap();
    let (c1, c2) = ds.objective_pair().unwrap();
    let w = pareto::WeightVector::new(0.25, 0.75);
    let space = ds.space();
    let default = space.default_config();

    let (row, inc) = incumbent(&ds, &w).unwrap();
    let reference = ablation_path(
        &s1, &s2, c1.normalizer(), c2.normalizer(), space, &default, &inc, row, &w,
    )
    .unwrap();

    // Rebuild the dataset with rows reversed; the incumbent configuration
    // (and therefore the whole path) must not change.
    let reversed_configs: Vec<_> = (0..ds.n()).rev().map(|i| ds.config(i).clone()).collect();
    let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<f64>>();
    let shuffled = MetaDataset::from_parts(
        space.clone(),
        reversed_configs,
        vec![
            ObjectiveColumn::new("err", rev(c1.raw())),
            ObjectiveColumn::new("cost", rev(c2.raw())),
        ],
    )
    .unwrap();
    let (row2, inc2) = incumbent(&shuffled, &w).unwrap();
    assert_eq!(inc, inc2);
    assert_eq!(row2, ds.n() - 1 - row);

    let replayed = ablation_path(
        &s1, &s2, c1.normalizer(), c2.normalizer(), space, &default, &inc2, row2, &w,
    )
    .unwrap();
    assert_eq!(reference.steps, replayed.steps);
    assert_eq!(reference.default_performance, replayed.default_performance);
}

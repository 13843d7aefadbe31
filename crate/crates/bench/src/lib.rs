//! Shared fixtures for the pipeline benchmarks.

use mohpi_core::dataset::{MetaDataset, ObjectiveColumn};
use mohpi_core::rng::substream;
use mohpi_core::ConfigSpace;
use rand::Rng;

/// A uniform-random bi-objective dataset over `d` float dimensions where
/// objective 1 loads on the first half of the dimensions and objective 2 on
/// the second half.
pub fn random_dataset(n: usize, d: usize, seed: u64) -> MetaDataset {
    let names: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let space = ConfigSpace::unit_floats("bench", &name_refs).unwrap();

    let mut rng = substream(seed, 0);
    let mut configs = Vec::with_capacity(n);
    let mut o1 = Vec::with_capacity(n);
    let mut o2 = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
        configs.push(space.decode(&x).unwrap());
        let half = d / 2;
        o1.push(x[..half.max(1)].iter().sum::<f64>());
        o2.push(x[half..].iter().map(|v| v * v).sum::<f64>());
    }
    MetaDataset::from_parts(
        space,
        configs,
        vec![ObjectiveColumn::new("o1", o1), ObjectiveColumn::new("o2", o2)],
    )
    .unwrap()
}

/// Random objective pairs for the Pareto benchmarks.
pub fn random_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = substream(seed, 1);
    (0..n).map(|_| [rng.gen(), rng.gen()]).collect()
}

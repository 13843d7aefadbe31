//! Hyperparameter importance analysis for multi-objective hyperparameter
//! optimization runs.
//!
//! Given a meta-dataset of evaluated configurations with two (minimized)
//! objective columns, this crate derives objective weightings from the Pareto
//! front and computes, per weighting, either a functional-ANOVA variance
//! decomposition over random-forest surrogates (`fanova`) or a greedy ablation
//! path from the default configuration to the weighting's incumbent
//! (`ablation`). Surrogates are self-contained CART regression forests whose
//! trees expose their leaf partitions for exact marginalization.

pub mod ablation;
pub mod configspace;
pub mod dataset;
pub mod error;
pub mod fanova;
pub mod forest;
pub mod pareto;
pub mod report;
pub mod rng;
pub mod synthetic;

pub use ablation::{AblationOptions, AblationPath, AblationStep};
pub use configspace::{ConfigSpace, Configuration, Domain, HyperparameterSpec, Value};
pub use dataset::{MetaDataset, MinMaxNormalizer, ObjectiveColumn};
pub use error::Error;
pub use fanova::{FanovaOptions, ImportanceCurve, MoFanovaResult};
pub use forest::{Forest, ForestParams, Node, RegressionTree};
pub use pareto::WeightVector;
pub use synthetic::SyntheticProblem;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

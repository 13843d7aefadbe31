//! Greedy ablation paths from the default configuration to each weighting's
//! incumbent, evaluated on one surrogate per raw objective.
//!
//! Unlike the fANOVA sweep, the two surrogates are fitted once on the
//! unnormalized objective columns; predictions are normalized post hoc with
//! the dataset-fitted normalizers, weighted, and summed. Each path flips the
//! hyperparameter whose change to the incumbent's value yields the lowest
//! predicted weighted cost, until the incumbent is reached. Deltas may be
//! negative; they are recorded as-is.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configspace::{ConfigSpace, Configuration, Value};
use crate::dataset::{MetaDataset, MinMaxNormalizer};
use crate::forest::{Forest, ForestParams};
use crate::pareto::WeightVector;
use crate::rng::derive_seed;
use crate::Result;

/// One committed flip on the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationStep {
    pub hyperparameter: String,
    /// The incumbent's value the hyperparameter was flipped to.
    pub new_value: Value,
    /// Weighted normalized prediction after the flip (lower is better).
    pub performance_after: f64,
    /// performance_before - performance_after; positive = improvement.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationPath {
    pub weight: WeightVector,
    pub default_performance: f64,
    pub incumbent_index: usize,
    pub steps: Vec<AblationStep>,
}

impl AblationPath {
    /// Predicted performance after the last step (the incumbent's predicted
    /// weighted cost); equals `default_performance` for an empty path.
    pub fn final_performance(&self) -> f64 {
        self.steps
            .last()
            .map_or(self.default_performance, |s| s.performance_after)
    }
}

#[derive(Debug, Clone)]
pub struct AblationOptions {
    pub forest: ForestParams,
    pub weights: Vec<WeightVector>,
    /// Select the incumbent on raw objective values instead of normalized
    /// ones (the literal reading of the selection rule).
    pub raw_incumbent: bool,
}

/// Fits one forest per raw objective column, with seeds derived as
/// `(seed, 1)` and `(seed, 2)`.
pub fn fit_objective_surrogates(ds: &MetaDataset, params: &ForestParams) -> Result<(Forest, Forest)> {
    let (c1, c2) = ds.objective_pair()?;
    let domain = ds.space().encoded_domain();
    let s1 = Forest::fit(
        ds.x(),
        c1.raw(),
        &ForestParams { seed: derive_seed(params.seed, 1), ..params.clone() },
        domain.clone(),
    )?;
    let s2 = Forest::fit(
        ds.x(),
        c2.raw(),
        &ForestParams { seed: derive_seed(params.seed, 2), ..params.clone() },
        domain,
    )?;
    Ok((s1, s2))
}

/// Weighted, normalized surrogate prediction at encoded point `x`.
pub fn weighted_prediction(
    s1: &Forest,
    s2: &Forest,
    n1: &MinMaxNormalizer,
    n2: &MinMaxNormalizer,
    w: &WeightVector,
    x: &[f64],
) -> Result<f64> {
    Ok(w.w1 * n1.apply(s1.predict(x)?) + w.w2 * n2.apply(s2.predict(x)?))
}

/// Row index and configuration minimizing `w1 * O1n + w2 * O2n` over the
/// evaluated (normalized) rows; ties go to the lowest row index.
pub fn incumbent(ds: &MetaDataset, w: &WeightVector) -> Result<(usize, Configuration)> {
    let (c1, c2) = ds.objective_pair()?;
    Ok(argmin_row(ds, w, &c1.normalized(), &c2.normalized()))
}

/// Like [`incumbent`], but on raw objective values.
pub fn incumbent_raw(ds: &MetaDataset, w: &WeightVector) -> Result<(usize, Configuration)> {
    let (c1, c2) = ds.objective_pair()?;
    Ok(argmin_row(ds, w, c1.raw(), c2.raw()))
}

fn argmin_row(ds: &MetaDataset, w: &WeightVector, o1: &[f64], o2: &[f64]) -> (usize, Configuration) {
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for i in 0..ds.n() {
        let v = w.w1 * o1[i] + w.w2 * o2[i];
        if v < best_value {
            best_value = v;
            best = i;
        }
    }
    (best, ds.config(best).clone())
}

/// Builds the greedy path from `default` to `incumbent` for weighting `w`.
///
/// Candidates are hyperparameters whose encoded coordinate still differs from
/// the incumbent's; a conditional hyperparameter is only its own candidate
/// while active on both sides. Flipping a hyperparameter also syncs its
/// conditional children to the incumbent's coordinates (activation and
/// deactivation ride along with the parent in the same step). Ties in the
/// greedy selection break toward canonical declaration order.
#[allow(clippy::too_many_arguments)]
pub fn ablation_path(
    s1: &Forest,
    s2: &Forest,
    n1: &MinMaxNormalizer,
    n2: &MinMaxNormalizer,
    space: &ConfigSpace,
    default: &Configuration,
    incumbent: &Configuration,
    incumbent_index: usize,
    w: &WeightVector,
) -> Result<AblationPath> {
    let enc_inc = space.encode(incumbent)?;
    let mut current = space.encode(default)?;
    let mut performance = weighted_prediction(s1, s2, n1, n2, w, &current)?;
    let default_performance = performance;

    let children: Vec<Vec<usize>> = (0..space.len()).map(|d| space.children_of(d)).collect();
    let is_candidate = |v: &[f64], dim: usize| {
        if v[dim] == enc_inc[dim] {
            return false;
        }
        if space.spec(dim).condition.is_some() {
            // Activity mismatches are resolved by the parent's flip.
            v[dim] != crate::configspace::INACTIVE && enc_inc[dim] != crate::configspace::INACTIVE
        } else {
            true
        }
    };

    let mut steps = Vec::new();
    loop {
        let candidates: Vec<usize> = (0..space.len()).filter(|&d| is_candidate(&current, d)).collect();
        if candidates.is_empty() {
            break;
        }
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for &dim in &candidates {
            let mut trial = current.clone();
            trial[dim] = enc_inc[dim];
            for &child in &children[dim] {
                trial[child] = enc_inc[child];
            }
            let p = weighted_prediction(s1, s2, n1, n2, w, &trial)?;
            if best.as_ref().is_none_or(|(_, _, bp)| p < *bp) {
                best = Some((dim, trial, p));
            }
        }
        let (dim, trial, p) = best.expect("candidates is non-empty");
        let name = &space.spec(dim).name;
        steps.push(AblationStep {
            hyperparameter: name.clone(),
            new_value: incumbent
                .get(name)
                .expect("candidate is active in the incumbent")
                .clone(),
            performance_after: p,
            delta: performance - p,
        });
        current = trial;
        performance = p;
    }

    Ok(AblationPath {
        weight: *w,
        default_performance,
        incumbent_index,
        steps,
    })
}

/// Algorithm entry point: fit the two objective surrogates once, then build
/// one path per weighting (independent, order fixed by the weight list).
pub fn mo_ablation(ds: &MetaDataset, opts: &AblationOptions) -> Result<Vec<AblationPath>> {
    mo_ablation_with_surrogates(ds, opts).map(|(paths, _)| paths)
}

/// Like [`mo_ablation`], also handing back the fitted surrogate pair (for
/// serialization or inspection).
pub fn mo_ablation_with_surrogates(
    ds: &MetaDataset,
    opts: &AblationOptions,
) -> Result<(Vec<AblationPath>, (Forest, Forest))> {
    let (s1, s2) = fit_objective_surrogates(ds, &opts.forest)?;
    let (c1, c2) = ds.objective_pair()?;
    let (n1, n2) = (*c1.normalizer(), *c2.normalizer());
    let default = ds.space().default_config();

    let paths = opts
        .weights
        .par_iter()
        .map(|w| {
            let (row, inc) = if opts.raw_incumbent {
                incumbent_raw(ds, w)?
            } else {
                incumbent(ds, w)?
            };
            ablation_path(&s1, &s2, &n1, &n2, ds.space(), &default, &inc, row, w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((paths, (s1, s2)))
}

/// Number of encoded coordinates on which two configurations differ.
pub fn encoded_hamming(space: &ConfigSpace, a: &Configuration, b: &Configuration) -> Result<usize> {
    let ea = space.encode(a)?;
    let eb = space.encode(b)?;
    Ok(ea.iter().zip(&eb).filter(|(x, y)| x != y).count())
}

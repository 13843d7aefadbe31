//! Synthetic bi-objective benchmark problems with analytically known
//! importances, plus the demographic-parity fairness metric.
//!
//! Problems are sums of per-dimension basis terms (linear, quadratic, step,
//! sinusoid) with optional pairwise product interactions and observation
//! noise, defined over a space of plain float dimensions on [0, 1]. Because
//! the coefficients are recorded, exact per-dimension variances — and thus
//! ground-truth importance fractions — are computable for the test oracles.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::configspace::ConfigSpace;
use crate::dataset::{MetaDataset, MinMaxNormalizer, ObjectiveColumn};
use crate::error::Error;
use crate::pareto::WeightVector;
use crate::rng::substream;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Linear,
    Quadratic,
    Step,
    Sin,
}

impl Basis {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Basis::Linear => t,
            Basis::Quadratic => t * t,
            Basis::Step => {
                if t > 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            Basis::Sin => (2.0 * std::f64::consts::PI * t).sin(),
        }
    }

    fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Basis::Linear),
            "quadratic" => Ok(Basis::Quadratic),
            "step" => Ok(Basis::Step),
            "sin" => Ok(Basis::Sin),
            other => Err(Error::Schema(format!("unknown basis '{other}'"))),
        }
    }

    fn is_polynomial(self) -> bool {
        matches!(self, Basis::Linear | Basis::Quadratic)
    }
}

#[derive(Debug, Clone)]
pub struct Term {
    pub dim: usize,
    pub basis: Basis,
    pub coef: f64,
}

/// Product interaction `coef * x_a * x_b`.
#[derive(Debug, Clone)]
pub struct Interaction {
    pub dims: (usize, usize),
    pub coef: f64,
}

#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    pub name: String,
    pub terms: Vec<Term>,
    pub interactions: Vec<Interaction>,
    pub noise_sigma: f64,
}

impl ObjectiveSpec {
    /// Noise-free objective value at an encoded point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for t in &self.terms {
            v += t.coef * t.basis.eval(x[t.dim]);
        }
        for i in &self.interactions {
            v += i.coef * x[i.dims.0] * x[i.dims.1];
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    space: ConfigSpace,
    objectives: [ObjectiveSpec; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    dims: Vec<String>,
    objectives: Vec<RawObjective>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObjective {
    name: String,
    #[serde(default)]
    terms: Vec<RawTerm>,
    #[serde(default)]
    interactions: Vec<RawInteraction>,
    #[serde(default)]
    noise_sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    dim: String,
    basis: String,
    coef: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    dims: [String; 2],
    coef: f64,
}

/// Parses a synthetic-problem document into a callable problem with recorded
/// coefficients.
pub fn make_problem(spec_text: &str) -> Result<SyntheticProblem> {
    let raw: RawProblem =
        serde_json::from_str(spec_text).map_err(|e| Error::Schema(e.to_string()))?;
    if raw.dims.is_empty() {
        return Err(Error::Schema("problem needs at least one dimension".into()));
    }
    if raw.objectives.len() != 2 {
        return Err(Error::Schema(format!(
            "problem needs exactly 2 objectives, got {}",
            raw.objectives.len()
        )));
    }
    let dim_names: Vec<&str> = raw.dims.iter().map(String::as_str).collect();
    let space = ConfigSpace::unit_floats("synthetic", &dim_names)?;
    let dim_of = |name: &str| -> Result<usize> {
        space
            .position(name)
            .ok_or_else(|| Error::Schema(format!("undefined dimension '{name}'")))
    };

    let mut objectives = Vec::with_capacity(2);
    for obj in &raw.objectives {
        if obj.noise_sigma < 0.0 {
            return Err(Error::Schema(format!(
                "objective '{}': noise_sigma must be >= 0",
                obj.name
            )));
        }
        let terms = obj
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    dim: dim_of(&t.dim)?,
                    basis: Basis::parse(&t.basis)?,
                    coef: t.coef,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let interactions = obj
            .interactions
            .iter()
            .map(|i| {
                let a = dim_of(&i.dims[0])?;
                let b = dim_of(&i.dims[1])?;
                if a == b {
                    return Err(Error::Schema(format!(
                        "interaction on '{}' twice",
                        i.dims[0]
                    )));
                }
                Ok(Interaction { dims: (a, b), coef: i.coef })
            })
            .collect::<Result<Vec<_>>>()?;
        objectives.push(ObjectiveSpec {
            name: obj.name.clone(),
            terms,
            interactions,
            noise_sigma: obj.noise_sigma,
        });
    }
    let objectives: [ObjectiveSpec; 2] = objectives.try_into().expect("length checked");
    Ok(SyntheticProblem { space, objectives })
}

impl SyntheticProblem {
    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn objectives(&self) -> &[ObjectiveSpec; 2] {
        &self.objectives
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn has_interactions(&self) -> bool {
        self.objectives.iter().any(|o| !o.interactions.is_empty())
    }
}

/// Evaluates `n` iid uniform encoded configurations on both objectives.
/// Row `i` draws from RNG substream `(seed, i)`, so the dataset is identical
/// however the evaluation is scheduled.
pub fn sample_runs(problem: &SyntheticProblem, n: usize, seed: u64) -> Result<MetaDataset> {
    if n < 2 {
        return Err(Error::EmptyDataset { rows: n });
    }
    let d = problem.dim();
    let mut configs = Vec::with_capacity(n);
    let mut o1 = Vec::with_capacity(n);
    let mut o2 = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = substream(seed, i as u64);
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let mut v1 = problem.objectives[0].eval(&x);
        let mut v2 = problem.objectives[1].eval(&x);
        if problem.objectives[0].noise_sigma > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            v1 += problem.objectives[0].noise_sigma * z;
        }
        if problem.objectives[1].noise_sigma > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            v2 += problem.objectives[1].noise_sigma * z;
        }
        configs.push(problem.space.decode(&x)?);
        o1.push(v1);
        o2.push(v2);
    }
    MetaDataset::from_parts(
        problem.space.clone(),
        configs,
        vec![
            ObjectiveColumn::new(problem.objectives[0].name.clone(), o1),
            ObjectiveColumn::new(problem.objectives[1].name.clone(), o2),
        ],
    )
}

/// Ground-truth main-effect importance fractions for weighting `w`.
///
/// The scalarized target mirrors the analysis pipeline exactly: each
/// objective is normalized with the supplied (dataset-fitted) normalizer
/// before weighting. For additive problems the per-dimension variance is
/// computed in closed form (polynomial bases) or by 1e6-point midpoint
/// quadrature; problems with interactions fall back to a dense-grid
/// numerical ANOVA and are rejected above 3 dimensions.
pub fn analytic_importance(
    problem: &SyntheticProblem,
    w: &WeightVector,
    normalizers: (&MinMaxNormalizer, &MinMaxNormalizer),
) -> Result<Vec<f64>> {
    let d = problem.dim();
    let scale = |n: &MinMaxNormalizer| {
        if n.max() > n.min() {
            1.0 / (n.max() - n.min())
        } else {
            0.0
        }
    };
    let s1 = w.w1 * scale(normalizers.0);
    let s2 = w.w2 * scale(normalizers.1);

    if problem.has_interactions() {
        if d > 3 {
            return Err(Error::UnsupportedBasis(format!(
                "grid ANOVA oracle limited to 3 dimensions with interactions, problem has {d}"
            )));
        }
        return Ok(grid_anova(problem, s1, s2));
    }

    // Additive case: variance contributions are per-dimension and exact.
    let variances: Vec<f64> = (0..d)
        .map(|dim| {
            let mut combined: Vec<(f64, Basis)> = Vec::new();
            for (s, obj) in [(s1, &problem.objectives[0]), (s2, &problem.objectives[1])] {
                for t in obj.terms.iter().filter(|t| t.dim == dim) {
                    combined.push((s * t.coef, t.basis));
                }
            }
            if combined.iter().all(|(_, b)| b.is_polynomial()) {
                polynomial_variance(&combined)
            } else {
                quadrature_variance(&combined)
            }
        })
        .collect();
    let total: f64 = variances.iter().sum();
    if total <= 0.0 {
        return Ok(vec![0.0; d]);
    }
    Ok(variances.iter().map(|v| v / total).collect())
}

/// Variance of sum(c_k * basis_k(t)) for polynomial bases, t ~ U[0, 1],
/// via raw moments E[t^p] = 1 / (p + 1).
fn polynomial_variance(terms: &[(f64, Basis)]) -> f64 {
    let degree = |b: Basis| match b {
        Basis::Linear => 1,
        Basis::Quadratic => 2,
        _ => unreachable!("polynomial bases only"),
    };
    let moment = |p: u32| 1.0 / (p as f64 + 1.0);
    let mean: f64 = terms.iter().map(|&(c, b)| c * moment(degree(b))).sum();
    let mut second = 0.0;
    for &(ca, ba) in terms {
        for &(cb, bb) in terms {
            second += ca * cb * moment(degree(ba) + degree(bb));
        }
    }
    second - mean * mean
}

/// Midpoint-rule variance for mixed bases; 1e6 points keeps the step basis
/// exact (its threshold 0.5 falls on a cell edge) and smooth bases at ~1e-12.
fn quadrature_variance(terms: &[(f64, Basis)]) -> f64 {
    const POINTS: usize = 1_000_000;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..POINTS {
        let t = (k as f64 + 0.5) / POINTS as f64;
        let v: f64 = terms.iter().map(|&(c, b)| c * b.eval(t)).sum();
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / POINTS as f64;
    sum_sq / POINTS as f64 - mean * mean
}

/// Dense-grid numerical ANOVA for problems with interactions (d <= 3).
fn grid_anova(problem: &SyntheticProblem, s1: f64, s2: f64) -> Vec<f64> {
    let d = problem.dim();
    let points_per_dim = (1e6_f64.powf(1.0 / d as f64)).floor() as usize;
    let total = points_per_dim.pow(d as u32);
    let mut sum = 0.0;
    let mut marginal_sums = vec![vec![0.0; points_per_dim]; d];
    let mut x = vec![0.0; d];
    for flat in 0..total {
        // Decode the flat index into one grid coordinate per dimension.
        let mut rest = flat;
        let indices: Vec<usize> = (0..d)
            .map(|_| {
                let idx = rest % points_per_dim;
                rest /= points_per_dim;
                idx
            })
            .collect();
        for (coord, &idx) in x.iter_mut().zip(&indices) {
            *coord = (idx as f64 + 0.5) / points_per_dim as f64;
        }
        let v = s1 * problem.objectives[0].eval(&x) + s2 * problem.objectives[1].eval(&x);
        sum += v;
        for (marg, &idx) in marginal_sums.iter_mut().zip(&indices) {
            marg[idx] += v;
        }
    }
    let mean = sum / total as f64;
    let per_value = (total / points_per_dim) as f64;
    let variances: Vec<f64> = marginal_sums
        .iter()
        .map(|marg| {
            marg.iter()
                .map(|&s| {
                    let dev = s / per_value - mean;
                    dev * dev
                })
                .sum::<f64>()
                / points_per_dim as f64
        })
        .collect();
    let total_var: f64 = variances.iter().sum();
    if total_var <= 0.0 {
        return vec![0.0; d];
    }
    variances.iter().map(|v| v / total_var).collect()
}

/// Demographic-parity loss: absolute difference of the group-conditional
/// positive-prediction rates.
pub fn dp_loss(predictions: &[bool], sensitive: &[bool]) -> Result<f64> {
    if predictions.len() != sensitive.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions vs {} sensitive values",
            predictions.len(),
            sensitive.len()
        )));
    }
    let (count, positives) = group_counts(predictions, sensitive)?;
    let rate0 = positives[0] as f64 / count[0] as f64;
    let rate1 = positives[1] as f64 / count[1] as f64;
    Ok((rate0 - rate1).abs())
}

/// Literal shared-denominator variant: both group sums are divided by the
/// total population size instead of the group sizes.
pub fn dp_loss_shared_n(predictions: &[bool], sensitive: &[bool]) -> Result<f64> {
    let (_, positives) = group_counts(predictions, sensitive)?;
    let n = predictions.len() as f64;
    Ok((positives[0] as f64 / n - positives[1] as f64 / n).abs())
}

fn group_counts(predictions: &[bool], sensitive: &[bool]) -> Result<([usize; 2], [usize; 2])> {
    if predictions.len() != sensitive.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions vs {} sensitive values",
            predictions.len(),
            sensitive.len()
        )));
    }
    let mut count = [0usize; 2];
    let mut positives = [0usize; 2];
    for (&y, &s) in predictions.iter().zip(sensitive) {
        let g = usize::from(s);
        count[g] += 1;
        positives[g] += usize::from(y);
    }
    for (g, &c) in count.iter().enumerate() {
        if c == 0 {
            return Err(Error::EmptyGroup { group: g as u8 });
        }
    }
    Ok((count, positives))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEPARABLE: &str = r#"{
        "dims": ["x1", "x2"],
        "objectives": [
            {"name": "f1", "terms": [{"dim": "x1", "basis": "quadratic", "coef": 1.0}]},
            {"name": "f2", "terms": [{"dim": "x2", "basis": "quadratic", "coef": 1.0}]}
        ]
    }"#;

    const ADDITIVE: &str = r#"{
        "dims": ["x1", "x2"],
        "objectives": [
            {"name": "f1", "terms": [
                {"dim": "x1", "basis": "linear", "coef": 3.0},
                {"dim": "x2", "basis": "linear", "coef": 1.0}]},
            {"name": "f2", "terms": [{"dim": "x2", "basis": "linear", "coef": 1.0}]}
        ]
    }"#;

    fn unit(problem: &SyntheticProblem) -> (MinMaxNormalizer, MinMaxNormalizer) {
        let _ = problem;
        (MinMaxNormalizer::new(0.0, 1.0), MinMaxNormalizer::new(0.0, 1.0))
    }

    #[test]
    fn parses_separable_problem() {
        let p = make_problem(SEPARABLE).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.objectives()[0].eval(&[0.5, 0.9]), 0.25);
        assert_eq!(p.objectives()[1].eval(&[0.5, 0.9]), 0.81);
    }

    #[test]
    fn undefined_dimension_is_schema_error() {
        let err = make_problem(
            r#"{"dims": ["x1"], "objectives": [
                {"name": "f1", "terms": [{"dim": "ghost", "basis": "linear", "coef": 1.0}]},
                {"name": "f2", "terms": []}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn additive_variances_split_nine_to_one() {
        let p = make_problem(ADDITIVE).unwrap();
        let (n1, n2) = unit(&p);
        let fractions = analytic_importance(&p, &WeightVector::new(1.0, 0.0), (&n1, &n2)).unwrap();
        assert!((fractions[0] - 0.9).abs() < 1e-12, "{fractions:?}");
        assert!((fractions[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn separable_extremes_and_symmetric_midpoint() {
        let p = make_problem(SEPARABLE).unwrap();
        let ds = sample_runs(&p, 500, 3).unwrap();
        let n1 = *ds.objective(0).normalizer();
        let n2 = *ds.objective(1).normalizer();

        let at = |w1: f64| {
            analytic_importance(&p, &WeightVector::new(w1, 1.0 - w1), (&n1, &n2)).unwrap()
        };
        assert_eq!(at(1.0), vec![1.0, 0.0]);
        assert_eq!(at(0.0), vec![0.0, 1.0]);
        // Normalizer ranges differ slightly between the two sampled columns,
        // so the midpoint is only near (0.5, 0.5).
        let mid = at(0.5);
        assert!((mid[0] - 0.5).abs() < 0.05, "{mid:?}");
        assert!((mid[0] + mid[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let terms = [(2.0, Basis::Linear), (-1.0, Basis::Quadratic)];
        let exact = polynomial_variance(&terms);
        let numeric = quadrature_variance(&terms);
        assert!((exact - numeric).abs() < 1e-9, "{exact} vs {numeric}");

        // Step variance is exactly 1/4.
        let step = quadrature_variance(&[(1.0, Basis::Step)]);
        assert!((step - 0.25).abs() < 1e-12);
        // Sin variance is exactly 1/2.
        let sin = quadrature_variance(&[(1.0, Basis::Sin)]);
        assert!((sin - 0.5).abs() < 1e-9);
    }

    #[test]
    fn interaction_problem_uses_grid_anova() {
        let p = make_problem(
            r#"{"dims": ["a", "b"], "objectives": [
                {"name": "f1",
                 "terms": [{"dim": "a", "basis": "linear", "coef": 1.0}],
                 "interactions": [{"dims": ["a", "b"], "coef": 0.5}]},
                {"name": "f2", "terms": [{"dim": "b", "basis": "linear", "coef": 1.0}]}]}"#,
        )
        .unwrap();
        let (n1, n2) = unit(&p);
        let fr = analytic_importance(&p, &WeightVector::new(1.0, 0.0), (&n1, &n2)).unwrap();
        // f = a + 0.5ab: main effects a: Var((1 + 0.5*E[b]) a) = 1.25^2/12,
        // b: Var(0.5 * E[a] * b) = 0.25^2/12; fractions ~ 25:1.
        let expected_ratio = (1.25f64 / 0.25).powi(2);
        let ratio = fr[0] / fr[1];
        assert!((ratio - expected_ratio).abs() / expected_ratio < 1e-3, "{fr:?}");
    }

    #[test]
    fn sample_runs_is_deterministic_and_noise_free_by_default() {
        let p = make_problem(SEPARABLE).unwrap();
        let a = sample_runs(&p, 50, 42).unwrap();
        let b = sample_runs(&p, 50, 42).unwrap();
        assert_eq!(a.objective(0).raw(), b.objective(0).raw());
        assert_eq!(a.x(), b.x());
        let c = sample_runs(&p, 50, 43).unwrap();
        assert_ne!(a.objective(0).raw(), c.objective(0).raw());

        // sigma = 0: objectives are a pure function of the configuration.
        for (row, x) in a.x().iter().enumerate() {
            assert_eq!(a.objective(0).raw()[row], p.objectives()[0].eval(x));
        }
    }

    #[test]
    fn two_row_sample_and_too_small_error() {
        let p = make_problem(SEPARABLE).unwrap();
        assert_eq!(sample_runs(&p, 2, 7).unwrap().n(), 2);
        assert!(matches!(
            sample_runs(&p, 1, 7),
            Err(Error::EmptyDataset { rows: 1 })
        ));
    }

    #[test]
    fn dp_loss_unit_values() {
        // Equal rates in both groups.
        let y = [true, false, true, false];
        let s = [false, false, true, true];
        assert_eq!(dp_loss(&y, &s).unwrap(), 0.0);

        // 0.8 vs 0.3 -> 0.5 exactly.
        let mut y = Vec::new();
        let mut s = Vec::new();
        for i in 0..10 {
            y.push(i < 8);
            s.push(false);
        }
        for i in 0..10 {
            y.push(i < 3);
            s.push(true);
        }
        assert_eq!(dp_loss(&y, &s).unwrap(), 0.5);

        // All-positive vs all-negative -> 1.0 exactly.
        let y = [true, true, false, false];
        let s = [false, false, true, true];
        assert_eq!(dp_loss(&y, &s).unwrap(), 1.0);
    }

    #[test]
    fn dp_loss_group_invariances() {
        let y = [true, false, true, true, false];
        let s = [false, true, true, false, false];
        let flipped: Vec<bool> = s.iter().map(|v| !v).collect();
        assert_eq!(dp_loss(&y, &s).unwrap(), dp_loss(&y, &flipped).unwrap());

        let err = dp_loss(&[true, false], &[false, false]).unwrap_err();
        assert!(matches!(err, Error::EmptyGroup { group: 1 }));
    }

    #[test]
    fn dp_loss_shared_n_divides_by_population() {
        // 4 positives in group 0, 1 in group 1, n = 8.
        let y = [true, true, true, true, true, false, false, false];
        let s = [false, false, false, false, true, true, true, true];
        assert_eq!(dp_loss_shared_n(&y, &s).unwrap(), 3.0 / 8.0);
        assert_eq!(dp_loss(&y, &s).unwrap(), 0.75);
    }
}

//! Machine-readable analysis reports.
//!
//! The JSON document layout is the stable contract for downstream tooling
//! (the SVG renderer consumes it, and `plot` re-renders from it). Reports
//! embed enough metadata to reproduce the run bit-for-bit.

use serde::{Deserialize, Serialize};

use crate::ablation::AblationPath;
use crate::fanova::{MoFanovaResult, PairwiseCurve};
use crate::forest::ForestParams;
use crate::pareto::WeightVector;
use crate::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Run provenance: everything needed to regenerate the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub dataset: String,
    pub space: String,
    pub objectives: Vec<String>,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default)]
    pub invert_weights: bool,
    #[serde(default)]
    pub raw_incumbent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanovaCurveDoc {
    pub hyperparameter: String,
    pub importance: Vec<f64>,
    pub std: Vec<f64>,
    pub degenerate: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseCurveDoc {
    pub pair: (String, String),
    pub importance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanovaReport {
    pub schema_version: u32,
    pub metadata: ReportMetadata,
    pub weights: Vec<WeightVector>,
    pub curves: Vec<FanovaCurveDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairwise: Option<Vec<PairwiseCurveDoc>>,
    pub forest_params: ForestParams,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationStepDoc {
    pub hyperparameter: String,
    pub delta: f64,
    pub performance_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationPathDoc {
    pub w1: f64,
    pub incumbent_row: usize,
    pub default_performance: f64,
    pub steps: Vec<AblationStepDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub schema_version: u32,
    pub metadata: ReportMetadata,
    pub weights: Vec<WeightVector>,
    pub paths: Vec<AblationPathDoc>,
    pub forest_params: ForestParams,
}

/// A complete report; the `method` tag distinguishes the two analyses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method")]
pub enum AnalysisReport {
    #[serde(rename = "mo-fanova")]
    Fanova(FanovaReport),
    #[serde(rename = "mo-ablation")]
    Ablation(AblationReport),
}

impl AnalysisReport {
    pub fn from_fanova(result: &MoFanovaResult, metadata: ReportMetadata, forest_params: ForestParams) -> Self {
        let curves = result
            .curves
            .iter()
            .map(|c| FanovaCurveDoc {
                hyperparameter: c.hyperparameter.clone(),
                importance: c.points.iter().map(|p| p.importance).collect(),
                std: c.points.iter().map(|p| p.std).collect(),
                degenerate: c.points.iter().map(|p| p.degenerate).collect(),
            })
            .collect();
        let pairwise = result.pairwise.as_ref().map(|pairs| {
            pairs
                .iter()
                .map(|p: &PairwiseCurve| PairwiseCurveDoc {
                    pair: p.pair.clone(),
                    importance: p.points.iter().map(|q| q.importance).collect(),
                })
                .collect()
        });
        let seed = forest_params.seed;
        AnalysisReport::Fanova(FanovaReport {
            schema_version: REPORT_SCHEMA_VERSION,
            metadata,
            weights: result.weights.clone(),
            curves,
            pairwise,
            forest_params,
            seed,
        })
    }

    pub fn from_ablation(paths: &[AblationPath], metadata: ReportMetadata, forest_params: ForestParams) -> Self {
        let weights = paths.iter().map(|p| p.weight).collect();
        let docs = paths
            .iter()
            .map(|p| AblationPathDoc {
                w1: p.weight.w1,
                incumbent_row: p.incumbent_index,
                default_performance: p.default_performance,
                steps: p
                    .steps
                    .iter()
                    .map(|s| AblationStepDoc {
                        hyperparameter: s.hyperparameter.clone(),
                        delta: s.delta,
                        performance_after: s.performance_after,
                    })
                    .collect(),
            })
            .collect();
        AnalysisReport::Ablation(AblationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            metadata,
            weights,
            paths: docs,
            forest_params,
        })
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn metadata(&self) -> &ReportMetadata {
        match self {
            AnalysisReport::Fanova(r) => &r.metadata,
            AnalysisReport::Ablation(r) => &r.metadata,
        }
    }
}

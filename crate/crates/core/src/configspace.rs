//! Hyperparameter space definition, schema parsing, and the numeric encoding
//! consumed by the surrogates.
//!
//! Every hyperparameter maps to one encoded dimension. Float/int dimensions
//! are min-max scaled to [0, 1] (after a log10 transform for log-scale
//! ranges), categoricals become ordinal indices scaled to [0, 1], booleans
//! become {0, 1}, and inactive conditional hyperparameters take the sentinel
//! coordinate -1. Declaration order is the canonical dimension order
//! everywhere downstream.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Sentinel coordinate for an inactive conditional hyperparameter.
pub const INACTIVE: f64 = -1.0;

/// A hyperparameter value. `Int` must precede `Float` so that untagged
/// deserialization keeps integer JSON numbers integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Cat(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }

    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Bool(_) => "bool",
            Value::Cat(_) => "string",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Cat(v) => write!(f, "{v}"),
        }
    }
}

/// The domain of one hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Float { lower: f64, upper: f64, log: bool },
    Int { lower: i64, upper: i64, log: bool },
    Categorical { categories: Vec<String> },
    Boolean,
}

impl Domain {
    fn kind_name(&self) -> &'static str {
        match self {
            Domain::Float { .. } => "float",
            Domain::Int { .. } => "int",
            Domain::Categorical { .. } => "categorical",
            Domain::Boolean => "boolean",
        }
    }
}

/// Activation condition: the hyperparameter is part of a configuration only
/// when its parent takes exactly `value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub parent: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterSpec {
    pub name: String,
    pub domain: Domain,
    pub default: Value,
    pub condition: Option<Condition>,
}

/// An ordered, validated set of hyperparameter specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSpace {
    name: String,
    specs: Vec<HyperparameterSpec>,
}

/// A (possibly partial) assignment of values to hyperparameters. Inactive
/// conditional hyperparameters are simply absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    values: BTreeMap<String, Value>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn set(&mut self, name: impl Into<String>, value: Value) {
        self.values.insert(name.into(), value);
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Self {
        self.set(name, value);
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Schema parsing
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    name: String,
    hyperparameters: Vec<RawHp>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHp {
    name: String,
    #[serde(rename = "type")]
    kind: String,
    lower: Option<serde_json::Number>,
    upper: Option<serde_json::Number>,
    log: Option<bool>,
    categories: Option<Vec<String>>,
    default: Option<serde_json::Value>,
    condition: Option<RawCondition>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCondition {
    parent: String,
    value: serde_json::Value,
}

#[derive(Serialize)]
struct SchemaHp<'a> {
    name: &'a str,
    #[serde(rename = "type")]
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    categories: Option<&'a [String]>,
    default: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition: Option<&'a Condition>,
}

#[derive(Serialize)]
struct SchemaSpace<'a> {
    name: &'a str,
    hyperparameters: Vec<SchemaHp<'a>>,
}

fn json_to_value(v: &serde_json::Value) -> Result<Value> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Value::Int(i))
            } else if let Some(f) = n.as_f64() {
                Ok(Value::Float(f))
            } else {
                Err(Error::Schema(format!("unrepresentable number {n}")))
            }
        }
        serde_json::Value::Bool(b) => Ok(Value::Bool(*b)),
        serde_json::Value::String(s) => Ok(Value::Cat(s.clone())),
        other => Err(Error::Schema(format!(
            "expected number, bool, or string, got {other}"
        ))),
    }
}

/// Coerces `value` to the representation expected by `domain` (e.g. an
/// integral JSON number used as a float default), without range checks.
fn coerce_value(value: Value, domain: &Domain, name: &str) -> Result<Value> {
    let mismatch = |v: &Value| {
        Err(Error::Schema(format!(
            "hyperparameter '{name}': expected a {} value, got {}",
            domain.kind_name(),
            v.type_name()
        )))
    };
    match domain {
        Domain::Float { .. } => match value {
            Value::Float(_) => Ok(value),
            Value::Int(i) => Ok(Value::Float(i as f64)),
            ref v => mismatch(v),
        },
        Domain::Int { .. } => match value {
            Value::Int(_) => Ok(value),
            Value::Float(f) if f.fract() == 0.0 => Ok(Value::Int(f as i64)),
            ref v => mismatch(v),
        },
        Domain::Categorical { .. } => match value {
            Value::Cat(_) => Ok(value),
            ref v => mismatch(v),
        },
        Domain::Boolean => match value {
            Value::Bool(_) => Ok(value),
            ref v => mismatch(v),
        },
    }
}

fn check_in_domain(value: &Value, domain: &Domain, name: &str) -> Result<()> {
    let out = |reason: String| {
        Err(Error::OutOfDomain {
            name: name.to_string(),
            reason,
        })
    };
    match (domain, value) {
        (Domain::Float { lower, upper, .. }, Value::Float(v)) => {
            if !v.is_finite() || v < lower || v > upper {
                return out(format!("{v} not in [{lower}, {upper}]"));
            }
        }
        (Domain::Int { lower, upper, .. }, Value::Int(v)) => {
            if v < lower || v > upper {
                return out(format!("{v} not in [{lower}, {upper}]"));
            }
        }
        (Domain::Categorical { categories }, Value::Cat(v)) => {
            if !categories.iter().any(|c| c == v) {
                return out(format!("'{v}' not one of {categories:?}"));
            }
        }
        (Domain::Boolean, Value::Bool(_)) => {}
        (d, v) => {
            return out(format!(
                "expected a {} value, got {}",
                d.kind_name(),
                v.type_name()
            ))
        }
    }
    Ok(())
}

fn build_domain(raw: &RawHp) -> Result<Domain> {
    let name = &raw.name;
    let require_bounds = || -> Result<(f64, f64)> {
        match (&raw.lower, &raw.upper) {
            (Some(lo), Some(hi)) => {
                let lo = lo
                    .as_f64()
                    .ok_or_else(|| Error::Schema(format!("'{name}': bad lower bound")))?;
                let hi = hi
                    .as_f64()
                    .ok_or_else(|| Error::Schema(format!("'{name}': bad upper bound")))?;
                Ok((lo, hi))
            }
            _ => Err(Error::Schema(format!(
                "'{name}': float/int hyperparameters need 'lower' and 'upper'"
            ))),
        }
    };
    let reject_numeric_fields = || -> Result<()> {
        if raw.lower.is_some() || raw.upper.is_some() || raw.log.is_some() {
            return Err(Error::Schema(format!(
                "'{name}': 'lower'/'upper'/'log' are only valid for float/int kinds"
            )));
        }
        Ok(())
    };

    let domain = match raw.kind.as_str() {
        "float" => {
            if raw.categories.is_some() {
                return Err(Error::Schema(format!(
                    "'{name}': 'categories' is only valid for the categorical kind"
                )));
            }
            let (lower, upper) = require_bounds()?;
            Domain::Float {
                lower,
                upper,
                log: raw.log.unwrap_or(false),
            }
        }
        "int" => {
            if raw.categories.is_some() {
                return Err(Error::Schema(format!(
                    "'{name}': 'categories' is only valid for the categorical kind"
                )));
            }
            let (lower, upper) = require_bounds()?;
            if lower.fract() != 0.0 || upper.fract() != 0.0 {
                return Err(Error::Schema(format!(
                    "'{name}': int bounds must be integers"
                )));
            }
            Domain::Int {
                lower: lower as i64,
                upper: upper as i64,
                log: raw.log.unwrap_or(false),
            }
        }
        "categorical" => {
            reject_numeric_fields()?;
            let categories = raw.categories.clone().ok_or_else(|| {
                Error::Schema(format!("'{name}': categorical kind needs 'categories'"))
            })?;
            Domain::Categorical { categories }
        }
        "boolean" => {
            reject_numeric_fields()?;
            if raw.categories.is_some() {
                return Err(Error::Schema(format!(
                    "'{name}': 'categories' is only valid for the categorical kind"
                )));
            }
            Domain::Boolean
        }
        other => {
            return Err(Error::Schema(format!(
                "'{name}': unknown hyperparameter type '{other}'"
            )))
        }
    };

    // Domain-level invariants.
    match &domain {
        Domain::Float { lower, upper, log } => {
            if lower >= upper || !lower.is_finite() || !upper.is_finite() {
                return Err(Error::Domain(format!(
                    "'{name}': lower ({lower}) must be < upper ({upper})"
                )));
            }
            if *log && *lower <= 0.0 {
                return Err(Error::Domain(format!(
                    "'{name}': log scale requires lower > 0, got {lower}"
                )));
            }
        }
        Domain::Int { lower, upper, log } => {
            if lower >= upper {
                return Err(Error::Domain(format!(
                    "'{name}': lower ({lower}) must be < upper ({upper})"
                )));
            }
            if *log && *lower <= 0 {
                return Err(Error::Domain(format!(
                    "'{name}': log scale requires lower > 0, got {lower}"
                )));
            }
        }
        Domain::Categorical { categories } => {
            if categories.len() < 2 {
                return Err(Error::Domain(format!(
                    "'{name}': categorical needs at least 2 categories"
                )));
            }
            let mut seen = std::collections::BTreeSet::new();
            for c in categories {
                if !seen.insert(c) {
                    return Err(Error::Schema(format!("'{name}': duplicate category '{c}'")));
                }
            }
        }
        Domain::Boolean => {}
    }
    Ok(domain)
}

/// Parses and validates a config-space schema document.
pub fn parse_space(schema_text: &str) -> Result<ConfigSpace> {
    let raw: RawSpace =
        serde_json::from_str(schema_text).map_err(|e| Error::Schema(e.to_string()))?;

    let mut specs = Vec::with_capacity(raw.hyperparameters.len());
    for hp in &raw.hyperparameters {
        let domain = build_domain(hp)?;
        let default_json = hp
            .default
            .as_ref()
            .ok_or_else(|| Error::Schema(format!("'{}': missing 'default'", hp.name)))?;
        let default = coerce_value(json_to_value(default_json)?, &domain, &hp.name)?;
        check_in_domain(&default, &domain, &hp.name).map_err(|e| Error::Domain(e.to_string()))?;
        let condition = match &hp.condition {
            Some(c) => Some(Condition {
                parent: c.parent.clone(),
                value: json_to_value(&c.value)?,
            }),
            None => None,
        };
        specs.push(HyperparameterSpec {
            name: hp.name.clone(),
            domain,
            default,
            condition,
        });
    }

    ConfigSpace::new(raw.name, specs)
}

// ---------------------------------------------------------------------------
// ConfigSpace
// ---------------------------------------------------------------------------

impl ConfigSpace {
    /// Builds a space from parts, validating all invariants.
    pub fn new(name: impl Into<String>, specs: Vec<HyperparameterSpec>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &specs {
            if !seen.insert(s.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate hyperparameter name '{}'",
                    s.name
                )));
            }
        }
        let mut validated = Vec::with_capacity(specs.len());
        for s in specs.iter() {
            // Re-run domain/default checks so hand-built specs get the same
            // validation as parsed ones.
            check_in_domain(&s.default, &s.domain, &s.name)
                .map_err(|e| Error::Domain(e.to_string()))?;
            if let Some(cond) = &s.condition {
                if cond.parent == s.name {
                    return Err(Error::Condition(format!(
                        "'{}' conditions on itself",
                        s.name
                    )));
                }
                let parent = specs.iter().find(|p| p.name == cond.parent).ok_or_else(|| {
                    Error::Condition(format!(
                        "'{}' conditions on unknown parent '{}'",
                        s.name, cond.parent
                    ))
                })?;
                if parent.condition.is_some() {
                    return Err(Error::Condition(format!(
                        "'{}' conditions on '{}', which is itself conditional; \
                         nested conditions (and thus cycles) are not supported",
                        s.name, cond.parent
                    )));
                }
                let coerced = coerce_value(cond.value.clone(), &parent.domain, &cond.parent)
                    .map_err(|e| Error::Condition(e.to_string()))?;
                check_in_domain(&coerced, &parent.domain, &cond.parent)
                    .map_err(|e| Error::Condition(e.to_string()))?;
                let mut s = s.clone();
                s.condition = Some(Condition {
                    parent: cond.parent.clone(),
                    value: coerced,
                });
                validated.push(s);
                continue;
            }
            validated.push(s.clone());
        }
        Ok(Self {
            name: name.into(),
            specs: validated,
        })
    }

    /// Shorthand for a space of plain float dimensions on [0, 1].
    pub fn unit_floats(name: impl Into<String>, dims: &[&str]) -> Result<Self> {
        let specs = dims
            .iter()
            .map(|d| HyperparameterSpec {
                name: (*d).to_string(),
                domain: Domain::Float {
                    lower: 0.0,
                    upper: 1.0,
                    log: false,
                },
                default: Value::Float(0.5),
                condition: None,
            })
            .collect();
        Self::new(name, specs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn specs(&self) -> &[HyperparameterSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn spec(&self, dim: usize) -> &HyperparameterSpec {
        &self.specs[dim]
    }

    /// Dimension index of a hyperparameter name.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.specs.iter().map(|s| s.name.as_str())
    }

    /// Dimension indices of the conditional children of `dim`.
    pub fn children_of(&self, dim: usize) -> Vec<usize> {
        let parent = &self.specs[dim].name;
        self.specs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.condition.as_ref().is_some_and(|c| &c.parent == parent))
            .map(|(i, _)| i)
            .collect()
    }

    /// Integration domain of the encoded space: [0, 1] per dimension,
    /// extended to [-1, 1] for conditional dimensions so the inactive
    /// sentinel cell carries measure.
    pub fn encoded_domain(&self) -> Vec<(f64, f64)> {
        self.specs
            .iter()
            .map(|s| {
                if s.condition.is_some() {
                    (INACTIVE, 1.0)
                } else {
                    (0.0, 1.0)
                }
            })
            .collect()
    }

    /// Whether `dim` is active in `config` (condition absent or satisfied).
    pub fn is_active(&self, config: &Configuration, dim: usize) -> bool {
        match &self.specs[dim].condition {
            None => true,
            Some(cond) => config.get(&cond.parent) == Some(&cond.value),
        }
    }

    /// Encodes a configuration into the canonical numeric vector. Values
    /// supplied for inactive hyperparameters are ignored.
    pub fn encode(&self, config: &Configuration) -> Result<Vec<f64>> {
        self.encode_with(config, false)
    }

    /// Like [`ConfigSpace::encode`], but errors when a value is supplied for
    /// an inactive hyperparameter.
    pub fn encode_strict(&self, config: &Configuration) -> Result<Vec<f64>> {
        self.encode_with(config, true)
    }

    fn encode_with(&self, config: &Configuration, strict: bool) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.specs.len());
        for (dim, spec) in self.specs.iter().enumerate() {
            if !self.is_active(config, dim) {
                if strict && config.contains(&spec.name) {
                    return Err(Error::InactiveValue {
                        name: spec.name.clone(),
                    });
                }
                out.push(INACTIVE);
                continue;
            }
            let value = config.get(&spec.name).ok_or_else(|| Error::OutOfDomain {
                name: spec.name.clone(),
                reason: "missing value for active hyperparameter".into(),
            })?;
            let value = coerce_value(value.clone(), &spec.domain, &spec.name)
                .map_err(|e| Error::OutOfDomain {
                    name: spec.name.clone(),
                    reason: e.to_string(),
                })?;
            check_in_domain(&value, &spec.domain, &spec.name)?;
            out.push(encode_value(&value, &spec.domain));
        }
        Ok(out)
    }

    /// Decodes an encoded vector back into a configuration.
    pub fn decode(&self, vector: &[f64]) -> Result<Configuration> {
        if vector.len() != self.specs.len() {
            return Err(Error::ShapeMismatch(format!(
                "vector has {} coordinates, space has {} dimensions",
                vector.len(),
                self.specs.len()
            )));
        }
        for (dim, &c) in vector.iter().enumerate() {
            if c != INACTIVE && !(0.0..=1.0).contains(&c) {
                return Err(Error::OutOfRange { dim, value: c });
            }
        }
        let mut config = Configuration::new();
        // Unconditional dimensions first; conditional activity depends on them.
        for (dim, spec) in self.specs.iter().enumerate() {
            if spec.condition.is_some() {
                continue;
            }
            if vector[dim] == INACTIVE {
                return Err(Error::OutOfRange {
                    dim,
                    value: vector[dim],
                });
            }
            config.set(spec.name.clone(), decode_value(vector[dim], &spec.domain));
        }
        for (dim, spec) in self.specs.iter().enumerate() {
            if spec.condition.is_none() {
                continue;
            }
            let active = self.is_active(&config, dim);
            match (active, vector[dim] == INACTIVE) {
                (true, false) => {
                    config.set(spec.name.clone(), decode_value(vector[dim], &spec.domain));
                }
                (false, true) => {}
                // Sentinel/activity disagreement: the vector is not a valid
                // encoding under this space.
                (true, true) | (false, false) => {
                    return Err(Error::OutOfRange {
                        dim,
                        value: vector[dim],
                    });
                }
            }
        }
        Ok(config)
    }

    /// Serializes the space back into the external schema document format
    /// accepted by [`parse_space`].
    pub fn to_schema_json(&self) -> String {
        let hyperparameters = self
            .specs
            .iter()
            .map(|s| {
                let (kind, lower, upper, log, categories) = match &s.domain {
                    Domain::Float { lower, upper, log } => {
                        ("float", Some(*lower), Some(*upper), Some(*log), None)
                    }
                    Domain::Int { lower, upper, log } => (
                        "int",
                        Some(*lower as f64),
                        Some(*upper as f64),
                        Some(*log),
                        None,
                    ),
                    Domain::Categorical { categories } => {
                        ("categorical", None, None, None, Some(categories.as_slice()))
                    }
                    Domain::Boolean => ("boolean", None, None, None, None),
                };
                SchemaHp {
                    name: &s.name,
                    kind,
                    lower,
                    upper,
                    log,
                    categories,
                    default: &s.default,
                    condition: s.condition.as_ref(),
                }
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&SchemaSpace {
            name: &self.name,
            hyperparameters,
        })
        .expect("schema serialization cannot fail");
        out.push('\n');
        out
    }

    /// The configuration assembled from per-spec defaults, honoring
    /// conditional activity.
    pub fn default_config(&self) -> Configuration {
        let mut config = Configuration::new();
        for spec in self.specs.iter().filter(|s| s.condition.is_none()) {
            config.set(spec.name.clone(), spec.default.clone());
        }
        for (dim, spec) in self.specs.iter().enumerate() {
            if spec.condition.is_some() && self.is_active(&config, dim) {
                config.set(spec.name.clone(), spec.default.clone());
            }
        }
        config
    }
}

fn transform(v: f64, log: bool) -> f64 {
    if log {
        v.log10()
    } else {
        v
    }
}

fn encode_value(value: &Value, domain: &Domain) -> f64 {
    match (domain, value) {
        (Domain::Float { lower, upper, log }, Value::Float(v)) => {
            let lo = transform(*lower, *log);
            let hi = transform(*upper, *log);
            (transform(*v, *log) - lo) / (hi - lo)
        }
        (Domain::Int { lower, upper, log }, Value::Int(v)) => {
            let lo = transform(*lower as f64, *log);
            let hi = transform(*upper as f64, *log);
            (transform(*v as f64, *log) - lo) / (hi - lo)
        }
        (Domain::Categorical { categories }, Value::Cat(v)) => {
            let idx = categories.iter().position(|c| c == v).expect("validated");
            idx as f64 / (categories.len() - 1) as f64
        }
        (Domain::Boolean, Value::Bool(v)) => {
            if *v {
                1.0
            } else {
                0.0
            }
        }
        _ => unreachable!("value was coerced to the domain kind"),
    }
}

fn decode_value(coord: f64, domain: &Domain) -> Value {
    match domain {
        Domain::Float { lower, upper, log } => {
            let lo = transform(*lower, *log);
            let hi = transform(*upper, *log);
            let t = lo + coord * (hi - lo);
            let v = if *log { 10f64.powf(t) } else { t };
            Value::Float(v.clamp(*lower, *upper))
        }
        Domain::Int { lower, upper, log } => {
            let lo = transform(*lower as f64, *log);
            let hi = transform(*upper as f64, *log);
            let t = lo + coord * (hi - lo);
            let v = if *log { 10f64.powf(t) } else { t };
            Value::Int((v.round() as i64).clamp(*lower, *upper))
        }
        Domain::Categorical { categories } => {
            let k = categories.len() - 1;
            let idx = ((coord * k as f64).round() as usize).min(k);
            Value::Cat(categories[idx].clone())
        }
        Domain::Boolean => Value::Bool(coord.round() != 0.0),
    }
}

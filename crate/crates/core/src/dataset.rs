//! The performance meta-dataset: encoded configurations plus raw objective
//! columns and their min-max normalizers.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::configspace::{ConfigSpace, Configuration, Domain, Value};
use crate::error::Error;
use crate::Result;

/// Min-max normalizer fitted on one objective column.
///
/// `apply` deliberately does not clamp: surrogate predictions outside the
/// fitted range must keep their relative distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxNormalizer {
    min: f64,
    max: f64,
}

impl MinMaxNormalizer {
    pub fn fit(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { min, max }
    }

    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.max > self.min {
            (v - self.min) / (self.max - self.min)
        } else {
            0.0
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// True when the fitted column was constant.
    pub fn is_degenerate(&self) -> bool {
        self.max <= self.min
    }
}

/// One minimized objective: raw values plus the normalizer fitted on them.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveColumn {
    name: String,
    raw: Vec<f64>,
    normalizer: MinMaxNormalizer,
}

impl ObjectiveColumn {
    pub fn new(name: impl Into<String>, raw: Vec<f64>) -> Self {
        let name = name.into();
        let normalizer = MinMaxNormalizer::fit(&raw);
        if normalizer.is_degenerate() {
            log::warn!("objective '{name}' is degenerate (constant column); normalizes to 0");
        }
        Self { name, raw, normalizer }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn normalizer(&self) -> &MinMaxNormalizer {
        &self.normalizer
    }

    /// The min-max normalized column; a degenerate column maps to all zeros.
    pub fn normalized(&self) -> Vec<f64> {
        self.raw.iter().map(|&v| self.normalizer.apply(v)).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.normalizer.is_degenerate()
    }
}

/// Encoded configuration matrix plus objective columns. Immutable after
/// construction; analysis workers share it read-only.
#[derive(Debug, Clone)]
pub struct MetaDataset {
    space: ConfigSpace,
    configs: Vec<Configuration>,
    x: Vec<Vec<f64>>,
    objectives: Vec<ObjectiveColumn>,
}

impl MetaDataset {
    /// Builds a dataset from configurations, encoding them against `space`.
    pub fn from_parts(
        space: ConfigSpace,
        configs: Vec<Configuration>,
        objectives: Vec<ObjectiveColumn>,
    ) -> Result<Self> {
        if configs.len() < 2 {
            return Err(Error::EmptyDataset { rows: configs.len() });
        }
        for col in &objectives {
            if col.raw.len() != configs.len() {
                return Err(Error::ShapeMismatch(format!(
                    "objective '{}' has {} values for {} rows",
                    col.name,
                    col.raw.len(),
                    configs.len()
                )));
            }
            if let Some(row) = col.raw.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteObjective {
                    row,
                    column: col.name.clone(),
                });
            }
        }
        let x = configs
            .iter()
            .map(|c| space.encode(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { space, configs, x, objectives })
    }

    /// Loads a meta-dataset CSV. The header must contain every hyperparameter
    /// name of `space` and every name in `objective_names` (in any order);
    /// extra columns are ignored. Empty hyperparameter cells mark inactive
    /// conditional hyperparameters.
    pub fn load_csv(path: impl AsRef<Path>, space: &ConfigSpace, objective_names: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(file);

        let header = reader
            .headers()
            .map_err(|e| Error::Parse { row: 0, column: "<header>".into(), message: e.to_string() })?
            .clone();
        let column_index = |name: &str| -> Result<usize> {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn { column: name.to_string() })
        };
        let hp_cols: Vec<usize> = space
            .names()
            .map(column_index)
            .collect::<Result<Vec<_>>>()?;
        let obj_cols: Vec<usize> = objective_names
            .iter()
            .map(|n| column_index(n))
            .collect::<Result<Vec<_>>>()?;

        let mut configs = Vec::new();
        let mut raw_objectives: Vec<Vec<f64>> = vec![Vec::new(); objective_names.len()];
        for (i, record) in reader.records().enumerate() {
            let row = i + 1; // 1-based, header is row 0
            let record = record.map_err(|e| Error::Parse {
                row,
                column: "<record>".into(),
                message: e.to_string(),
            })?;
            let mut config = Configuration::new();
            for (dim, &col) in hp_cols.iter().enumerate() {
                let spec = space.spec(dim);
                let cell = record.get(col).unwrap_or("");
                if cell.is_empty() {
                    continue;
                }
                let value = parse_cell(cell, &spec.domain).map_err(|message| Error::Parse {
                    row,
                    column: spec.name.clone(),
                    message,
                })?;
                config.set(spec.name.clone(), value);
            }
            // Validate the row by encoding it; report failures with position.
            space.encode(&config).map_err(|e| Error::Parse {
                row,
                column: match &e {
                    Error::OutOfDomain { name, .. } => name.clone(),
                    _ => "<row>".into(),
                },
                message: e.to_string(),
            })?;
            configs.push(config);

            for (k, &col) in obj_cols.iter().enumerate() {
                let cell = record.get(col).unwrap_or("");
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    row,
                    column: objective_names[k].clone(),
                    message: format!("'{cell}' is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteObjective {
                        row,
                        column: objective_names[k].clone(),
                    });
                }
                raw_objectives[k].push(v);
            }
        }

        let objectives = objective_names
            .iter()
            .zip(raw_objectives)
            .map(|(name, raw)| ObjectiveColumn::new(name.clone(), raw))
            .collect();
        Self::from_parts(space.clone(), configs, objectives)
    }

    /// Writes the dataset as CSV with hyperparameters in canonical order
    /// followed by objective columns. Re-serialization of a loaded file is
    /// byte-identical after one load/write cycle.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.write_csv_to(file).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn write_csv_to<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        let header: Vec<&str> = self
            .space
            .names()
            .chain(self.objectives.iter().map(|o| o.name.as_str()))
            .collect();
        w.write_record(&header)?;
        for (i, config) in self.configs.iter().enumerate() {
            let mut record: Vec<String> = Vec::with_capacity(header.len());
            for name in self.space.names() {
                record.push(match config.get(name) {
                    Some(v) => v.to_string(),
                    None => String::new(),
                });
            }
            for col in &self.objectives {
                record.push(col.raw[i].to_string());
            }
            w.write_record(&record)?;
        }
        w.flush()
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.configs.len()
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn config(&self, row: usize) -> &Configuration {
        &self.configs[row]
    }

    pub fn objectives(&self) -> &[ObjectiveColumn] {
        &self.objectives
    }

    pub fn objective(&self, idx: usize) -> &ObjectiveColumn {
        &self.objectives[idx]
    }

    /// The two objective columns required by the multi-objective analyses.
    pub fn objective_pair(&self) -> Result<(&ObjectiveColumn, &ObjectiveColumn)> {
        if self.objectives.len() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "analysis needs exactly 2 objectives, dataset has {}",
                self.objectives.len()
            )));
        }
        Ok((&self.objectives[0], &self.objectives[1]))
    }
}

fn parse_cell(cell: &str, domain: &Domain) -> std::result::Result<Value, String> {
    let cell = cell.trim();
    match domain {
        Domain::Float { .. } => cell
            .parse::<f64>()
            .map(Value::Float)
            .map_err(|_| format!("'{cell}' is not a float")),
        Domain::Int { .. } => cell
            .parse::<i64>()
            .map(Value::Int)
            .or_else(|_| {
                // Tolerate float-formatted integers such as "3.0".
                cell.parse::<f64>()
                    .ok()
                    .filter(|f| f.fract() == 0.0)
                    .map(|f| Value::Int(f as i64))
                    .ok_or(())
            })
            .map_err(|_| format!("'{cell}' is not an integer")),
        Domain::Categorical { .. } => Ok(Value::Cat(cell.to_string())),
        Domain::Boolean => match cell {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(format!("'{cell}' is not a boolean (true/false)")),
        },
    }
}

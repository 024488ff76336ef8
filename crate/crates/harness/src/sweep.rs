//! Parameter sweeps: a base config crossed with value axes.

use rayon::prelude::*;
use resetsim_core::rng::derive_seed;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::config::{config_from_value, ConfigError, SCHEMA_VERSION};
use crate::metrics::{metric_names, run_config, Metrics};
use crate::table::{fmt_num, fmt_opt, CsvTable};

pub const DEFAULT_MAX_CELLS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("base config: {0}")]
    Base(ConfigError),
    #[error("sweep has {cells} cells, more than max_cells = {max}")]
    TooManyCells { cells: usize, max: usize },
}

#[derive(JsonSchema, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// Each cell gets `derive_seed(base seed, cell index)`.
    #[default]
    Derived,
    /// Every cell reuses the base seed (common random numbers).
    Shared,
}

/// One sweep dimension. Either `path` with scalar `values`, or `paths` with
/// one array per value holding a value for each path (zipped parameters).
/// `labels`, if given, adds a column named `name` (default `label`).
#[derive(JsonSchema, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<String>>,
    pub values: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Axis {
    pub fn paths(&self) -> Vec<String> {
        match (&self.path, &self.paths) {
            (Some(p), _) => vec![p.clone()],
            (None, Some(ps)) => ps.clone(),
            (None, None) => Vec::new(),
        }
    }

    fn validate(&self, i: usize) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::Schema(format!("axes[{i}]: {m}")));
        match (&self.path, &self.paths) {
            (Some(_), Some(_)) => return bad("give either path or paths, not both".into()),
            (None, None) => return bad("missing path".into()),
            (None, Some(ps)) => {
                if ps.is_empty() {
                    return bad("paths is empty".into());
                }
                for (j, v) in self.values.iter().enumerate() {
                    match v {
                        Value::Array(a) if a.len() == ps.len() => {}
                        _ => return bad(format!("values[{j}] must be an array of {} values", ps.len())),
                    }
                }
            }
            (Some(_), None) => {}
        }
        if self.values.is_empty() {
            return bad("values is empty".into());
        }
        if let Some(l) = &self.labels {
            if l.len() != self.values.len() {
                return bad(format!("{} labels for {} values", l.len(), self.values.len()));
            }
        }
        Ok(())
    }

    /// `(path, value)` pairs for the `k`-th value.
    fn assignments(&self, k: usize) -> Vec<(String, Value)> {
        match &self.path {
            Some(p) => vec![(p.clone(), self.values[k].clone())],
            None => {
                let Value::Array(vals) = &self.values[k] else { unreachable!("validated") };
                self.paths().into_iter().zip(vals.iter().cloned()).collect()
            }
        }
    }

    fn label_column(&self) -> Option<String> {
        self.labels
            .as_ref()
            .map(|_| self.name.clone().unwrap_or_else(|| "label".into()))
    }
}

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

#[derive(JsonSchema, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    /// A complete run config; every cell starts from it.
    pub base: Value,
    pub axes: Vec<Axis>,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
    #[serde(default)]
    pub seeds: SeedMode,
}

impl SweepSpec {
    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SweepError::Schema(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        for (i, a) in self.axes.iter().enumerate() {
            a.validate(i)?;
        }
        config_from_value(self.base.clone()).map_err(SweepError::Base)?;
        let cells = self.cell_count();
        if cells > self.max_cells {
            return Err(SweepError::TooManyCells { cells, max: self.max_cells });
        }
        Ok(())
    }

    fn base_seed(&self) -> u64 {
        self.base.get("seed").and_then(Value::as_u64).unwrap_or(0)
    }

    /// Axis value indices of cell `index`; the first axis varies slowest.
    pub fn cell_indices(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = index % a.values.len();
            index /= a.values.len();
        }
        out
    }

    /// The run-config document of cell `index`, before validation.
    pub fn cell_document(&self, index: usize) -> Value {
        let mut doc = self.base.clone();
        let seed = match self.seeds {
            SeedMode::Derived => derive_seed(self.base_seed(), index as u64),
            SeedMode::Shared => self.base_seed(),
        };
        set_path(&mut doc, "seed", Value::from(seed));
        for (axis, k) in self.axes.iter().zip(self.cell_indices(index)) {
            for (path, v) in axis.assignments(k) {
                set_path(&mut doc, &path, v);
            }
        }
        doc
    }
}

pub fn parse_sweep(document: &str) -> Result<SweepSpec, SweepError> {
    let spec: SweepSpec = serde_json::from_str(document).map_err(|e| SweepError::Schema(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Set a dotted path (`a.b.0.c`), creating objects along the way. Numeric
/// components index into existing arrays.
pub fn set_path(doc: &mut Value, path: &str, value: Value) {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        let index = part
            .parse::<usize>()
            .ok()
            .filter(|&idx| cur.as_array().is_some_and(|a| idx < a.len()));
        if let Some(idx) = index {
            let slot = &mut cur.as_array_mut().expect("array")[idx];
            if last {
                *slot = value;
                return;
            }
            cur = slot;
            continue;
        }
        if !cur.is_object() {
            *cur = Value::Object(Default::default());
        }
        let map = cur.as_object_mut().expect("object");
        if last {
            map.insert((*part).to_owned(), value);
            return;
        }
        cur = map.entry((*part).to_owned()).or_insert(Value::Null);
    }
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => n.as_f64().map(fmt_num).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub index: usize,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
}

pub fn run_cell(spec: &SweepSpec, index: usize) -> CellResult {
    let outcome = config_from_value(spec.cell_document(index))
        .map_err(|e| e.to_string())
        .and_then(|c| run_config(&c).map_err(|e| e.to_string()));
    match outcome {
        Ok((_, m)) => CellResult { index, metrics: Some(m), error: None },
        Err(e) => CellResult { index, metrics: None, error: Some(e) },
    }
}

/// Run every cell and assemble the table. Cells are independent; results
/// are ordered by cell index whichever way they were computed.
pub fn run_sweep(spec: &SweepSpec, parallel: bool) -> Result<CsvTable, SweepError> {
    spec.validate()?;
    let n = spec.cell_count();
    let mut results: Vec<CellResult> = if parallel {
        (0..n).into_par_iter().map(|i| run_cell(spec, i)).collect()
    } else {
        (0..n).map(|i| run_cell(spec, i)).collect()
    };
    results.sort_by_key(|r| r.index);
    Ok(assemble(spec, &results))
}

fn metric_columns(spec: &SweepSpec, results: &[CellResult]) -> Vec<&'static str> {
    let mut cols: Vec<&'static str> = Vec::new();
    let mut add = |names: Vec<&'static str>| {
        for n in names {
            if !cols.contains(&n) {
                cols.push(n);
            }
        }
    };
    if let Ok(base) = config_from_value(spec.base.clone()) {
        add(metric_names(base.plant.kind(), base.attacker.is_some()));
    }
    for r in results {
        if let Some(m) = &r.metrics {
            add(m.values.iter().map(|(n, _)| *n).collect());
        }
    }
    cols
}

fn assemble(spec: &SweepSpec, results: &[CellResult]) -> CsvTable {
    let metrics = metric_columns(spec, results);
    let mut header = vec!["cell_index".to_owned()];
    for a in &spec.axes {
        header.extend(a.paths());
        header.extend(a.label_column());
    }
    header.extend(metrics.iter().map(|s| s.to_string()));
    header.push("error".into());
    let mut table = CsvTable::new(header);
    for r in results {
        let mut row = vec![r.index.to_string()];
        for (a, k) in spec.axes.iter().zip(spec.cell_indices(r.index)) {
            row.extend(a.assignments(k).iter().map(|(_, v)| fmt_value(v)));
            if let Some(l) = &a.labels {
                row.push(l[k].clone());
            }
        }
        for name in &metrics {
            row.push(fmt_opt(r.metrics.as_ref().and_then(|m| m.get(name))));
        }
        row.push(r.error.clone().unwrap_or_default());
        table.rows.push(row);
    }
    table
}

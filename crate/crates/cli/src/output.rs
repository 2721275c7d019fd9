//! CSV rows and JSON summaries.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

pub const CSV_HEADER: [&str; 6] = ["experiment", "seed", "sample_id", "n", "value", "method"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    pub fn from_bits_flag(bits: bool) -> Self {
        if bits {
            Unit::Bits
        } else {
            Unit::Nats
        }
    }

    /// Converts a value in nats.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub experiment: &'static str,
    pub seed: u64,
    pub sample_id: usize,
    pub n: usize,
    pub value: f64,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub pass: bool,
    /// `nats`, `bits`, `probability`, or `mixed` for the selftest suite.
    pub units: String,
}

impl CheckRecord {
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64, units: &str) -> Self {
        Self { name: name.into(), bound, observed, pass: observed <= bound, units: units.into() }
    }
}

/// Entropy-valued fields are stored in nats and converted on write.
#[derive(Clone, Debug)]
pub struct Summary {
    pub experiment: &'static str,
    pub seed: u64,
    pub method: String,
    pub horizon: usize,
    pub samples: usize,
    pub workers: usize,
    pub estimate_nats: f64,
    pub stderr_nats: f64,
    pub checks: Vec<CheckRecord>,
    pub exploratory: bool,
    pub extra: Map<String, Value>,
}

impl Summary {
    pub fn new(experiment: &'static str, seed: u64, horizon: usize, samples: usize, workers: usize) -> Self {
        Self {
            experiment,
            seed,
            method: String::new(),
            horizon,
            samples,
            workers,
            estimate_nats: 0.0,
            stderr_nats: 0.0,
            checks: Vec::new(),
            exploratory: false,
            extra: Map::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self, unit: Unit) -> Value {
        let mut out = Map::new();
        out.insert("experiment".into(), self.experiment.into());
        out.insert("seed".into(), self.seed.into());
        out.insert("method".into(), self.method.clone().into());
        out.insert("horizon".into(), self.horizon.into());
        out.insert("samples".into(), self.samples.into());
        out.insert("workers".into(), self.workers.into());
        out.insert("estimate_nats".into(), self.estimate_nats.into());
        out.insert("estimate".into(), unit.convert(self.estimate_nats).into());
        out.insert("stderr".into(), unit.convert(self.stderr_nats).into());
        out.insert("units".into(), Value::String(unit.name().into()));
        let checks: Vec<CheckRecord> = self
            .checks
            .iter()
            .map(|c| match c.units.as_str() {
                "nats" => CheckRecord {
                    bound: unit.convert(c.bound),
                    observed: unit.convert(c.observed),
                    units: unit.name().into(),
                    ..c.clone()
                },
                _ => c.clone(),
            })
            .collect();
        out.insert("checks".into(), serde_json::to_value(checks).expect("plain data"));
        out.insert("pass".into(), self.passed().into());
        out.insert("exploratory".into(), self.exploratory.into());
        out.insert("ergodicity_note".into(), fsmb::smb::ERGODICITY_NOTE.into());
        for (k, v) in &self.extra {
            out.insert(k.clone(), v.clone());
        }
        Value::Object(out)
    }
}

pub struct Artifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.json`.
pub fn write(dir: &Path, summary: &Summary, rows: &[Row], unit: Unit) -> Result<Artifacts> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{}.csv", summary.experiment));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&csv_path)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(Row { value: unit.convert(row.value), ..row.clone() })?;
    }
    w.flush()?;
    let json_path = dir.join(format!("{}.json", summary.experiment));
    let text = serde_json::to_string_pretty(&summary.to_json(unit))?;
    fs::write(&json_path, text + "\n").with_context(|| format!("writing {}", json_path.display()))?;
    Ok(Artifacts { csv: csv_path, json: json_path })
}

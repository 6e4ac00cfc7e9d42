//! CSV curve files, the run manifest and the post-write self-check.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Mc,
}

/// One CSV row: `x, y, units, source, ci_low, ci_high`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    pub y: f64,
    pub units: String,
    pub source: Source,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

/// Expected shape of a curve, checked after writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Nondecreasing,
    Nonincreasing,
    Any,
}

/// Curve `y(x)` with axis units and a monotonicity contract.
#[derive(Debug, Clone)]
pub struct Curve {
    pub name: String,
    pub source: Source,
    pub x_unit: &'static str,
    pub y_unit: &'static str,
    pub shape: Shape,
    /// `y` must stay in [0, 1].
    pub probability: bool,
    pub points: Vec<(f64, f64, Option<(f64, f64)>)>,
}

impl Curve {
    pub fn new(name: impl Into<String>, source: Source, x_unit: &'static str, y_unit: &'static str) -> Self {
        Self {
            name: name.into(),
            source,
            x_unit,
            y_unit,
            shape: Shape::Any,
            probability: false,
            points: Vec::new(),
        }
    }

    pub fn shape(mut self, shape: Shape) -> Self {
        self.shape = shape;
        self
    }

    pub fn probability(mut self) -> Self {
        self.probability = true;
        self
    }

    pub fn push(&mut self, x: f64, y: f64) {
        self.points.push((x, y, None));
    }

    pub fn push_ci(&mut self, x: f64, y: f64, low: f64, high: f64) {
        self.points.push((x, y, Some((low, high))));
    }

    fn rows(&self) -> Vec<Row> {
        let units = format!("{};{}", self.x_unit, self.y_unit);
        self.points
            .iter()
            .map(|&(x, y, ci)| Row {
                x,
                y,
                units: units.clone(),
                source: self.source,
                ci_low: ci.map(|c| c.0),
                ci_high: ci.map(|c| c.1),
            })
            .collect()
    }
}

/// Absolute slack allowed in monotonicity checks of analytic curves.
const SHAPE_SLACK: f64 = 1e-6;

/// Reads a written CSV back and checks it against the curve's contract.
pub fn self_check(path: &Path, shape: Shape, probability: bool, slack: f64) -> Result<usize, CliError> {
    let file = path.display().to_string();
    let fail = |message: String| CliError::SelfCheck {
        file: file.clone(),
        message,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected = ["x", "y", "units", "source", "ci_low", "ci_high"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(fail(format!("unexpected header {headers:?}")));
    }
    let rows: Vec<Row> = reader.deserialize().collect::<Result<_, _>>()?;
    for (i, r) in rows.iter().enumerate() {
        if !(r.x.is_finite() && r.y.is_finite()) {
            return Err(fail(format!("row {i} is not finite")));
        }
        if probability && !(0.0..=1.0).contains(&r.y) {
            return Err(fail(format!("row {i}: probability {} outside [0, 1]", r.y)));
        }
        if let (Some(lo), Some(hi)) = (r.ci_low, r.ci_high) {
            if lo > hi {
                return Err(fail(format!("row {i}: interval [{lo}, {hi}] is inverted")));
            }
        }
    }
    for (i, pair) in rows.windows(2).enumerate() {
        if pair[1].x < pair[0].x {
            return Err(fail(format!("x decreases at row {}", i + 1)));
        }
        let dy = pair[1].y - pair[0].y;
        let broken = match shape {
            Shape::Nondecreasing => dy < -slack,
            Shape::Nonincreasing => dy > slack,
            Shape::Any => false,
        };
        if broken {
            return Err(fail(format!("monotonicity broken between rows {i} and {}", i + 1)));
        }
    }
    Ok(rows.len())
}

pub fn write_curve(dir: &Path, curve: &Curve) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.csv", curve.name));
    let mut writer = csv::Writer::from_path(&path)?;
    for row in curve.rows() {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    drop(writer);
    let slack = match curve.source {
        Source::Analytic => SHAPE_SLACK,
        Source::Mc => 0.0,
    };
    self_check(&path, curve.shape, curve.probability, slack)?;
    Ok(path)
}

/// SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(config: &ScenarioConfig) -> Result<String, CliError> {
    let json = serde_json::to_vec(config)?;
    Ok(Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub trials: usize,
    pub runtime_seconds: f64,
    pub files: Vec<String>,
    pub config: ScenarioConfig,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.manifest.json", manifest.experiment));
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

//! Run configuration: a TOML file of dotted keys plus `--set key=value` overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use quenched_core::{DisorderDistribution, McConfig, ModelParams, QuadratureConfig, SeriesConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub disorder: DisorderSection,
    pub series: SeriesSection,
    pub quadrature: QuadratureSection,
    pub mc: McSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub m0_sq: f64,
    pub lambda: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            m0_sq: 1.0,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderFamily {
    Uniform,
    TruncatedGaussian,
    Atoms,
    /// Untruncated normal law; always rejected.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSection {
    pub family: DisorderFamily,
    pub radius: f64,
    /// Variance of the (truncated) normal law.
    pub sigma: f64,
    /// `[[h, p], ...]`.
    pub atoms: Vec<[f64; 2]>,
}

impl Default for DisorderSection {
    fn default() -> Self {
        Self {
            family: DisorderFamily::Uniform,
            radius: 1.0,
            sigma: 1.0,
            atoms: vec![[0.0, 1.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSection {
    pub a: f64,
    pub k_max: usize,
    pub term_tol: f64,
}

impl Default for SeriesSection {
    fn default() -> Self {
        let d = SeriesConfig::default();
        Self {
            a: d.a,
            k_max: d.k_max,
            term_tol: d.term_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub decay_cutoff: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let d = QuadratureConfig::default();
        Self {
            abs_tol: d.abs_tol,
            rel_tol: d.rel_tol,
            max_subdivisions: d.max_subdivisions,
            decay_cutoff: d.decay_cutoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            seed: 24_301,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: Format,
    /// Empty means standard output.
    pub path: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            path: String::new(),
        }
    }
}

/// Validated domain objects built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ModelParams,
    pub dist: DisorderDistribution,
    pub series: SeriesConfig,
    pub quadrature: QuadratureConfig,
    pub mc: McConfig,
}

impl RunConfig {
    /// Loads `path` (if any), then applies `key=value` overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => Table::new(),
        };
        for entry in overrides {
            apply_override(&mut table, entry)?;
        }
        Self::from_table(table)
    }

    pub fn from_table(table: Table) -> Result<Self, CliError> {
        RunConfig::deserialize(Value::Table(table)).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let params = ModelParams::new(self.model.m0_sq, self.model.lambda)?;
        let d = &self.disorder;
        let dist = match d.family {
            DisorderFamily::Uniform => DisorderDistribution::uniform(d.radius)?,
            DisorderFamily::TruncatedGaussian => DisorderDistribution::truncated_gaussian(d.sigma, d.radius)?,
            DisorderFamily::Atoms => {
                DisorderDistribution::atoms(d.atoms.iter().map(|&[h, p]| (h, p)).collect())?
            }
            DisorderFamily::Gaussian => {
                return Err(CliError::Config(
                    "disorder.family = \"gaussian\" has non-compact support; the moment series \
                     needs a compactly supported law (use \"truncated_gaussian\" with disorder.radius)"
                        .into(),
                ))
            }
        };
        let series = SeriesConfig {
            a: self.series.a,
            k_max: self.series.k_max,
            term_tol: self.series.term_tol,
        };
        series.validate()?;
        let quadrature = QuadratureConfig {
            abs_tol: self.quadrature.abs_tol,
            rel_tol: self.quadrature.rel_tol,
            max_subdivisions: self.quadrature.max_subdivisions,
            decay_cutoff: self.quadrature.decay_cutoff,
        };
        quadrature.validate()?;
        Ok(Resolved {
            params,
            dist,
            series,
            quadrature,
            mc: McConfig {
                n_samples: self.mc.n_samples,
                seed: self.mc.seed,
            },
        })
    }

    /// Every key of the resolved config as `section.key → value`, sorted.
    pub fn flatten(&self) -> BTreeMap<String, serde_json::Value> {
        let mut out = BTreeMap::new();
        let value = serde_json::to_value(self).expect("config serializes");
        flatten_into("", &value, &mut out);
        out
    }
}

fn flatten_into(
    prefix: &str,
    value: &serde_json::Value,
    out: &mut BTreeMap<String, serde_json::Value>,
) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn apply_override(table: &mut Table, entry: &str) -> Result<(), CliError> {
    let (key, raw) = entry
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{entry}`")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed key `{key}`")));
    }
    let (last, path) = parts.split_last().expect("non-empty");
    let mut node = table;
    for part in path {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{part}` in `{key}` is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

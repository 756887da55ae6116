//! Run configuration: defaults, a flat `key = value` file, and flag overrides.
//!
//! File syntax is one `key = value` pair per line; blank lines and text after
//! `#` are ignored. Recognized keys:
//!
//! | key                 | meaning                                   | default            |
//! |---------------------|-------------------------------------------|--------------------|
//! | `dim`               | spatial dimension, 1 or 2                 | 1                  |
//! | `points`            | points per axis `N`, a power of two ≥ 8   | 4096 (1D), 512 (2D)|
//! | `half_width`        | box half-width `L`; accepts `64pi`        | 64π (1D), 16π (2D) |
//! | `j_min`, `j_max`    | dyadic scale range                        | -20, 20            |
//! | `transition_window` | dyadic cutoff window in `(0.5, 1]`        | 1                  |
//! | `lattice_radius`    | uniform partition check box `K`           | 16                 |
//! | `format`            | `json` or `csv`                           | json               |
//! | `threads`           | worker threads, 0 = one per core          | 0                  |
//!
//! Command-line flags override the file.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use mulspace_core::fixtures::RNG_ALGORITHM;
use mulspace_core::grid::GridParams;
use mulspace_core::{DyadicPartition, Grid, Partitions, UniformPartition};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Partial settings from one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dim: Option<usize>,
    pub points: Option<usize>,
    pub half_width: Option<f64>,
    pub j_min: Option<i32>,
    pub j_max: Option<i32>,
    pub transition_window: Option<f64>,
    pub lattice_radius: Option<i64>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

impl Overrides {
    /// `other` wins wherever it is set.
    pub fn merge(self, other: Overrides) -> Overrides {
        Overrides {
            dim: other.dim.or(self.dim),
            points: other.points.or(self.points),
            half_width: other.half_width.or(self.half_width),
            j_min: other.j_min.or(self.j_min),
            j_max: other.j_max.or(self.j_max),
            transition_window: other.transition_window.or(self.transition_window),
            lattice_radius: other.lattice_radius.or(self.lattice_radius),
            format: other.format.or(self.format),
            threads: other.threads.or(self.threads),
        }
    }
}

/// Parses a real number, optionally written as a multiple of π
/// (`pi`, `64pi`, `64*pi`, `0.5 π`).
pub fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let stripped = lower.strip_suffix("pi").or_else(|| lower.strip_suffix('π'));
    match stripped {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            let c = if coef.is_empty() {
                1.0
            } else {
                coef.parse::<f64>().ok()?
            };
            Some(c * PI)
        }
        None => t.parse::<f64>().ok(),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::validation(key, format!("cannot parse `{value}` for `{key}`")))
}

/// Parses the flat `key = value` text of a configuration file.
pub fn parse_config(text: &str) -> Result<Overrides, CliError> {
    let mut o = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::validation(
                "config",
                format!("line {}: expected `key = value`", lineno + 1),
            )
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "dim" => o.dim = Some(parse_value(key, value)?),
            "points" | "N" => o.points = Some(parse_value(key, value)?),
            "half_width" | "L" => {
                o.half_width = Some(parse_real(value).ok_or_else(|| {
                    CliError::validation(key, format!("cannot parse `{value}` for `{key}`"))
                })?)
            }
            "j_min" => o.j_min = Some(parse_value(key, value)?),
            "j_max" => o.j_max = Some(parse_value(key, value)?),
            "transition_window" => o.transition_window = Some(parse_value(key, value)?),
            "lattice_radius" => o.lattice_radius = Some(parse_value(key, value)?),
            "format" => {
                o.format = Some(match value {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    _ => {
                        return Err(CliError::validation(
                            key,
                            format!("unknown format `{value}`"),
                        ))
                    }
                })
            }
            "threads" => o.threads = Some(parse_value(key, value)?),
            _ => {
                return Err(CliError::validation(
                    key,
                    format!("unknown configuration key `{key}`"),
                ))
            }
        }
    }
    Ok(o)
}

pub fn load_config(path: &Path) -> Result<Overrides, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    pub transition_window: f64,
    pub lattice_radius: i64,
}

/// The validated settings of a run, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridParams,
    pub j_range: (i32, i32),
    pub partition: PartitionParams,
    pub rng_algorithm: String,
    pub format: Format,
}

impl RunConfig {
    /// Fills defaults and validates every field before any computation.
    pub fn resolve(o: &Overrides) -> Result<RunConfig, CliError> {
        let dim = o.dim.unwrap_or(1);
        let default = Grid::default_for_dim(dim)?;
        let grid = Grid::new(
            dim,
            o.points.unwrap_or(default.points()),
            o.half_width.unwrap_or(default.half_width()),
        )?;
        let (j_min, j_max) = (
            o.j_min.unwrap_or(DyadicPartition::DEFAULT_J_RANGE.0),
            o.j_max.unwrap_or(DyadicPartition::DEFAULT_J_RANGE.1),
        );
        if j_min > j_max {
            return Err(CliError::validation(
                "j_range",
                format!("j_min {j_min} exceeds j_max {j_max}"),
            ));
        }
        let config = RunConfig {
            grid: grid.params(),
            j_range: (j_min, j_max),
            partition: PartitionParams {
                transition_window: o.transition_window.unwrap_or(1.0),
                lattice_radius: o
                    .lattice_radius
                    .unwrap_or(UniformPartition::DEFAULT_LATTICE_RADIUS),
            },
            rng_algorithm: RNG_ALGORITHM.into(),
            format: o.format.unwrap_or_default(),
        };
        config.partitions()?;
        Ok(config)
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.grid.dim, self.grid.points, self.grid.half_width)
            .expect("validated in resolve")
    }

    /// Replaces the grid, e.g. by the one stored in an input file.
    pub fn with_grid(mut self, grid: &Grid) -> Self {
        self.grid = grid.params();
        self
    }

    pub fn partitions(&self) -> Result<Partitions, CliError> {
        let dyadic = DyadicPartition::new(self.partition.transition_window)?
            .with_j_range(self.j_range.0, self.j_range.1)?;
        let uniform = UniformPartition::new(self.grid.dim)?
            .with_lattice_radius(self.partition.lattice_radius)?;
        Ok(Partitions { dyadic, uniform })
    }
}

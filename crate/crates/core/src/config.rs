//! TOML run configuration: named parameter sets, Riemann problems, scans,
//! simulation settings, tolerances and output location.
//!
//! ```toml
//! [params.weak]
//! krw0 = 0.302
//! # ... every FoamParams field, physical units
//!
//! [problems.drainage]
//! params = "table1"
//! left = [0.1, 0.05]
//! right = [0.99, 0.5]
//! t = 0.5
//!
//! [simulation]
//! n_cells = 2000
//! dt = 5e-6
//!
//! [tolerances]
//! transition = 1e-9
//!
//! [output]
//! dir = "out"
//! ```
//!
//! The parameter set `table1`, the problems `drainage` and `imbibition`
//! and the scan `contact-shock` are always defined; entries in a file with
//! the same names replace them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{FluxError, FoamParams, State};
use crate::pde::{PdeError, SimConfig};
use crate::waves::Tolerances;

pub const DEFAULT_PARAMS: &str = "table1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("unknown {kind} '{name}' (known: {known})")]
    Unknown {
        kind: &'static str,
        name: String,
        known: String,
    },
    #[error("{context}: {source}")]
    Flux {
        context: String,
        #[source]
        source: FluxError,
    },
    #[error("{context}: {source}")]
    Simulation {
        context: String,
        #[source]
        source: PdeError,
    },
    #[error("{context}: {reason}")]
    Invalid { context: String, reason: String },
}

impl ConfigError {
    /// Whether the error is a value check rather than a missing or
    /// unreadable input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            ConfigError::Flux { .. } | ConfigError::Simulation { .. } | ConfigError::Invalid { .. }
        )
    }
}

fn default_params_name() -> String {
    DEFAULT_PARAMS.to_string()
}

fn default_samples() -> usize {
    501
}

fn default_x_max() -> f64 {
    1.0
}

/// A named Riemann problem; states are `[S, C]` in normalized variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default = "default_params_name")]
    pub params: String,
    pub left: [f64; 2],
    pub right: [f64; 2],
    pub t: f64,
    #[serde(default)]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl ProblemSpec {
    pub fn left_state(&self) -> State {
        State::new_unchecked(self.left[0], self.left[1])
    }

    pub fn right_state(&self) -> State {
        State::new_unchecked(self.right[0], self.right[1])
    }

    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        let context = format!("problem '{name}'");
        for (side, u) in [("left", self.left), ("right", self.right)] {
            State::new(u[0], u[1]).map_err(|source| ConfigError::Flux {
                context: format!("{context}, {side} state"),
                source,
            })?;
        }
        let invalid = |reason: &str| {
            Err(ConfigError::Invalid {
                context: context.clone(),
                reason: reason.to_string(),
            })
        };
        if !(self.t > 0.0 && self.t.is_finite()) {
            return invalid("t must be positive");
        }
        if !self.x_min.is_finite() || !self.x_max.is_finite() || self.x_max <= self.x_min {
            return invalid("x_max must exceed x_min");
        }
        if self.samples < 2 {
            return invalid("samples must be at least 2");
        }
        Ok(())
    }
}

/// A named segment of right states swept against a fixed left state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default = "default_params_name")]
    pub params: String,
    pub left: [f64; 2],
    pub from: [f64; 2],
    pub to: [f64; 2],
    #[serde(default = "default_scan_points")]
    pub points: usize,
}

fn default_scan_points() -> usize {
    171
}

impl ScanSpec {
    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        for (which, u) in [("left", self.left), ("from", self.from), ("to", self.to)] {
            State::new(u[0], u[1]).map_err(|source| ConfigError::Flux {
                context: format!("scan '{name}', {which} state"),
                source,
            })?;
        }
        if self.points < 2 {
            return Err(ConfigError::Invalid {
                context: format!("scan '{name}'"),
                reason: "points must be at least 2".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSpec {
    pub n_cells: usize,
    pub dt: f64,
    /// Overrides the problem time when set.
    pub t_end: Option<f64>,
    /// Extra recording times before the final time.
    pub output_times: Vec<f64>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            n_cells: SimConfig::DEFAULT_CELLS,
            dt: SimConfig::DEFAULT_DT,
            t_end: None,
            output_times: Vec::new(),
            newton_tol: 1e-10,
            newton_max_iter: 30,
        }
    }
}

impl SimulationSpec {
    /// Simulation settings for a Riemann problem.
    pub fn for_problem(&self, problem: &ProblemSpec) -> SimConfig {
        let mut cfg = SimConfig::riemann(problem.left_state(), problem.right_state(), self.t_end.unwrap_or(problem.t))
            .with_grid(self.n_cells, self.dt);
        cfg.newton_tol = self.newton_tol;
        cfg.newton_max_iter = self.newton_max_iter;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from(".") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: BTreeMap<String, FoamParams>,
    pub problems: BTreeMap<String, ProblemSpec>,
    pub scans: BTreeMap<String, ScanSpec>,
    pub simulation: SimulationSpec,
    pub tolerances: Tolerances,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut params = BTreeMap::new();
        params.insert(DEFAULT_PARAMS.to_string(), FoamParams::table1());
        let mut problems = BTreeMap::new();
        let problem = |left, right, t| ProblemSpec {
            params: default_params_name(),
            left,
            right,
            t,
            x_min: 0.0,
            x_max: 1.0,
            samples: default_samples(),
        };
        problems.insert("drainage".into(), problem([0.1, 0.05], [0.99, 0.5], 0.5));
        problems.insert("imbibition".into(), problem([0.99, 0.5], [0.01, 0.0], 0.3));
        let mut scans = BTreeMap::new();
        scans.insert(
            "contact-shock".into(),
            ScanSpec {
                params: default_params_name(),
                left: [0.15, 0.4],
                from: [0.355, 0.7273],
                to: [0.372, 0.7273],
                points: default_scan_points(),
            },
        );
        RunConfig {
            params,
            problems,
            scans,
            simulation: SimulationSpec::default(),
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
        }
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &'static str, name: &str) -> Result<&'a T, ConfigError> {
    map.get(name).ok_or_else(|| ConfigError::Unknown {
        kind,
        name: name.to_string(),
        known: map.keys().cloned().collect::<Vec<_>>().join(", "),
    })
}

impl RunConfig {
    /// Parses a configuration file and merges it over the built-in entries.
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let file: RunConfig = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source: Box::new(source),
        })?;
        let mut cfg = RunConfig::default();
        cfg.params.extend(file.params);
        cfg.problems.extend(file.problems);
        cfg.scans.extend(file.scans);
        cfg.simulation = file.simulation;
        cfg.tolerances = file.tolerances;
        cfg.output = file.output;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn params(&self, name: &str) -> Result<&FoamParams, ConfigError> {
        lookup(&self.params, "parameter set", name)
    }

    pub fn problem(&self, name: &str) -> Result<&ProblemSpec, ConfigError> {
        lookup(&self.problems, "problem", name)
    }

    pub fn scan(&self, name: &str) -> Result<&ScanSpec, ConfigError> {
        lookup(&self.scans, "scan", name)
    }

    /// Checks every entry and that every referenced parameter set exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, p) in &self.params {
            p.validate().map_err(|source| ConfigError::Flux {
                context: format!("parameter set '{name}'"),
                source,
            })?;
        }
        for (name, problem) in &self.problems {
            problem.validate(name)?;
            self.params(&problem.params)?;
        }
        for (name, scan) in &self.scans {
            scan.validate(name)?;
            self.params(&scan.params)?;
        }
        let t = self.tolerances;
        for (field, v) in [("transition", t.transition), ("boundary", t.boundary), ("compatibility", t.compatibility)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid {
                    context: format!("tolerances.{field}"),
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        let probe = SimConfig::riemann(State::new_unchecked(0.5, 0.5), State::new_unchecked(0.5, 0.5), 1.0)
            .with_grid(self.simulation.n_cells, self.simulation.dt);
        let mut probe = probe;
        probe.t_end = self.simulation.t_end.unwrap_or(1.0);
        probe.newton_tol = self.simulation.newton_tol;
        probe.newton_max_iter = self.simulation.newton_max_iter;
        probe.validate().map_err(|source| ConfigError::Simulation {
            context: "simulation".into(),
            source,
        })
    }
}

//! Experiment configuration: one JSON document, unknown keys rejected.

use std::path::Path;

use fbsde_core::{CoefficientModel, ModelSpec, ProblemPoint, DEFAULT_EPS_SIGMA, DEFAULT_ODE_STEPS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const EXPERIMENTS: [&str; 7] = [
    "blowup-rate",
    "weight-crossval",
    "tau-locate",
    "lambda-moment",
    "girsanov-equiv",
    "pde-vs-mc",
    "z-path",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Euler steps over `[t0, T]`.
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_ode_steps")]
    pub n_ode_steps: usize,
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_dx")]
    pub dx: f64,
}

fn default_n_steps() -> usize {
    200
}
fn default_ode_steps() -> usize {
    DEFAULT_ODE_STEPS
}
fn default_x_min() -> f64 {
    -5.0
}
fn default_x_max() -> f64 {
    5.0
}
fn default_dx() -> f64 {
    0.01
}
fn default_eps() -> f64 {
    DEFAULT_EPS_SIGMA
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_steps: default_n_steps(),
            n_ode_steps: default_ode_steps(),
            x_min: default_x_min(),
            x_max: default_x_max(),
            dx: default_dx(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderChoice {
    /// Finite-difference solution of the model's PDE.
    Pde,
    /// Closed form (bachelier_digital, example1).
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub model: ModelSpec,
    #[serde(default)]
    pub point: Option<ProblemPoint>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps_sigma: f64,
    #[serde(default)]
    pub lambda_floor: Option<f64>,
    #[serde(default)]
    pub output_path: Option<String>,
    /// `blowup-rate` evaluation times.
    #[serde(default)]
    pub t_values: Option<Vec<f64>>,
    /// `girsanov-equiv` / `pde-vs-mc` probe points.
    #[serde(default)]
    pub probes: Option<Vec<ProblemPoint>>,
    /// `lambda-moment` path counts.
    #[serde(default)]
    pub sample_sizes: Option<Vec<usize>>,
    /// `lambda-moment` exponents.
    #[serde(default)]
    pub p_values: Option<Vec<f64>>,
    /// `z-path` source of `u_x`.
    #[serde(default)]
    pub provider: Option<ProviderChoice>,
}

fn default_n_paths() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::validation("<document>", e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn output_file(&self) -> String {
        self.output_path
            .clone()
            .unwrap_or_else(|| format!("{}.csv", self.experiment))
    }

    pub fn point_or(&self, default: ProblemPoint) -> ProblemPoint {
        self.point.unwrap_or(default)
    }

    /// Every check that does not need a simulation. Returns the built model.
    pub fn validate(&self) -> CliResult<CoefficientModel> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(CliError::validation(
                "experiment",
                format!(
                    "unknown experiment `{}`; expected one of {}",
                    self.experiment,
                    EXPERIMENTS.join(", ")
                ),
            ));
        }
        let model = self
            .model
            .build()
            .map_err(|e| CliError::validation("model", e.to_string()))?;
        if let Some(p) = self.point {
            p.validate(&model)
                .map_err(|e| CliError::validation("point", e.to_string()))?;
            if p.t0 >= model.horizon_t {
                return Err(CliError::validation(
                    "point",
                    "t0 must be below the model horizon",
                ));
            }
        }
        let g = &self.grid;
        if g.n_steps == 0 {
            return Err(CliError::validation("grid.n_steps", "must be at least 1"));
        }
        if g.n_ode_steps == 0 {
            return Err(CliError::validation(
                "grid.n_ode_steps",
                "must be at least 1",
            ));
        }
        if !(g.x_min < g.x_max) || !g.x_min.is_finite() || !g.x_max.is_finite() {
            return Err(CliError::validation(
                "grid.x_max",
                "must be finite and exceed grid.x_min",
            ));
        }
        if !(g.dx > 0.0) || g.dx >= g.x_max - g.x_min {
            return Err(CliError::validation(
                "grid.dx",
                "must be positive and below x_max − x_min",
            ));
        }
        if self.n_paths < 2 {
            return Err(CliError::validation("n_paths", "must be at least 2"));
        }
        if !(self.eps_sigma > 0.0) {
            return Err(CliError::validation("eps_sigma", "must be positive"));
        }
        if let Some(f) = self.lambda_floor {
            if !(f >= 0.0) {
                return Err(CliError::validation("lambda_floor", "must be non-negative"));
            }
        }
        if let Some(ts) = &self.t_values {
            if ts.len() < 2 || ts.iter().any(|t| !(*t >= 0.0 && *t < 1.0)) {
                return Err(CliError::validation(
                    "t_values",
                    "need at least two times in [0, 1)",
                ));
            }
        }
        if let Some(ps) = &self.probes {
            if ps.is_empty() {
                return Err(CliError::validation("probes", "must not be empty"));
            }
            for p in ps {
                p.validate(&model)
                    .map_err(|e| CliError::validation("probes", e.to_string()))?;
                if p.t0 >= model.horizon_t {
                    return Err(CliError::validation(
                        "probes",
                        "every t0 must be below the model horizon",
                    ));
                }
            }
        }
        if let Some(ns) = &self.sample_sizes {
            if ns.is_empty() || ns.iter().any(|&n| n < 2) {
                return Err(CliError::validation(
                    "sample_sizes",
                    "need at least one size ≥ 2",
                ));
            }
        }
        if let Some(ps) = &self.p_values {
            if ps.is_empty() || ps.iter().any(|p| !(*p > 0.0)) {
                return Err(CliError::validation("p_values", "need positive exponents"));
            }
        }
        let out = self.output_file();
        if out.is_empty() || out.ends_with('/') {
            return Err(CliError::validation("output_path", "must name a file"));
        }
        match self.experiment.as_str() {
            "blowup-rate" if self.model.name != "example1" => Err(CliError::validation(
                "model",
                "blowup-rate needs the example1 model",
            )),
            "weight-crossval" if !model.has_g_prime() => Err(CliError::validation(
                "model",
                "weight-crossval needs a model with a payoff derivative (e.g. tanh_smooth)",
            )),
            "girsanov-equiv" if !model.has_z_coefficient() => Err(CliError::validation(
                "model",
                "girsanov-equiv needs girsanov_const",
            )),
            "z-path"
                if self.provider == Some(ProviderChoice::Oracle)
                    && !matches!(
                        self.model.name.as_str(),
                        "bachelier_digital" | "example1" | "indicator_zero_vol"
                    ) =>
            {
                Err(CliError::validation(
                    "provider",
                    "no closed form for this model; use \"pde\"",
                ))
            }
            _ => Ok(model),
        }
    }
}

//! One function per experiment; each is a pure function of the config.

mod blowup;
mod crossval;
mod girsanov;
mod lambda;
mod pde_mc;
mod tau;
mod zpath;

use fbsde_core::{CoefficientModel, McOptions, PdeGrid, PdeSolution, ProblemPoint, TimeGrid};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::ExperimentOutput;

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let model = cfg.validate()?;
    match cfg.experiment.as_str() {
        "blowup-rate" => blowup::run(cfg, &model),
        "weight-crossval" => crossval::run(cfg, &model),
        "tau-locate" => tau::run(cfg, &model),
        "lambda-moment" => lambda::run(cfg, &model),
        "girsanov-equiv" => girsanov::run(cfg, &model),
        "pde-vs-mc" => pde_mc::run(cfg, &model),
        "z-path" => zpath::run(cfg, &model),
        other => Err(CliError::validation(
            "experiment",
            format!("unknown experiment `{other}`"),
        )),
    }
}

pub(crate) fn time_grid(
    model: &CoefficientModel,
    point: &ProblemPoint,
    cfg: &ExperimentConfig,
) -> CliResult<TimeGrid> {
    Ok(TimeGrid::for_model(model, point, cfg.grid.n_steps)?)
}

pub(crate) fn mc_options(cfg: &ExperimentConfig) -> McOptions {
    McOptions {
        eps_sigma: cfg.eps_sigma,
        lambda_floor: cfg.lambda_floor,
        n_ode_steps: cfg.grid.n_ode_steps,
        ..McOptions::default()
    }
}

pub(crate) fn param(cfg: &ExperimentConfig, key: &str, default: f64) -> f64 {
    cfg.model.params.get(key).copied().unwrap_or(default)
}

/// Solutions at `dx` and `2·dx`; their gap is used as the FD error estimate.
pub(crate) struct FdPair {
    pub fine: PdeSolution,
    pub coarse: PdeSolution,
}

impl FdPair {
    pub fn solve(model: &CoefficientModel, cfg: &ExperimentConfig, t_min: f64) -> CliResult<Self> {
        let g = &cfg.grid;
        let fine = PdeGrid::auto(model, g.x_min, g.x_max, g.dx, t_min)?;
        let coarse = PdeGrid::auto(model, g.x_min, g.x_max, 2.0 * g.dx, t_min)?;
        Ok(FdPair {
            fine: fbsde_core::solve_fd(model, &fine)?,
            coarse: fbsde_core::solve_fd(model, &coarse)?,
        })
    }

    pub fn u(&self, t: f64, x: f64) -> (f64, f64) {
        let f = self.fine.u(t, x);
        (f, (f - self.coarse.u(t, x)).abs())
    }

    pub fn ux(&self, t: f64, x: f64) -> (f64, f64) {
        let f = self.fine.ux(t, x);
        (f, (f - self.coarse.ux(t, x)).abs())
    }
}

use fbsde_core::oracles::{bachelier_digital, example1_u, Example1Params, DEFAULT_N_QUAD};
use fbsde_core::{
    estimators::reconstruct_z_with, simulate_path, CoefficientModel, Gamma0Classifier, PdeGrid,
    ProblemPoint, ValueProvider,
};
use rayon::prelude::*;

use super::{param, time_grid};
use crate::config::{ExperimentConfig, ProviderChoice};
use crate::error::{CliError, CliResult};
use crate::output::{real, Check, Csv, ExperimentOutput};

fn oracle_provider(cfg: &ExperimentConfig, model: &CoefficientModel) -> CliResult<ValueProvider> {
    let horizon = model.horizon_t;
    match cfg.model.name.as_str() {
        "bachelier_digital" => {
            let (s, k) = (param(cfg, "sigma_bar", 1.0), param(cfg, "strike", 0.0));
            Ok(ValueProvider::with_derivative(
                move |t, x| match bachelier_digital(t, x, s, k, horizon) {
                    Ok((u, _)) => u,
                    Err(_) => f64::from(u8::from(x > k)),
                },
                move |t, x| bachelier_digital(t, x, s, k, horizon).map_or(0.0, |v| v.1),
            ))
        }
        "example1" => {
            let p =
                Example1Params::new(param(cfg, "alpha", f64::NAN), param(cfg, "beta", f64::NAN))?;
            Ok(ValueProvider::with_derivative(
                move |t, x| {
                    example1_u(t.clamp(0.0, 2.0), x, &p, DEFAULT_N_QUAD).unwrap_or(f64::NAN)
                },
                move |t, x| {
                    let h = 1e-4 * p.sigma0(t).max(x.abs()).max(1e-8);
                    let up = example1_u(t.clamp(0.0, 2.0), x + h, &p, DEFAULT_N_QUAD)
                        .unwrap_or(f64::NAN);
                    let dn = example1_u(t.clamp(0.0, 2.0), x - h, &p, DEFAULT_N_QUAD)
                        .unwrap_or(f64::NAN);
                    (up - dn) / (2.0 * h)
                },
            ))
        }
        "indicator_zero_vol" => Ok(ValueProvider::with_derivative(
            |_, x| f64::from(u8::from(x > 0.0)),
            |_, _| 0.0,
        )),
        other => Err(CliError::validation(
            "provider",
            format!("no closed form for `{other}`"),
        )),
    }
}

pub fn run(cfg: &ExperimentConfig, model: &CoefficientModel) -> CliResult<ExperimentOutput> {
    let point = cfg.point_or(ProblemPoint::new(0.0, 0.0));
    let grid = time_grid(model, &point, cfg)?;
    let provider = match cfg.provider.unwrap_or(ProviderChoice::Pde) {
        ProviderChoice::Oracle => oracle_provider(cfg, model)?,
        ProviderChoice::Pde => {
            let g = &cfg.grid;
            let pg = PdeGrid::auto(model, g.x_min, g.x_max, g.dx, point.t0)?;
            fbsde_core::solve_fd(model, &pg)?.provider()
        }
    };
    let classifier = Gamma0Classifier::new(model, cfg.grid.n_ode_steps, cfg.eps_sigma)?;
    let paths: Vec<_> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = simulate_path(model, &point, grid, cfg.seed, i);
            let z = reconstruct_z_with(model, &path, &provider, &classifier);
            (path.x, z)
        })
        .collect();
    let mut csv = Csv::new("path_id,t,X,Z,tau");
    let mut nonzero_after_tau = 0usize;
    for (i, (xs, z)) in paths.iter().enumerate() {
        for (k, &(t, zk)) in z.values.iter().enumerate() {
            if t >= z.tau && zk != 0.0 {
                nonzero_after_tau += 1;
            }
            csv.row(&[i.to_string(), real(t), real(xs[k]), real(zk), real(z.tau)]);
        }
    }
    let mut out = ExperimentOutput::new(csv);
    out.checks.push(Check::new(
        "nodes with Z ≠ 0 at or after tau",
        nonzero_after_tau as f64,
        "= 0",
        nonzero_after_tau == 0,
    ));
    Ok(out)
}

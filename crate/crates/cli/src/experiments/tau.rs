use std::collections::BTreeMap;

use fbsde_core::{simulate_path, CoefficientModel, Gamma0Classifier, ProblemPoint};
use rayon::prelude::*;

use super::{param, time_grid};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{real, Check, Csv, ExperimentOutput};

pub fn run(cfg: &ExperimentConfig, model: &CoefficientModel) -> CliResult<ExperimentOutput> {
    let point = cfg.point_or(ProblemPoint::new(0.0, 0.0));
    let grid = time_grid(model, &point, cfg)?;
    let classifier = Gamma0Classifier::new(model, cfg.grid.n_ode_steps, cfg.eps_sigma)?;
    let taus: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| classifier.locate_tau(&simulate_path(model, &point, grid, cfg.seed, i)))
        .collect();

    let mut csv = Csv::new("path_id,tau");
    for (i, tau) in taus.iter().enumerate() {
        csv.row(&[i.to_string(), real(*tau)]);
    }
    let dt = grid.dt();
    let mut bins: BTreeMap<usize, usize> = BTreeMap::new();
    for &tau in &taus {
        let k =
            (((tau - grid.t0) / dt).floor().max(0.0) as usize).min(grid.n_steps.saturating_sub(1));
        *bins.entry(k).or_default() += 1;
    }
    let mut hist = Csv::new("bin_lo,bin_hi,count");
    for (k, count) in &bins {
        hist.row(&[
            real(grid.time(*k)),
            real(grid.time(k + 1)),
            count.to_string(),
        ]);
    }

    // one grid step, with room for the rounding in t_k = t0 + k·dt
    let step = dt * (1.0 + 1e-9);
    let expected = match cfg.model.name.as_str() {
        "example1" => Some((1.0, step)),
        "step_vol" => Some((param(cfg, "t_cut", 0.5 * model.horizon_t), step)),
        "indicator_zero_vol" => Some((point.t0, 0.0)),
        _ => None,
    };
    let mut out = ExperimentOutput::new(csv);
    out.extra.push(("hist".into(), hist));
    if let Some((target, tol)) = expected {
        let worst = taus.iter().map(|t| (t - target).abs()).fold(0.0, f64::max);
        out.checks.push(Check::new(
            "max |tau − expected onset|",
            worst,
            format!("≤ {tol} around {target}"),
            worst <= tol,
        ));
    }
    Ok(out)
}

use fbsde_core::{empirical_lambda_moment, CoefficientModel, ProblemPoint};

use super::{mc_options, time_grid};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{real, Check, Csv, ExperimentOutput};

pub const STABILITY_REL_TOL: f64 = 0.05;

pub fn run(cfg: &ExperimentConfig, model: &CoefficientModel) -> CliResult<ExperimentOutput> {
    let point = cfg.point_or(ProblemPoint::new(0.0, 0.0));
    let grid = time_grid(model, &point, cfg)?;
    let opts = mc_options(cfg);
    let ps = cfg.p_values.clone().unwrap_or_else(|| vec![1.0, 2.0]);
    let sizes = cfg
        .sample_sizes
        .clone()
        .unwrap_or_else(|| vec![10_000, 100_000]);
    let mut csv = Csv::new("p,n_paths,mean,stderr,n_used,n_floored");
    let mut checks = Vec::new();
    for &p in &ps {
        let mut prev: Option<(usize, f64)> = None;
        for &n in &sizes {
            let e = empirical_lambda_moment(model, &point, grid, cfg.seed, n, p, &opts)?;
            csv.row(&[
                real(p),
                n.to_string(),
                real(e.mean),
                real(e.stderr),
                e.n_used.to_string(),
                e.n_floored.to_string(),
            ]);
            if let Some((n0, m0)) = prev {
                let rel = (e.mean - m0).abs() / e.mean.abs();
                checks.push(Check::new(
                    format!("p={p}: relative change {n0} → {n} paths"),
                    rel,
                    format!("≤ {STABILITY_REL_TOL}"),
                    rel <= STABILITY_REL_TOL,
                ));
            }
            prev = Some((n, e.mean));
        }
    }
    let mut out = ExperimentOutput::new(csv);
    out.checks = checks;
    Ok(out)
}

use fbsde_core::estimators::derive_seed;
use fbsde_core::oracles::{
    example1_ux_at_zero, example1_ux_exponent, example1_z_exponent, Example1Params,
};
use fbsde_core::stats::log_log_slope;
use fbsde_core::{estimate_ux_weighted, CoefficientModel, ProblemPoint, WeightKind};

use super::{mc_options, param, time_grid};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{real, Check, Csv, ExperimentOutput};

pub const SLOPE_TOL: f64 = 0.05;
pub const LEVEL_REL_TOL: f64 = 0.02;

pub fn default_times() -> Vec<f64> {
    (0..8).map(|i| 0.5 + 0.45 * i as f64 / 7.0).collect()
}

pub fn run(cfg: &ExperimentConfig, model: &CoefficientModel) -> CliResult<ExperimentOutput> {
    let params = Example1Params::new(param(cfg, "alpha", f64::NAN), param(cfg, "beta", f64::NAN))?;
    let ts = cfg.t_values.clone().unwrap_or_else(default_times);
    let opts = mc_options(cfg);
    let mut csv = Csv::new("t,ux_mc,ux_stderr,ux_oracle");
    let mut checks = Vec::new();
    let (mut lags, mut ux, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &t) in ts.iter().enumerate() {
        let point = ProblemPoint::new(t, 0.0);
        let grid = time_grid(model, &point, cfg)?;
        let seed = derive_seed(cfg.seed, i as u64, 0);
        let e = estimate_ux_weighted(
            model,
            &point,
            grid,
            seed,
            cfg.n_paths,
            None,
            WeightKind::Degenerate,
            &opts,
        )?;
        let oracle = example1_ux_at_zero(t, &params)?;
        csv.row(&[real(t), real(e.mean), real(e.stderr), real(oracle)]);
        checks.push(Check::new(
            format!("ux(t={t}) vs closed form"),
            e.mean,
            format!("{oracle} ± (3·{:.3e} + {LEVEL_REL_TOL}·|oracle|)", e.stderr),
            (e.mean - oracle).abs() <= 3.0 * e.stderr + LEVEL_REL_TOL * oracle.abs(),
        ));
        lags.push(1.0 - t);
        ux.push(e.mean);
        z.push(e.mean * model.sigma(t, 0.0));
    }
    let slope = log_log_slope(&lags, &ux);
    let z_slope = log_log_slope(&lags, &z);
    let target = example1_ux_exponent(&params);
    let z_target = example1_z_exponent(&params);
    csv.row(&[
        "slope".to_string(),
        real(slope),
        String::new(),
        real(target),
    ]);
    csv.row(&[
        "z_slope".to_string(),
        real(z_slope),
        String::new(),
        real(z_target),
    ]);
    checks.push(Check::within("ux log-log slope", slope, target, SLOPE_TOL));
    checks.push(Check::within(
        "Z log-log slope",
        z_slope,
        z_target,
        SLOPE_TOL,
    ));
    let mut out = ExperimentOutput::new(csv);
    out.checks = checks;
    Ok(out)
}

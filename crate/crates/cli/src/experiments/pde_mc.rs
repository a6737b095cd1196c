use fbsde_core::estimators::derive_seed;
use fbsde_core::{
    estimate_u, estimate_ux_weighted, gamma_report, CoefficientModel, ProblemPoint, WeightKind,
};

use super::{mc_options, time_grid, FdPair};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{real, Check, Csv, ExperimentOutput};

pub fn default_probes(horizon: f64) -> Vec<ProblemPoint> {
    let mut v = Vec::new();
    for t in [0.0, 0.25 * horizon, 0.5 * horizon] {
        for x in [-0.5, 0.0, 0.5] {
            v.push(ProblemPoint::new(t, x));
        }
    }
    v
}

pub fn run(cfg: &ExperimentConfig, model: &CoefficientModel) -> CliResult<ExperimentOutput> {
    let probes = cfg
        .probes
        .clone()
        .unwrap_or_else(|| default_probes(model.horizon_t));
    let t_min = probes.iter().map(|p| p.t0).fold(f64::INFINITY, f64::min);
    let fd = FdPair::solve(model, cfg, t_min)?;
    let opts = mc_options(cfg);
    let mut csv = Csv::new("t,x,u_fd,u_mc,u_stderr,ux_fd,ux_mc,ux_stderr,fd_tol_u,fd_tol_ux");
    let mut checks = Vec::new();
    for (i, p) in probes.iter().enumerate() {
        let grid = time_grid(model, p, cfg)?;
        let seed = derive_seed(cfg.seed, i as u64, 0);
        let eu = estimate_u(model, p, grid, seed, cfg.n_paths, None)?;
        let (u_fd, tol_u) = fd.u(p.t0, p.x0);
        let (ux_fd, tol_ux) = fd.ux(p.t0, p.x0);
        checks.push(Check::new(
            format!("u({}, {}) MC vs FD", p.t0, p.x0),
            eu.mean - u_fd,
            format!("|Δ| ≤ 3·{:.3e} + 2·{:.3e}", eu.stderr, tol_u),
            (eu.mean - u_fd).abs() <= 3.0 * eu.stderr + 2.0 * tol_u,
        ));
        let inside = gamma_report(model, p, opts.n_ode_steps, opts.eps_sigma)?.in_gamma0;
        let (ux_mc, ux_se) = if inside {
            let e = estimate_ux_weighted(
                model,
                p,
                grid,
                seed,
                cfg.n_paths,
                None,
                WeightKind::Degenerate,
                &opts,
            )?;
            checks.push(Check::new(
                format!("u_x({}, {}) MC vs FD", p.t0, p.x0),
                e.mean - ux_fd,
                format!("|Δ| ≤ 3·{:.3e} + 2·{:.3e}", e.stderr, tol_ux),
                (e.mean - ux_fd).abs() <= 3.0 * e.stderr + 2.0 * tol_ux,
            ));
            (real(e.mean), real(e.stderr))
        } else {
            (String::new(), String::new())
        };
        csv.row(&[
            real(p.t0),
            real(p.x0),
            real(u_fd),
            real(eu.mean),
            real(eu.stderr),
            real(ux_fd),
            ux_mc,
            ux_se,
            real(tol_u),
            real(tol_ux),
        ]);
    }
    let mut out = ExperimentOutput::new(csv);
    out.checks = checks;
    Ok(out)
}

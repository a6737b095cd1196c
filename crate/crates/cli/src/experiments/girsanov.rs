use fbsde_core::estimators::derive_seed;
use fbsde_core::{
    check_gamma_equivalence, estimate_u, sample_grid, CoefficientModel, ProblemPoint,
};

use super::{time_grid, FdPair};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{real, Check, Csv, ExperimentOutput};

pub const GAMMA_GRID: usize = 20;

pub fn default_probes() -> Vec<ProblemPoint> {
    [
        (0.0, -0.5),
        (0.0, 0.0),
        (0.0, 0.5),
        (0.25, -0.3),
        (0.25, 0.2),
    ]
    .iter()
    .map(|&(t, x)| ProblemPoint::new(t, x))
    .collect()
}

pub fn run(cfg: &ExperimentConfig, model: &CoefficientModel) -> CliResult<ExperimentOutput> {
    let probes = cfg.probes.clone().unwrap_or_else(default_probes);
    let t_min = probes.iter().map(|p| p.t0).fold(f64::INFINITY, f64::min);
    let fd = FdPair::solve(model, cfg, t_min)?;
    let mut csv = Csv::new("t,x,u_mc,u_stderr,u_fd,fd_tol");
    let mut checks = Vec::new();
    for (i, p) in probes.iter().enumerate() {
        let grid = time_grid(model, p, cfg)?;
        let e = estimate_u(
            model,
            p,
            grid,
            derive_seed(cfg.seed, i as u64, 0),
            cfg.n_paths,
            None,
        )?;
        let (u_fd, tol) = fd.u(p.t0, p.x0);
        csv.row(&[
            real(p.t0),
            real(p.x0),
            real(e.mean),
            real(e.stderr),
            real(u_fd),
            real(tol),
        ]);
        checks.push(Check::new(
            format!("u({}, {}) MC vs FD", p.t0, p.x0),
            e.mean - u_fd,
            format!("|Δ| ≤ 3·{:.3e} + {:.3e}", e.stderr, tol),
            (e.mean - u_fd).abs() <= 3.0 * e.stderr + tol,
        ));
    }
    let pts = sample_grid(
        model,
        GAMMA_GRID,
        GAMMA_GRID,
        cfg.grid.x_min,
        cfg.grid.x_max,
    );
    let report = check_gamma_equivalence(model, &pts, cfg.grid.n_ode_steps, cfg.eps_sigma)?;
    let mut gamma = Csv::new("n_points,agreement_fraction,max_n_ratio,envelope");
    gamma.row(&[
        report.n_points.to_string(),
        real(report.agreement_fraction),
        real(report.max_n_ratio),
        real(report.envelope),
    ]);
    checks.push(Check::new(
        "Γ⁰ agreement fraction",
        report.agreement_fraction,
        "= 1",
        report.agreement_fraction == 1.0,
    ));
    let mut out = ExperimentOutput::new(csv);
    out.extra.push(("gamma".into(), gamma));
    out.checks = checks;
    Ok(out)
}

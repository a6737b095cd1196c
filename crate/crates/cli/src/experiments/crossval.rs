use fbsde_core::{
    estimate_ux_pathwise, estimate_ux_weighted, CoefficientModel, ProblemPoint, WeightKind,
};

use super::{mc_options, param, time_grid};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{real, Check, Csv, ExperimentOutput};

pub const Z_TOL: f64 = 3.0;

fn constant_power_of_two_vol(cfg: &ExperimentConfig) -> bool {
    matches!(cfg.model.name.as_str(), "tanh_smooth" | "bachelier_digital") && {
        let l = param(cfg, "sigma_bar", 1.0).log2();
        l == l.round()
    }
}

pub fn run(cfg: &ExperimentConfig, model: &CoefficientModel) -> CliResult<ExperimentOutput> {
    let point = cfg.point_or(ProblemPoint::new(0.0, 0.0));
    let grid = time_grid(model, &point, cfg)?;
    let opts = mc_options(cfg);
    let n = cfg.n_paths;
    let pw = estimate_ux_pathwise(model, &point, grid, cfg.seed, n, None)?;
    let nd = estimate_ux_weighted(
        model,
        &point,
        grid,
        cfg.seed,
        n,
        None,
        WeightKind::Nondegenerate,
        &opts,
    )?;
    let dg = estimate_ux_weighted(
        model,
        &point,
        grid,
        cfg.seed,
        n,
        None,
        WeightKind::Degenerate,
        &opts,
    )?;
    let mut csv = Csv::new("name,value,stderr");
    for (name, e) in [
        ("pathwise", &pw),
        ("nondegenerate", &nd),
        ("degenerate", &dg),
    ] {
        csv.row(&[name.to_string(), real(e.mean), real(e.stderr)]);
    }
    let mut checks = Vec::new();
    for (name, a, b) in [
        ("z_pathwise_nondegenerate", &pw, &nd),
        ("z_pathwise_degenerate", &pw, &dg),
        ("z_nondegenerate_degenerate", &nd, &dg),
    ] {
        let z = a.z_score(b);
        csv.row(&[name.to_string(), real(z), String::new()]);
        checks.push(Check::new(
            name,
            z,
            format!("|z| ≤ {Z_TOL}"),
            z.abs() <= Z_TOL,
        ));
    }
    let identical =
        nd.mean.to_bits() == dg.mean.to_bits() && nd.stderr.to_bits() == dg.stderr.to_bits();
    csv.row(&[
        "weights_bit_identical",
        if identical { "1" } else { "0" },
        "",
    ]);
    if constant_power_of_two_vol(cfg) {
        checks.push(Check::new(
            "degenerate and nondegenerate estimates bit-identical",
            if identical { 1.0 } else { 0.0 },
            "1",
            identical,
        ));
    }
    let mut out = ExperimentOutput::new(csv);
    out.checks = checks;
    Ok(out)
}

//! Monte Carlo estimators of `u`, `u_x` and `Z`.
//!
//! Every estimator simulates under the drift-transformed model, so a driver
//! term linear in z never appears inside the expectation. `Y` inside `f₁` comes
//! from an injected [`ValueProvider`].

use std::sync::Arc;

use rayon::prelude::*;

use crate::degeneracy::{gamma_report, Gamma0Classifier, DEFAULT_EPS_SIGMA, DEFAULT_ODE_STEPS};
use crate::error::{invalid, FbsdeError, Result};
use crate::interp::GridInterpolant;
use crate::model::{transformed_drift, CoefficientModel, ProblemPoint};
use crate::sde::{check_invalid_fraction, PathBundle, PathStepper, TimeGrid};
use crate::stats::mean_and_stderr;
use crate::weights::{default_lambda_floor, weight_from_state, WeightKind};

/// Floored fraction above which an estimate is marked unreliable.
pub const MAX_FLOORED_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_used: usize,
    pub n_floored: usize,
    pub n_invalid: usize,
    pub reliable: bool,
}

impl Estimate {
    /// `(a − b)/√(se_a² + se_b²)`.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        let se = (self.stderr * self.stderr + other.stderr * other.stderr).sqrt();
        let d = self.mean - other.mean;
        if se == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(d)
            }
        } else {
            d / se
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Outcome {
    Value(f64),
    Floored,
    Invalid,
}

fn summarize(outcomes: &[Outcome]) -> Result<Estimate> {
    let values: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Value(v) => Some(*v),
            _ => None,
        })
        .collect();
    let n_floored = outcomes
        .iter()
        .filter(|o| matches!(o, Outcome::Floored))
        .count();
    let n_invalid = outcomes
        .iter()
        .filter(|o| matches!(o, Outcome::Invalid))
        .count();
    check_invalid_fraction(n_invalid, outcomes.len())?;
    if values.is_empty() {
        return Err(FbsdeError::AllPathsFloored(outcomes.len()));
    }
    let (mean, stderr) = mean_and_stderr(&values);
    let n_used = values.len();
    Ok(Estimate {
        mean,
        stderr,
        n_used,
        n_floored,
        n_invalid,
        reliable: n_floored as f64 <= MAX_FLOORED_FRACTION * (n_used + n_floored) as f64,
    })
}

fn run_paths<F>(n_paths: usize, per_path: F) -> Result<Estimate>
where
    F: Fn(u64) -> Outcome + Sync + Send,
{
    if n_paths == 0 {
        return Err(invalid("n_paths", 0.0, "must be at least 1"));
    }
    let outcomes: Vec<Outcome> = (0..n_paths as u64).into_par_iter().map(per_path).collect();
    summarize(&outcomes)
}

pub type SpaceTimeEval = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Source of `u(t, x)` and optionally `u_x(t, x)`.
#[derive(Clone)]
pub struct ValueProvider {
    u: SpaceTimeEval,
    ux: Option<SpaceTimeEval>,
}

impl std::fmt::Debug for ValueProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValueProvider")
            .field("has_ux", &self.ux.is_some())
            .finish()
    }
}

impl ValueProvider {
    pub fn new<U>(u: U) -> Self
    where
        U: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        ValueProvider {
            u: Arc::new(u),
            ux: None,
        }
    }

    pub fn with_derivative<U, D>(u: U, ux: D) -> Self
    where
        U: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        ValueProvider {
            u: Arc::new(u),
            ux: Some(Arc::new(ux)),
        }
    }

    pub fn from_interpolant(table: GridInterpolant) -> Self {
        let table = Arc::new(table);
        let t2 = table.clone();
        ValueProvider {
            u: Arc::new(move |t, x| table.u(t, x)),
            ux: Some(Arc::new(move |t, x| t2.ux(t, x))),
        }
    }

    #[inline]
    pub fn u_eval(&self, t: f64, x: f64) -> f64 {
        (self.u)(t, x)
    }

    #[inline]
    pub fn ux_eval(&self, t: f64, x: f64) -> Option<f64> {
        self.ux.as_ref().map(|d| d(t, x))
    }

    pub fn has_ux(&self) -> bool {
        self.ux.is_some()
    }
}

/// Knobs shared by the weighted estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McOptions {
    pub eps_sigma: f64,
    /// Defaults to `dt·eps_sigma²`.
    pub lambda_floor: Option<f64>,
    /// Defaults to `eps_sigma`.
    pub sigma_floor: Option<f64>,
    pub n_ode_steps: usize,
    /// Clip `|N| ≤ cap`; off by default.
    pub weight_cap: Option<f64>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            eps_sigma: DEFAULT_EPS_SIGMA,
            lambda_floor: None,
            sigma_floor: None,
            n_ode_steps: DEFAULT_ODE_STEPS,
            weight_cap: None,
        }
    }
}

impl McOptions {
    pub fn lambda_floor_for(&self, grid: &TimeGrid) -> f64 {
        self.lambda_floor
            .unwrap_or_else(|| default_lambda_floor(grid.dt(), self.eps_sigma))
    }

    pub fn sigma_floor(&self) -> f64 {
        self.sigma_floor.unwrap_or(self.eps_sigma)
    }
}

fn check_setup(model: &CoefficientModel, point: &ProblemPoint, grid: &TimeGrid) -> Result<()> {
    point.validate(model)?;
    if grid.t0 != point.t0 || grid.t_end != model.horizon_t {
        return Err(FbsdeError::InvalidInput(format!(
            "time grid [{}, {}] must run from t0 = {} to T = {}",
            grid.t0, grid.t_end, point.t0, model.horizon_t
        )));
    }
    Ok(())
}

fn require_value_provider<'p>(
    model: &CoefficientModel,
    provider: Option<&'p ValueProvider>,
) -> Result<Option<&'p ValueProvider>> {
    if model.driver_depends_on_y() && provider.is_none() {
        return Err(FbsdeError::MissingProvider("the driver depends on y"));
    }
    Ok(provider)
}

/// `u(t, x) = E[g(X_T) + ∫ f₁(r, X_r, u(r, X_r)) dr]` under the transformed drift.
pub fn estimate_u(
    model: &CoefficientModel,
    point: &ProblemPoint,
    grid: TimeGrid,
    seed: u64,
    n_paths: usize,
    provider: Option<&ValueProvider>,
) -> Result<Estimate> {
    check_setup(model, point, &grid)?;
    let provider = require_value_provider(model, provider)?;
    let tm = transformed_drift(model);
    let dt = grid.dt();
    let with_driver = tm.has_driver();
    let needs_y = tm.driver_depends_on_y();
    run_paths(n_paths, |i| {
        let mut st = PathStepper::new(&tm, point, grid, seed, i);
        let mut running = 0.0;
        while !st.is_done() {
            if with_driver {
                let s = st.state();
                let y = match provider {
                    Some(p) if needs_y => p.u_eval(s.t, s.x),
                    _ => 0.0,
                };
                running += tm.f1(s.t, s.x, y) * dt;
            }
            st.step();
        }
        if !st.is_valid() {
            return Outcome::Invalid;
        }
        let v = tm.g(st.state().x) + running;
        if v.is_finite() {
            Outcome::Value(v)
        } else {
            Outcome::Invalid
        }
    })
}

/// `u_x(t, x) = E[g′(X_T)∇X_T + ∫ (f₁_x + f₁_y u_x) ∇X_r dr]`.
pub fn estimate_ux_pathwise(
    model: &CoefficientModel,
    point: &ProblemPoint,
    grid: TimeGrid,
    seed: u64,
    n_paths: usize,
    provider: Option<&ValueProvider>,
) -> Result<Estimate> {
    check_setup(model, point, &grid)?;
    if !model.has_g_prime() {
        return Err(FbsdeError::MissingPayoffDerivative(
            model.name().to_string(),
        ));
    }
    let provider = require_value_provider(model, provider)?;
    if model.driver_depends_on_y() && !provider.is_some_and(|p| p.has_ux()) {
        return Err(FbsdeError::MissingProvider(
            "the pathwise estimator needs u_x for a y-dependent driver",
        ));
    }
    let tm = transformed_drift(model);
    let dt = grid.dt();
    let with_driver = tm.has_driver();
    let needs_y = tm.driver_depends_on_y();
    run_paths(n_paths, |i| {
        let mut st = PathStepper::new(&tm, point, grid, seed, i);
        let mut running = 0.0;
        while !st.is_done() {
            if with_driver {
                let s = st.state();
                let (y, ux) = match provider {
                    Some(p) if needs_y => (p.u_eval(s.t, s.x), p.ux_eval(s.t, s.x).unwrap_or(0.0)),
                    _ => (0.0, 0.0),
                };
                let fx = tm.f1_x(s.t, s.x, y);
                let fy = if needs_y { tm.f1_y(s.t, s.x, y) } else { 0.0 };
                running += (fx * s.grad_x + fy * ux * s.grad_x) * dt;
            }
            st.step();
        }
        if !st.is_valid() {
            return Outcome::Invalid;
        }
        let s = st.state();
        let v = tm.g_prime(s.x).unwrap_or(0.0) * s.grad_x + running;
        if v.is_finite() {
            Outcome::Value(v)
        } else {
            Outcome::Invalid
        }
    })
}

#[inline]
fn capped(w: f64, cap: Option<f64>) -> f64 {
    match cap {
        Some(c) => w.clamp(-c, c),
        None => w,
    }
}

/// `u_x(t, x) = E[g(X_T) N_T + ∫ f₁(r, X_r, Y_r) N_r dr]` with the chosen weight.
///
/// Refuses points outside Γ⁰, where the representation does not apply.
#[allow(clippy::too_many_arguments)]
pub fn estimate_ux_weighted(
    model: &CoefficientModel,
    point: &ProblemPoint,
    grid: TimeGrid,
    seed: u64,
    n_paths: usize,
    provider: Option<&ValueProvider>,
    kind: WeightKind,
    opts: &McOptions,
) -> Result<Estimate> {
    check_setup(model, point, &grid)?;
    let report = gamma_report(model, point, opts.n_ode_steps, opts.eps_sigma)?;
    if !report.in_gamma0 {
        return Err(FbsdeError::OutsideGamma0 {
            t: point.t0,
            x: point.x0,
        });
    }
    let provider = require_value_provider(model, provider)?;
    let tm = transformed_drift(model);
    let dt = grid.dt();
    let lambda_floor = opts.lambda_floor_for(&grid);
    let sigma_floor = opts.sigma_floor();
    let with_driver = tm.has_driver();
    let needs_y = tm.driver_depends_on_y();
    run_paths(n_paths, |i| {
        let mut st = PathStepper::new(&tm, point, grid, seed, i);
        let mut running = 0.0;
        while !st.is_done() {
            let s = st.state();
            // N_{t0} is undefined, so the driver sum starts at k = 1
            if with_driver && s.k >= 1 {
                if let Some(w) = weight_from_state(kind, s, lambda_floor, sigma_floor) {
                    let y = match provider {
                        Some(p) if needs_y => p.u_eval(s.t, s.x),
                        _ => 0.0,
                    };
                    running += tm.f1(s.t, s.x, y) * capped(w, opts.weight_cap) * dt;
                }
            }
            st.step();
        }
        if !st.is_valid() {
            return Outcome::Invalid;
        }
        let s = st.state();
        match weight_from_state(kind, s, lambda_floor, sigma_floor) {
            None => Outcome::Floored,
            Some(w) => {
                let v = tm.g(s.x) * capped(w, opts.weight_cap) + running;
                if v.is_finite() {
                    Outcome::Value(v)
                } else {
                    Outcome::Invalid
                }
            }
        }
    })
}

/// `Z` along one path: `u_x σ` before τ, zero from τ on.
#[derive(Clone, Debug, PartialEq)]
pub struct ZPath {
    pub tau: f64,
    pub tau_index: Option<usize>,
    /// `(t_k, Z_k)` for every grid node.
    pub values: Vec<(f64, f64)>,
}

pub fn reconstruct_z(
    model: &CoefficientModel,
    path: &PathBundle,
    provider: &ValueProvider,
    n_ode_steps: usize,
    eps_sigma: f64,
) -> Result<ZPath> {
    if !provider.has_ux() {
        return Err(FbsdeError::MissingProvider("reconstructing Z needs u_x"));
    }
    let classifier = Gamma0Classifier::new(model, n_ode_steps, eps_sigma)?;
    Ok(reconstruct_z_with(model, path, provider, &classifier))
}

/// As [`reconstruct_z`] with a shared classifier (and its cache).
pub fn reconstruct_z_with(
    model: &CoefficientModel,
    path: &PathBundle,
    provider: &ValueProvider,
    classifier: &Gamma0Classifier<'_>,
) -> ZPath {
    let tau_index = classifier.tau_index(path);
    let cut = tau_index.unwrap_or(path.len());
    let values = (0..path.len())
        .map(|k| {
            let t = path.grid.time(k);
            let z = if k < cut {
                let x = path.x[k];
                provider.ux_eval(t, x).unwrap_or(0.0) * model.sigma(t, x)
            } else {
                0.0
            };
            (t, z)
        })
        .collect();
    ZPath {
        tau: tau_index.map_or(path.grid.t_end, |k| path.grid.time(k)),
        tau_index,
        values,
    }
}

/// Mean of `Λ_T^{−p}` over paths started in Γ⁰.
pub fn empirical_lambda_moment(
    model: &CoefficientModel,
    point: &ProblemPoint,
    grid: TimeGrid,
    seed: u64,
    n_paths: usize,
    p: f64,
    opts: &McOptions,
) -> Result<Estimate> {
    check_setup(model, point, &grid)?;
    if !(p > 0.0) {
        return Err(invalid("p", p, "must be positive"));
    }
    if !gamma_report(model, point, opts.n_ode_steps, opts.eps_sigma)?.in_gamma0 {
        return Err(FbsdeError::OutsideGamma0 {
            t: point.t0,
            x: point.x0,
        });
    }
    let tm = transformed_drift(model);
    let floor = opts.lambda_floor_for(&grid);
    run_paths(n_paths, |i| {
        let (s, valid) = PathStepper::new(&tm, point, grid, seed, i).finish();
        if !valid {
            Outcome::Invalid
        } else if !(s.lambda >= floor) || s.lambda <= 0.0 {
            Outcome::Floored
        } else {
            Outcome::Value(s.lambda.powf(-p))
        }
    })
}

/// SplitMix64 finalizer applied to a seed and two coordinates.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct PicardResult {
    pub provider: ValueProvider,
    pub table: GridInterpolant,
    pub iterations: usize,
    pub max_change: f64,
    /// Ratio of the last two sup-norm changes; `NaN` with fewer than two iterations.
    pub contraction_ratio: f64,
    pub converged: bool,
}

/// Fixed-point iteration `u⁽ᵏ⁺¹⁾ = estimate_u(·, provider = u⁽ᵏ⁾)` on a space–time grid.
///
/// Node `(tᵢ, xⱼ)` is estimated on the sub-grid `[tᵢ, T]` with the remaining
/// steps, using common random numbers across iterations.
pub fn picard_value_iteration(
    model: &CoefficientModel,
    space_grid: &[f64],
    time_grid: TimeGrid,
    seed: u64,
    n_paths: usize,
    k_max: usize,
    tol: f64,
) -> Result<PicardResult> {
    if k_max == 0 {
        return Err(invalid("k_max", 0.0, "must be at least 1"));
    }
    if time_grid.t_end != model.horizon_t {
        return Err(FbsdeError::InvalidInput(
            "time grid must end at the model horizon".into(),
        ));
    }
    let tm = transformed_drift(model);
    let times = time_grid.times();
    let n = time_grid.n_steps;
    let xs = space_grid.to_vec();
    let terminal: Vec<f64> = xs.iter().map(|&x| tm.g(x)).collect();
    let mut values: Vec<Vec<f64>> = vec![vec![0.0; xs.len()]; n + 1];
    values[n] = terminal;
    let mut table = GridInterpolant::new(times.clone(), xs.clone(), values.clone())?;
    let mut changes: Vec<f64> = Vec::new();
    let mut converged = false;
    let coupled = tm.driver_depends_on_y();

    for _ in 0..k_max {
        let provider = ValueProvider::from_interpolant(table.clone());
        let nodes: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..xs.len()).map(move |j| (i, j)))
            .collect();
        let fresh: Vec<Result<f64>> = nodes
            .par_iter()
            .map(|&(i, j)| {
                let p = ProblemPoint::new(times[i], xs[j]);
                let sub = TimeGrid::new(times[i], time_grid.t_end, n - i)?;
                let node_seed = derive_seed(seed, i as u64, j as u64);
                estimate_u(&tm, &p, sub, node_seed, n_paths, Some(&provider)).map(|e| e.mean)
            })
            .collect();
        let mut next = values.clone();
        let mut change: f64 = 0.0;
        for (&(i, j), v) in nodes.iter().zip(fresh) {
            let v = v?;
            change = change.max((v - values[i][j]).abs());
            next[i][j] = v;
        }
        values = next;
        table = GridInterpolant::new(times.clone(), xs.clone(), values.clone())?;
        changes.push(change);
        if !coupled || change < tol {
            converged = true;
            break;
        }
    }
    let contraction_ratio = match changes.len() {
        0 | 1 => f64::NAN,
        k => changes[k - 1] / changes[k - 2],
    };
    Ok(PicardResult {
        provider: ValueProvider::from_interpolant(table.clone()),
        table,
        iterations: changes.len(),
        max_change: *changes.last().unwrap_or(&0.0),
        contraction_ratio,
        converged,
    })
}

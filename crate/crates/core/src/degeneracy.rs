//! Degeneracy analysis along the deterministic characteristic `dη/ds = b(s, η)`.
//!
//! A point `(t, x)` is alive (in Γ⁰) when σ is nonzero somewhere on the
//! characteristic started there. Exact positivity is replaced by the threshold
//! `eps_sigma`; τ is the first grid time a simulated path leaves Γ⁰.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{invalid, Result};
use crate::model::{transformed_drift, CoefficientModel, ProblemPoint};
use crate::sde::{PathBundle, TimeGrid};

pub const DEFAULT_EPS_SIGMA: f64 = 1e-8;
pub const DEFAULT_ODE_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicPath {
    /// Nodes `t = s_0 < … < s_n = T`; a single node when `t = T`.
    pub times: Vec<f64>,
    pub eta: Vec<f64>,
}

#[inline]
fn rk4_step(model: &CoefficientModel, s: f64, eta: f64, h: f64) -> f64 {
    let k1 = model.b(s, eta);
    let k2 = model.b(s + 0.5 * h, eta + 0.5 * h * k1);
    let k3 = model.b(s + 0.5 * h, eta + 0.5 * h * k2);
    let k4 = model.b(s + h, eta + h * k3);
    eta + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Classical fixed-step RK4 solution of the characteristic from `point` to `T`.
pub fn characteristic(
    model: &CoefficientModel,
    point: &ProblemPoint,
    n_ode_steps: usize,
) -> Result<CharacteristicPath> {
    if n_ode_steps == 0 {
        return Err(invalid("n_ode_steps", 0.0, "must be at least 1"));
    }
    point.validate(model)?;
    if point.t0 >= model.horizon_t {
        return Ok(CharacteristicPath {
            times: vec![point.t0],
            eta: vec![point.x0],
        });
    }
    let grid = TimeGrid::new(point.t0, model.horizon_t, n_ode_steps)?;
    let h = grid.dt();
    let mut eta = Vec::with_capacity(n_ode_steps + 1);
    eta.push(point.x0);
    let mut e = point.x0;
    for k in 0..n_ode_steps {
        e = rk4_step(model, grid.time(k), e, h);
        if !e.is_finite() {
            return Err(crate::FbsdeError::InvalidInput(format!(
                "characteristic from ({}, {}) became non-finite",
                point.t0, point.x0
            )));
        }
        eta.push(e);
    }
    Ok(CharacteristicPath {
        times: grid.times(),
        eta,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegeneracyReport {
    pub point: ProblemPoint,
    pub max_sigma_on_characteristic: f64,
    pub in_gamma: bool,
    pub in_gamma0: bool,
    /// Smallest `n` with `max ≥ 1/n`; `None` outside Γ⁰.
    pub n_index: Option<u64>,
}

impl DegeneracyReport {
    /// Membership in Γⁿ, i.e. `max ≥ 1/n`.
    pub fn in_gamma_n(&self, n: u64) -> bool {
        n > 0 && self.max_sigma_on_characteristic >= 1.0 / n as f64
    }
}

/// Smallest positive `n` with `value ≥ 1/n`.
pub fn level_index(value: f64) -> Option<u64> {
    if !(value > 0.0) {
        return None;
    }
    if value >= 1.0 {
        return Some(1);
    }
    let inv = 1.0 / value;
    if inv >= u64::MAX as f64 {
        return None;
    }
    let mut n = inv.ceil().max(1.0) as u64;
    while n > 1 && value >= 1.0 / (n - 1) as f64 {
        n -= 1;
    }
    while value < 1.0 / n as f64 {
        n += 1;
    }
    Some(n)
}

pub fn gamma_report(
    model: &CoefficientModel,
    point: &ProblemPoint,
    n_ode_steps: usize,
    eps_sigma: f64,
) -> Result<DegeneracyReport> {
    if !(eps_sigma > 0.0) {
        return Err(invalid("eps_sigma", eps_sigma, "must be positive"));
    }
    let path = characteristic(model, point, n_ode_steps)?;
    let max = path
        .times
        .iter()
        .zip(&path.eta)
        .map(|(&s, &e)| model.sigma(s, e).abs())
        .fold(0.0, f64::max);
    let in_gamma0 = max > eps_sigma;
    Ok(DegeneracyReport {
        point: *point,
        max_sigma_on_characteristic: max,
        in_gamma: model.sigma(point.t0, point.x0).abs() > eps_sigma,
        in_gamma0,
        n_index: if in_gamma0 { level_index(max) } else { None },
    })
}

/// Memoized Γ⁰ membership test.
///
/// Points already in Γ are answered without integrating; otherwise the
/// characteristic is integrated until σ exceeds the threshold. Answers are
/// cached by `(t bits, x rounded to 1e-10)`.
pub struct Gamma0Classifier<'a> {
    model: &'a CoefficientModel,
    n_ode_steps: usize,
    eps_sigma: f64,
    cache: Mutex<HashMap<(u64, i64), bool>>,
}

const CACHE_X_SCALE: f64 = 1e10;

impl<'a> Gamma0Classifier<'a> {
    pub fn new(model: &'a CoefficientModel, n_ode_steps: usize, eps_sigma: f64) -> Result<Self> {
        if n_ode_steps == 0 {
            return Err(invalid("n_ode_steps", 0.0, "must be at least 1"));
        }
        if !(eps_sigma > 0.0) {
            return Err(invalid("eps_sigma", eps_sigma, "must be positive"));
        }
        Ok(Gamma0Classifier {
            model,
            n_ode_steps,
            eps_sigma,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn eps_sigma(&self) -> f64 {
        self.eps_sigma
    }

    fn key(t: f64, x: f64) -> Option<(u64, i64)> {
        let scaled = (x * CACHE_X_SCALE).round();
        (scaled.abs() < 9.0e18).then(|| (t.to_bits(), scaled as i64))
    }

    pub fn in_gamma0(&self, t: f64, x: f64) -> bool {
        let m = self.model;
        if m.sigma(t, x).abs() > self.eps_sigma {
            return true;
        }
        let key = Self::key(t, x);
        if let Some(k) = key {
            if let Some(&hit) = self.cache.lock().unwrap().get(&k) {
                return hit;
            }
        }
        let alive = self.integrate(t, x);
        if let Some(k) = key {
            self.cache.lock().unwrap().insert(k, alive);
        }
        alive
    }

    fn integrate(&self, t: f64, x: f64) -> bool {
        let m = self.model;
        if t >= m.horizon_t {
            return false;
        }
        let Ok(grid) = TimeGrid::new(t, m.horizon_t, self.n_ode_steps) else {
            return false;
        };
        let h = grid.dt();
        let mut e = x;
        for k in 0..self.n_ode_steps {
            e = rk4_step(m, grid.time(k), e, h);
            if !e.is_finite() {
                return false;
            }
            if m.sigma(grid.time(k + 1), e).abs() > self.eps_sigma {
                return true;
            }
        }
        false
    }

    /// First grid time at which the path is outside Γ⁰, or `T` if it never leaves.
    pub fn locate_tau(&self, path: &PathBundle) -> f64 {
        self.tau_index(path)
            .map_or(path.grid.t_end, |k| path.grid.time(k))
    }

    /// Grid index of τ, `None` when the path stays in Γ⁰ up to `T`.
    pub fn tau_index(&self, path: &PathBundle) -> Option<usize> {
        (0..path.x.len()).find(|&k| !self.in_gamma0(path.grid.time(k), path.x[k]))
    }
}

pub fn locate_tau(
    model: &CoefficientModel,
    path: &PathBundle,
    n_ode_steps: usize,
    eps_sigma: f64,
) -> Result<f64> {
    Ok(Gamma0Classifier::new(model, n_ode_steps, eps_sigma)?.locate_tau(path))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaEquivalenceReport {
    pub n_points: usize,
    pub agreement_fraction: f64,
    /// `max(ñ/n, n/ñ)` over points alive under both drifts; 1 when there are none.
    pub max_n_ratio: f64,
    /// `e^{KT}(1 + KT)` for the transformed model's constant K.
    pub envelope: f64,
    pub disagreements: Vec<ProblemPoint>,
}

/// Compare Γ⁰ membership and level indices under `b` and under `b + f₂σ`.
pub fn check_gamma_equivalence(
    model: &CoefficientModel,
    sample_points: &[ProblemPoint],
    n_ode_steps: usize,
    eps_sigma: f64,
) -> Result<GammaEquivalenceReport> {
    if sample_points.is_empty() {
        return Err(crate::FbsdeError::InvalidInput("no sample points".into()));
    }
    let tm = transformed_drift(model);
    let mut agree = 0usize;
    let mut max_ratio: f64 = 1.0;
    let mut disagreements = Vec::new();
    for p in sample_points {
        let a = gamma_report(model, p, n_ode_steps, eps_sigma)?;
        let b = gamma_report(&tm, p, n_ode_steps, eps_sigma)?;
        if a.in_gamma0 == b.in_gamma0 {
            agree += 1;
        } else {
            disagreements.push(*p);
        }
        if let (Some(n), Some(nt)) = (a.n_index, b.n_index) {
            let r = nt as f64 / n as f64;
            max_ratio = max_ratio.max(r).max(1.0 / r);
        }
    }
    let kt = tm.lipschitz_k * tm.horizon_t;
    Ok(GammaEquivalenceReport {
        n_points: sample_points.len(),
        agreement_fraction: agree as f64 / sample_points.len() as f64,
        max_n_ratio: max_ratio,
        envelope: kt.exp() * (1.0 + kt),
        disagreements,
    })
}

/// `n_t × n_x` points over `[0, T] × [x_lo, x_hi]`.
pub fn sample_grid(
    model: &CoefficientModel,
    n_t: usize,
    n_x: usize,
    x_lo: f64,
    x_hi: f64,
) -> Vec<ProblemPoint> {
    let mut pts = Vec::with_capacity(n_t * n_x);
    for i in 0..n_t {
        let t = if n_t == 1 {
            0.0
        } else {
            model.horizon_t * i as f64 / (n_t - 1) as f64
        };
        for j in 0..n_x {
            let x = if n_x == 1 {
                x_lo
            } else {
                x_lo + (x_hi - x_lo) * j as f64 / (n_x - 1) as f64
            };
            pts.push(ProblemPoint::new(t, x));
        }
    }
    pts
}

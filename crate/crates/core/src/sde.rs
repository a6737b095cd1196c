//! Forward path simulation: Euler–Maruyama for `X`, the exponential scheme for
//! the tangent flow `∇X`, and the left-point accumulators feeding both weights.
//!
//! Randomness is counter-based: path `i` under seed `s` reads ChaCha8 stream `i`
//! of the key derived from `s`, so every path is reproducible on its own and the
//! batch result never depends on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, FbsdeError, Result};
use crate::model::{CoefficientModel, ProblemPoint};

/// Fraction of invalid paths above which a batch is rejected.
pub const MAX_INVALID_FRACTION: f64 = 0.01;

/// Uniform grid on `[t0, T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(invalid("n_steps", 0.0, "must be at least 1"));
        }
        if !(t0 < t_end) || !t0.is_finite() || !t_end.is_finite() {
            return Err(invalid(
                "t0",
                t0,
                format!("must be strictly below T = {t_end}"),
            ));
        }
        Ok(TimeGrid { t0, t_end, n_steps })
    }

    /// Grid from `point.t0` to the model horizon.
    pub fn for_model(
        model: &CoefficientModel,
        point: &ProblemPoint,
        n_steps: usize,
    ) -> Result<Self> {
        TimeGrid::new(point.t0, model.horizon_t, n_steps)
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / self.n_steps as f64
    }

    /// `t_k`; the last node is exactly `T`.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        if k >= self.n_steps {
            self.t_end
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }

    /// Index of the grid node nearest to `t` (clamped to the grid).
    pub fn nearest_index(&self, t: f64) -> usize {
        let k = ((t - self.t0) / self.dt()).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n_steps)
        }
    }
}

fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Brownian increments `dW_0..dW_{n-1}`, each `N(0, dt)`, for one path.
pub fn brownian_increments(seed: u64, path_index: u64, n_steps: usize, dt: f64) -> Vec<f64> {
    let mut rng = path_rng(seed, path_index);
    let sd = dt.sqrt();
    (0..n_steps)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect()
}

/// Running state of one path at grid index `k`.
///
/// Sums are over `j < k`; `gamma` is `σ(t_k, X_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathState {
    pub k: usize,
    pub t: f64,
    pub x: f64,
    pub grad_x: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub s1: f64,
    pub b_acc: f64,
    /// `Σ ∇X_j/γ_j dW_j` over steps with `γ_j ≠ 0`.
    pub s_inv: f64,
    /// `Σ dt`, the grid's own elapsed time.
    pub elapsed: f64,
    /// `min_{j<k} |γ_j|`, `+∞` at `k = 0`.
    pub min_abs_gamma: f64,
}

impl PathState {
    fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.grad_x.is_finite()
            && self.gamma.is_finite()
            && self.lambda.is_finite()
            && self.s1.is_finite()
            && self.b_acc.is_finite()
    }
}

/// Step-by-step simulator for a single path.
pub struct PathStepper<'a> {
    model: &'a CoefficientModel,
    grid: TimeGrid,
    dt: f64,
    sqrt_dt: f64,
    rng: ChaCha8Rng,
    state: PathState,
    valid: bool,
}

impl<'a> PathStepper<'a> {
    pub fn new(
        model: &'a CoefficientModel,
        point: &ProblemPoint,
        grid: TimeGrid,
        seed: u64,
        path_index: u64,
    ) -> Self {
        let dt = grid.dt();
        let gamma = model.sigma(grid.t0, point.x0);
        let state = PathState {
            k: 0,
            t: grid.t0,
            x: point.x0,
            grad_x: 1.0,
            gamma,
            lambda: 0.0,
            s1: 0.0,
            b_acc: 0.0,
            s_inv: 0.0,
            elapsed: 0.0,
            min_abs_gamma: f64::INFINITY,
        };
        PathStepper {
            model,
            grid,
            dt,
            sqrt_dt: dt.sqrt(),
            rng: path_rng(seed, path_index),
            valid: state.is_finite(),
            state,
        }
    }

    #[inline]
    pub fn state(&self) -> &PathState {
        &self.state
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn is_done(&self) -> bool {
        self.state.k >= self.grid.n_steps
    }

    /// Advance one step and return the increment used.
    #[inline]
    pub fn step(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let dw = self.sqrt_dt * z;
        let dt = self.dt;
        let m = self.model;
        let s = &mut self.state;
        let (t, x, gx, gamma) = (s.t, s.x, s.grad_x, s.gamma);
        let sx = m.sigma_x(t, x);
        let drift = m.b(t, x);
        let bx = m.b_x(t, x);

        s.s1 += gamma * gx * dw;
        s.b_acc += s.lambda * sx * gamma * gx * dt;
        if gamma != 0.0 {
            s.s_inv += gx / gamma * dw;
        }
        s.min_abs_gamma = s.min_abs_gamma.min(gamma.abs());
        s.lambda += gamma * gamma * dt;
        s.elapsed += dt;
        s.x = x + drift * dt + gamma * dw;
        let expo = (bx - 0.5 * sx * sx) * dt + sx * dw;
        if expo != 0.0 {
            s.grad_x = gx * expo.exp();
        }
        s.k += 1;
        s.t = self.grid.time(s.k);
        s.gamma = m.sigma(s.t, s.x);
        if self.valid && !s.is_finite() {
            self.valid = false;
        }
        dw
    }

    /// Run to `T` and return the terminal state.
    pub fn finish(mut self) -> (PathState, bool) {
        while !self.is_done() {
            self.step();
        }
        (self.state, self.valid)
    }
}

/// One simulated trajectory with every per-node quantity the weights need.
#[derive(Clone, Debug, PartialEq)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub path_index: u64,
    pub dw: Vec<f64>,
    pub x: Vec<f64>,
    pub grad_x: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub s1: Vec<f64>,
    pub b: Vec<f64>,
    pub valid: bool,
}

impl PathBundle {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.grid.t0
    }
}

/// Simulate one path. Non-finite values mark the bundle invalid instead of failing.
pub fn simulate_path(
    model: &CoefficientModel,
    point: &ProblemPoint,
    grid: TimeGrid,
    seed: u64,
    path_index: u64,
) -> PathBundle {
    let n = grid.n_steps;
    let mut stepper = PathStepper::new(model, point, grid, seed, path_index);
    let mut bundle = PathBundle {
        grid,
        path_index,
        dw: Vec::with_capacity(n),
        x: Vec::with_capacity(n + 1),
        grad_x: Vec::with_capacity(n + 1),
        gamma: Vec::with_capacity(n + 1),
        lambda: Vec::with_capacity(n + 1),
        s1: Vec::with_capacity(n + 1),
        b: Vec::with_capacity(n + 1),
        valid: true,
    };
    let push = |b: &mut PathBundle, s: &PathState| {
        b.x.push(s.x);
        b.grad_x.push(s.grad_x);
        b.gamma.push(s.gamma);
        b.lambda.push(s.lambda);
        b.s1.push(s.s1);
        b.b.push(s.b_acc);
    };
    push(&mut bundle, stepper.state());
    while !stepper.is_done() {
        let dw = stepper.step();
        bundle.dw.push(dw);
        push(&mut bundle, stepper.state());
    }
    bundle.valid = stepper.is_valid();
    bundle
}

/// Valid paths of a batch plus the indices of those excluded as non-finite.
#[derive(Clone, Debug)]
pub struct Batch {
    pub paths: Vec<PathBundle>,
    pub invalid: Vec<u64>,
}

pub fn simulate_batch(
    model: &CoefficientModel,
    point: &ProblemPoint,
    grid: TimeGrid,
    seed: u64,
    n_paths: usize,
) -> Result<Batch> {
    if n_paths == 0 {
        return Err(invalid("n_paths", 0.0, "must be at least 1"));
    }
    let all: Vec<PathBundle> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(model, point, grid, seed, i))
        .collect();
    let (paths, bad): (Vec<_>, Vec<_>) = all.into_iter().partition(|p| p.valid);
    let invalid: Vec<u64> = bad.iter().map(|p| p.path_index).collect();
    check_invalid_fraction(invalid.len(), n_paths)?;
    Ok(Batch { paths, invalid })
}

pub(crate) fn check_invalid_fraction(n_invalid: usize, total: usize) -> Result<()> {
    if n_invalid as f64 > MAX_INVALID_FRACTION * total as f64 {
        return Err(FbsdeError::TooManyInvalidPaths {
            invalid: n_invalid,
            total,
        });
    }
    Ok(())
}

//! Malliavin weights built from a simulated path.
//!
//! Degenerate weight (needs only `Λ_r > 0`):
//!
//! ```text
//! N_r = (1/Λ_r) [ ∫ γ ∇X dW + (2/Λ_r) ∫ Λ_s σ_x γ ∇X ds ]
//! ```
//!
//! Nondegenerate weight (needs `σ ≠ 0` along the path):
//!
//! ```text
//! N̄_r = (1/(r − t)) ∫ σ⁻¹ ∇X dW
//! ```
//!
//! Both integrals are left-point sums taken from the same samples, so for
//! constant σ and zero drift the two weights are the same floating-point number.

use crate::sde::{PathBundle, PathState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    Degenerate,
    Nondegenerate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSample {
    pub r: f64,
    /// `None` exactly when `floored`.
    pub value: Option<f64>,
    pub lambda_at_r: f64,
    pub floored: bool,
}

impl WeightSample {
    fn new(r: f64, lambda_at_r: f64, value: Option<f64>) -> Self {
        WeightSample {
            r,
            value,
            lambda_at_r,
            floored: value.is_none(),
        }
    }
}

/// Default Λ floor: one step of volatility at the Γ threshold.
pub fn default_lambda_floor(dt: f64, eps_sigma: f64) -> f64 {
    dt * eps_sigma * eps_sigma
}

#[inline]
pub fn degenerate_from_sums(lambda: f64, s1: f64, b_acc: f64, lambda_floor: f64) -> Option<f64> {
    if !(lambda >= lambda_floor) || lambda <= 0.0 {
        return None;
    }
    Some((s1 + (2.0 / lambda) * b_acc) / lambda)
}

#[inline]
pub fn nondegenerate_from_sums(
    s_inv: f64,
    elapsed: f64,
    min_abs_gamma: f64,
    sigma_floor: f64,
) -> Option<f64> {
    if !(min_abs_gamma >= sigma_floor) || elapsed <= 0.0 {
        return None;
    }
    Some(s_inv / elapsed)
}

/// Weight of the requested kind from a running path state.
#[inline]
pub fn weight_from_state(
    kind: WeightKind,
    s: &PathState,
    lambda_floor: f64,
    sigma_floor: f64,
) -> Option<f64> {
    match kind {
        WeightKind::Degenerate => degenerate_from_sums(s.lambda, s.s1, s.b_acc, lambda_floor),
        WeightKind::Nondegenerate => {
            nondegenerate_from_sums(s.s_inv, s.elapsed, s.min_abs_gamma, sigma_floor)
        }
    }
}

/// `N_r` at grid index `r_index ≥ 1`.
pub fn degenerate_weight(path: &PathBundle, r_index: usize, lambda_floor: f64) -> WeightSample {
    let r_index = r_index.clamp(1, path.len() - 1);
    let lambda = path.lambda[r_index];
    WeightSample::new(
        path.grid.time(r_index),
        lambda,
        degenerate_from_sums(lambda, path.s1[r_index], path.b[r_index], lambda_floor),
    )
}

/// `N̄_r` at grid index `r_index ≥ 1`; floored if some `|γ_j| < sigma_floor`, `j < r_index`.
pub fn nondegenerate_weight(path: &PathBundle, r_index: usize, sigma_floor: f64) -> WeightSample {
    let r_index = r_index.clamp(1, path.len() - 1);
    let dt = path.grid.dt();
    let mut s_inv = 0.0;
    let mut elapsed = 0.0;
    let mut min_abs = f64::INFINITY;
    for j in 0..r_index {
        let gamma = path.gamma[j];
        if gamma != 0.0 {
            s_inv += path.grad_x[j] / gamma * path.dw[j];
        }
        min_abs = min_abs.min(gamma.abs());
        elapsed += dt;
    }
    WeightSample::new(
        path.grid.time(r_index),
        path.lambda[r_index],
        nondegenerate_from_sums(s_inv, elapsed, min_abs, sigma_floor),
    )
}

pub fn weight(
    path: &PathBundle,
    kind: WeightKind,
    r_index: usize,
    lambda_floor: f64,
    sigma_floor: f64,
) -> WeightSample {
    match kind {
        WeightKind::Degenerate => degenerate_weight(path, r_index, lambda_floor),
        WeightKind::Nondegenerate => nondegenerate_weight(path, r_index, sigma_floor),
    }
}

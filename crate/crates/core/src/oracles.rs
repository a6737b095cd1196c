//! Closed-form and quadrature reference solutions.

use std::f64::consts::{PI, SQRT_2};

use libm::{erfc, lgamma as ln_gamma};

use crate::error::{invalid, FbsdeError, Result};
use crate::model::{example1_admissible, example1_payoff};
use crate::quadrature::{gauss_hermite, gauss_laguerre};

pub use crate::quadrature::gaussian_expectation;

pub const DEFAULT_N_QUAD: usize = 128;
pub const MIN_N_QUAD: usize = 16;

/// Beyond this many standard deviations from the kink plain Hermite is used.
const FOLD_LIMIT: f64 = 10.0;

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// `E|N(0,1)|^p = 2^{p/2} Γ((p+1)/2)/√π`.
pub fn gaussian_abs_moment(p: f64) -> Result<f64> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(invalid("p", p, "must be finite and non-negative"));
    }
    Ok((0.5 * p * 2f64.ln() + ln_gamma(0.5 * (p + 1.0)) - 0.5 * PI.ln()).exp())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Example1Params {
    pub alpha: f64,
    pub beta: f64,
}

impl Example1Params {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", alpha, "must lie in (0, 1)"));
        }
        if !example1_admissible(alpha, beta) {
            return Err(invalid(
                "beta",
                beta,
                format!("must lie in (0, {})", alpha / (2.0 * (1.0 - alpha))),
            ));
        }
        Ok(Example1Params { alpha, beta })
    }

    /// Standard deviation of `∫_t^1 σ dW`: `σ₀² = (1−t)^{1+2β}/(1+2β)`.
    pub fn sigma0(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        let e = 1.0 + 2.0 * self.beta;
        ((1.0 - t).powf(e) / e).sqrt()
    }
}

/// `u(t, x) = E g(x + σ₀N)` for the blow-up example; `g(x)` once `σ₀ = 0`.
pub fn example1_u(t: f64, x: f64, params: &Example1Params, n_quad: usize) -> Result<f64> {
    if n_quad < MIN_N_QUAD {
        return Err(invalid(
            "n_quad",
            n_quad as f64,
            format!("must be at least {MIN_N_QUAD}"),
        ));
    }
    if !(0.0..=2.0).contains(&t) {
        return Err(invalid("t", t, "must lie in [0, 2]"));
    }
    let alpha = params.alpha;
    let s0 = params.sigma0(t);
    if s0 == 0.0 {
        return Ok(example1_payoff(x, alpha));
    }
    let c = x / s0;
    if c.abs() > FOLD_LIMIT {
        let rule = gauss_hermite(n_quad);
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(z, w)| w * example1_payoff(x + SQRT_2 * s0 * z, alpha))
            .sum();
        return Ok(s / PI.sqrt());
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    // Fold the odd payoff onto (0, ∞) and substitute s = v²/2:
    // u = σ₀^{1−α} 2^{−α/2}/√(2π) ∫ s^{(1−α)/2} e^{−s} h(s) ds,
    // h(s) = e^{−c²/2}(e^{c√(2s)} − e^{−c√(2s)})/√s.
    let rule = gauss_laguerre(n_quad, 0.5 * (1.0 - alpha));
    let half_c2 = 0.5 * c * c;
    let s: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&si, &wi)| {
            let v = (2.0 * si).sqrt();
            let h = ((c * v - half_c2).exp() - (-c * v - half_c2).exp()) / si.sqrt();
            wi * h
        })
        .sum();
    Ok(s0.powf(1.0 - alpha) * 2f64.powf(-0.5 * alpha) / (2.0 * PI).sqrt() * s)
}

/// `u_x(t, 0) = σ₀^{−α} E|N|^{2−α}`.
pub fn example1_ux_at_zero(t: f64, params: &Example1Params) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(invalid("t", t, "must lie in [0, 1)"));
    }
    Ok(params.sigma0(t).powf(-params.alpha) * gaussian_abs_moment(2.0 - params.alpha)?)
}

/// Exponent of `(u_x σ)(t, 0)` in `(1−t)`: `β(1−α) − α/2`.
pub fn example1_z_exponent(params: &Example1Params) -> f64 {
    params.beta * (1.0 - params.alpha) - 0.5 * params.alpha
}

/// Exponent of `u_x(t, 0)` in `(1−t)`: `−α(1+2β)/2`.
pub fn example1_ux_exponent(params: &Example1Params) -> f64 {
    -0.5 * params.alpha * (1.0 + 2.0 * params.beta)
}

/// `(u, u_x)` for the digital `1_{x>K}` under `dX = σ̄ dW`.
pub fn bachelier_digital(
    t: f64,
    x: f64,
    sigma_bar: f64,
    strike: f64,
    horizon: f64,
) -> Result<(f64, f64)> {
    if !(t < horizon) {
        return Err(FbsdeError::InvalidInput(format!(
            "bachelier_digital needs t < T (t = {t}, T = {horizon})"
        )));
    }
    if !(sigma_bar > 0.0) {
        return Err(invalid("sigma_bar", sigma_bar, "must be positive"));
    }
    let s = sigma_bar * (horizon - t).sqrt();
    let z = (x - strike) / s;
    Ok((normal_cdf(z), normal_pdf(z) / s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_moments() {
        assert!((gaussian_abs_moment(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gaussian_abs_moment(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gaussian_abs_moment(1.0).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!((gaussian_abs_moment(4.0).unwrap() - 3.0).abs() < 1e-13);
        assert!(gaussian_abs_moment(-0.1).is_err());
    }

    #[test]
    fn example1_frozen_values() {
        let p = Example1Params::new(0.8, 0.5).unwrap();
        assert!((example1_u(1.5, 2.0, &p, 128).unwrap() - 2f64.powf(0.2)).abs() < 1e-15);
        assert_eq!(example1_u(0.5, 0.0, &p, 128).unwrap(), 0.0);
        // independent mpmath quadrature of the Gaussian convolution
        let v = example1_u(0.5, 1.0, &p, 128).unwrap();
        assert!((v - 0.9848891540233591).abs() < 1e-12, "{v}");
        let q = Example1Params::new(0.5, 0.4).unwrap();
        let ux = example1_ux_at_zero(0.5, &q).unwrap();
        assert!((ux - 1.3608186994955928).abs() < 1e-12, "{ux}");
        assert!((example1_z_exponent(&p) + 0.3).abs() < 1e-15);
        assert!((example1_z_exponent(&q) + 0.05).abs() < 1e-15);
        assert!(example1_ux_at_zero(1.0, &p).is_err());
        assert!(example1_u(0.5, 1.0, &p, 8).is_err());
    }

    #[test]
    fn example1_quadrature_self_converges() {
        let p = Example1Params::new(0.8, 0.5).unwrap();
        for x in [1.0, 0.05, -0.3, 3.0] {
            let a = example1_u(0.5, x, &p, 64).unwrap();
            let b = example1_u(0.5, x, &p, 128).unwrap();
            assert!((a - b).abs() < 1e-6, "x={x}: {a} {b}");
        }
    }

    #[test]
    fn example1_derivative_at_zero() {
        let p = Example1Params::new(0.8, 0.5).unwrap();
        let h = 1e-4;
        for t in [0.25, 0.5, 0.75, 0.9] {
            let d = (example1_u(t, h, &p, 128).unwrap() - example1_u(t, -h, &p, 128).unwrap())
                / (2.0 * h);
            let exact = example1_ux_at_zero(t, &p).unwrap();
            assert!(((d - exact) / exact).abs() < 1e-3, "t={t}: {d} vs {exact}");
        }
    }

    #[test]
    fn example1_branch_switch_is_continuous() {
        let p = Example1Params::new(0.6, 0.3).unwrap();
        let t = 0.2;
        let x = FOLD_LIMIT * p.sigma0(t);
        let inside = example1_u(t, x * (1.0 - 1e-9), &p, 128).unwrap();
        let outside = example1_u(t, x * (1.0 + 1e-9), &p, 128).unwrap();
        assert!((inside - outside).abs() < 1e-8, "{inside} {outside}");
    }

    #[test]
    fn digital_values() {
        let (u, ux) = bachelier_digital(0.0, 0.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(u, 0.5);
        assert!((ux - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-16);
        let (u, ux) = bachelier_digital(0.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((u - 0.8413447460685429).abs() < 1e-14, "{u}");
        assert!((ux - 0.24197072451914337).abs() < 1e-16);
        let (u, ux) = bachelier_digital(0.0, 10.0, 1.0, 0.0, 1.0).unwrap();
        assert!((u - 1.0).abs() < 1e-15 && ux < 1e-20);
        assert!(bachelier_digital(1.0, 0.0, 1.0, 0.0, 1.0).is_err());
    }
}

//! Gauss–Hermite and generalized Gauss–Laguerre rules by Newton iteration on
//! the three-term recurrences.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use libm::lgamma as ln_gamma;

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const NEWTON_TOL: f64 = 3e-14;
const MAX_NEWTON: usize = 100;

type Cache = Mutex<HashMap<(u8, usize, u64), Arc<Rule>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(kind: u8, n: usize, a: f64, build: impl FnOnce() -> Rule) -> Arc<Rule> {
    let key = (kind, n, a.to_bits());
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(build());
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

/// Nodes and weights for `∫ f(z) e^{−z²} dz`, nodes descending.
pub fn gauss_hermite(n: usize) -> Arc<Rule> {
    assert!(n >= 1);
    cached(0, n, 0.0, || hermite_rule(n))
}

fn hermite_rule(n: usize) -> Rule {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..MAX_NEWTON {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= NEWTON_TOL * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    Rule {
        nodes: x,
        weights: w,
    }
}

/// Nodes and weights for `∫₀^∞ f(s) s^a e^{−s} ds`, `a > −1`, nodes ascending.
pub fn gauss_laguerre(n: usize, a: f64) -> Arc<Rule> {
    assert!(n >= 1 && a > -1.0);
    cached(1, n, a, || laguerre_rule(n, a))
}

fn laguerre_rule(n: usize, a: f64) -> Rule {
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    let log_norm = ln_gamma(a + nf) - ln_gamma(nf);
    for i in 0..n {
        z = match i {
            0 => (1.0 + a) * (3.0 + 0.92 * a) / (1.0 + 2.4 * nf + 1.8 * a),
            1 => z + (15.0 + 6.25 * a) / (1.0 + 0.9 * a + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * a / (1.0 + 3.5 * ai))
                    * (z - x[i - 2])
                    / (1.0 + 0.3 * a)
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..MAX_NEWTON {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0 + a - z) * p2 - (jf - 1.0 + a) * p3) / jf;
            }
            pp = (nf * p1 - (nf + a) * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= NEWTON_TOL * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        // −Γ(n+a)/Γ(n) / (pp·n·p2); the sign of pp·p2 is always negative
        w[i] = (log_norm - (pp * nf * p2).abs().ln()).exp();
    }
    Rule {
        nodes: x,
        weights: w,
    }
}

/// `E f(mean + sd·N)` by `n`-point Gauss–Hermite.
pub fn gaussian_expectation(f: impl Fn(f64) -> f64, mean: f64, sd: f64, n: usize) -> f64 {
    let rule = gauss_hermite(n);
    let scale = std::f64::consts::SQRT_2 * sd;
    let s: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(z, w)| w * f(mean + scale * z))
        .sum();
    s / std::f64::consts::PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_integrates_polynomials() {
        for n in [16, 64, 128] {
            let r = gauss_hermite(n);
            let sp = std::f64::consts::PI.sqrt();
            let m0: f64 = r.weights.iter().sum();
            let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(z, w)| w * z * z).sum();
            let m4: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(z, w)| w * z.powi(4))
                .sum();
            assert!((m0 - sp).abs() < 1e-13, "n={n} {m0}");
            assert!((m2 - sp / 2.0).abs() < 1e-13);
            assert!((m4 - 0.75 * sp).abs() < 1e-12);
        }
    }

    #[test]
    fn laguerre_integrates_moments() {
        for n in [16, 64, 128] {
            for a in [0.0, 0.1, 0.25, -0.4] {
                let r = gauss_laguerre(n, a);
                for k in 0..4 {
                    let exact = ln_gamma(a + 1.0 + k as f64).exp();
                    let q: f64 = r
                        .nodes
                        .iter()
                        .zip(&r.weights)
                        .map(|(s, w)| w * s.powi(k))
                        .sum();
                    assert!(
                        (q - exact).abs() < 1e-11 * exact,
                        "n={n} a={a} k={k}: {q} vs {exact}"
                    );
                }
                assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
            }
        }
    }

    #[test]
    fn gaussian_expectation_of_cosine() {
        // E cos(N) = e^{−1/2}
        let v = gaussian_expectation(f64::cos, 0.0, 1.0, 32);
        assert!((v - (-0.5f64).exp()).abs() < 1e-14);
    }
}

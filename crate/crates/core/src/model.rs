//! Coefficient models `(σ, b, f₁, f₂, g)` of a decoupled forward–backward SDE
//!
//! ```text
//! dX = b(t, X) dt + σ(t, X) dW
//! dY = -[f₁(t, X, Y) + f₂(t, X) Z] dt + Z dW,   Y_T = g(X_T)
//! ```
//!
//! Every model carries its own spatial derivatives (needed pointwise by the
//! tangent flow), its boundedness / regularity constants and the set of
//! points where the payoff jumps. Models are immutable and cheap to clone.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FbsdeError, Result};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type DriverFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type PayoffFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative step of the central-difference fallback for user models.
pub const FD_DERIVATIVE_STEP: f64 = 1e-5;

/// The y-dependent part `f₁(t, x, y)` of the driver with its partials.
#[derive(Clone)]
pub struct Driver {
    pub f: DriverFn,
    pub f_x: DriverFn,
    pub f_y: DriverFn,
    pub depends_on_y: bool,
}

impl Driver {
    /// Driver from closures, partials by central differences.
    pub fn with_fd_partials<F>(f: F, depends_on_y: bool) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        let f: DriverFn = Arc::new(f);
        let fx = f.clone();
        let fy = f.clone();
        Driver {
            f,
            f_x: Arc::new(move |t, x, y| {
                let h = FD_DERIVATIVE_STEP * x.abs().max(1.0);
                (fx(t, x + h, y) - fx(t, x - h, y)) / (2.0 * h)
            }),
            f_y: Arc::new(move |t, x, y| {
                let h = FD_DERIVATIVE_STEP * y.abs().max(1.0);
                (fy(t, x, y + h) - fy(t, x, y - h)) / (2.0 * h)
            }),
            depends_on_y,
        }
    }

    /// `f₁(t, x, y) = -λ y`.
    pub fn linear_discount(lambda: f64) -> Self {
        Driver {
            f: Arc::new(move |_, _, y| -lambda * y),
            f_x: Arc::new(|_, _, _| 0.0),
            f_y: Arc::new(move |_, _, _| -lambda),
            depends_on_y: true,
        }
    }

    /// `f₁ ≡ c`.
    pub fn constant(c: f64) -> Self {
        Driver {
            f: Arc::new(move |_, _, _| c),
            f_x: Arc::new(|_, _, _| 0.0),
            f_y: Arc::new(|_, _, _| 0.0),
            depends_on_y: false,
        }
    }
}

/// The z-coefficient `f₂(t, x)` of a driver linear in z.
#[derive(Clone)]
pub struct ZCoefficient {
    pub f2: SpaceTimeFn,
    pub f2_x: SpaceTimeFn,
}

/// Uniform time-Hölder modulus of σ: `|σ(t₁,x) − σ(t₂,x)| ≤ c·|t₁−t₂|^alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderModulus {
    pub alpha: f64,
    pub c: f64,
}

impl HolderModulus {
    /// Whether the exponent is in the range `(1/2, 1]` used for the Z-driver results.
    pub fn is_strong(&self) -> bool {
        self.alpha > 0.5 && self.alpha <= 1.0
    }
}

#[derive(Clone)]
pub struct CoefficientModel {
    name: String,
    sigma: SpaceTimeFn,
    sigma_x: SpaceTimeFn,
    b: SpaceTimeFn,
    b_x: SpaceTimeFn,
    driver: Option<Driver>,
    z_coef: Option<ZCoefficient>,
    g: PayoffFn,
    g_prime: Option<PayoffFn>,
    jumps: Vec<f64>,
    pub lipschitz_k: f64,
    /// `None` when σ has no time-Hölder modulus (e.g. a jump in t).
    pub holder: Option<HolderModulus>,
    pub psi_k: f64,
    pub psi_p0: f64,
    pub horizon_t: f64,
}

impl fmt::Debug for CoefficientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientModel")
            .field("name", &self.name)
            .field("has_driver", &self.driver.is_some())
            .field("has_z_coefficient", &self.z_coef.is_some())
            .field("has_g_prime", &self.g_prime.is_some())
            .field("jumps", &self.jumps)
            .field("lipschitz_k", &self.lipschitz_k)
            .field("holder", &self.holder)
            .field("psi_k", &self.psi_k)
            .field("psi_p0", &self.psi_p0)
            .field("horizon_t", &self.horizon_t)
            .finish()
    }
}

impl CoefficientModel {
    pub fn builder(name: impl Into<String>, horizon_t: f64) -> ModelBuilder {
        ModelBuilder::new(name, horizon_t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn sigma(&self, t: f64, x: f64) -> f64 {
        (self.sigma)(t, x)
    }

    #[inline]
    pub fn sigma_x(&self, t: f64, x: f64) -> f64 {
        (self.sigma_x)(t, x)
    }

    #[inline]
    pub fn b(&self, t: f64, x: f64) -> f64 {
        (self.b)(t, x)
    }

    #[inline]
    pub fn b_x(&self, t: f64, x: f64) -> f64 {
        (self.b_x)(t, x)
    }

    /// `f₁(t, x, y)`; zero when the model has no driver.
    #[inline]
    pub fn f1(&self, t: f64, x: f64, y: f64) -> f64 {
        self.driver.as_ref().map_or(0.0, |d| (d.f)(t, x, y))
    }

    #[inline]
    pub fn f1_x(&self, t: f64, x: f64, y: f64) -> f64 {
        self.driver.as_ref().map_or(0.0, |d| (d.f_x)(t, x, y))
    }

    #[inline]
    pub fn f1_y(&self, t: f64, x: f64, y: f64) -> f64 {
        self.driver.as_ref().map_or(0.0, |d| (d.f_y)(t, x, y))
    }

    #[inline]
    pub fn f2(&self, t: f64, x: f64) -> f64 {
        self.z_coef.as_ref().map_or(0.0, |z| (z.f2)(t, x))
    }

    #[inline]
    pub fn f2_x(&self, t: f64, x: f64) -> f64 {
        self.z_coef.as_ref().map_or(0.0, |z| (z.f2_x)(t, x))
    }

    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    #[inline]
    pub fn g_prime(&self, x: f64) -> Option<f64> {
        self.g_prime.as_ref().map(|gp| gp(x))
    }

    pub fn has_g_prime(&self) -> bool {
        self.g_prime.is_some()
    }

    pub fn has_driver(&self) -> bool {
        self.driver.is_some()
    }

    pub fn driver_depends_on_y(&self) -> bool {
        self.driver.as_ref().is_some_and(|d| d.depends_on_y)
    }

    pub fn has_z_coefficient(&self) -> bool {
        self.z_coef.is_some()
    }

    /// Points where `g` is discontinuous (or has a kink worth avoiding on grids).
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Growth envelope `ψ(x) = psi_k·(1 + |x|^psi_p0)`.
    pub fn psi(&self, x: f64) -> f64 {
        self.psi_k * (1.0 + x.abs().powf(self.psi_p0))
    }

    /// Sampled check of the boundedness, derivative, Hölder and growth invariants
    /// on an `n_t × n_x` grid over `[0, T] × [x_lo, x_hi]`.
    pub fn check_invariants(&self, n_t: usize, n_x: usize, x_lo: f64, x_hi: f64) -> Result<()> {
        let n_t = n_t.max(2);
        let n_x = n_x.max(2);
        let ts: Vec<f64> = (0..n_t)
            .map(|i| self.horizon_t * i as f64 / (n_t - 1) as f64)
            .collect();
        let xs: Vec<f64> = (0..n_x)
            .map(|j| x_lo + (x_hi - x_lo) * j as f64 / (n_x - 1) as f64)
            .collect();
        let k = self.lipschitz_k * (1.0 + 1e-12);
        let h = FD_DERIVATIVE_STEP;
        let fd_tol = 10.0 * h;
        let fail = |msg: String| Err(FbsdeError::ModelInvariant(format!("{}: {msg}", self.name)));

        for &t in &ts {
            for &x in &xs {
                let s = self.sigma(t, x);
                let b = self.b(t, x);
                if !(s.abs() <= k) {
                    return fail(format!(
                        "|sigma({t}, {x})| = {} > K = {}",
                        s.abs(),
                        self.lipschitz_k
                    ));
                }
                if !(b.abs() <= k) {
                    return fail(format!(
                        "|b({t}, {x})| = {} > K = {}",
                        b.abs(),
                        self.lipschitz_k
                    ));
                }
                let checks = [
                    ("sigma_x", &self.sigma, &self.sigma_x),
                    ("b_x", &self.b, &self.b_x),
                ];
                for (label, f, fx) in checks {
                    let fd = (f(t, x + h) - f(t, x - h)) / (2.0 * h);
                    let an = fx(t, x);
                    if !((fd - an).abs() <= fd_tol) {
                        return fail(format!("{label}({t}, {x}) = {an}, central difference {fd}"));
                    }
                }
                if let Some(z) = &self.z_coef {
                    let fd = ((z.f2)(t, x + h) - (z.f2)(t, x - h)) / (2.0 * h);
                    let an = (z.f2_x)(t, x);
                    if !((fd - an).abs() <= fd_tol) {
                        return fail(format!("f2_x({t}, {x}) = {an}, central difference {fd}"));
                    }
                }
            }
        }

        if let Some(hm) = self.holder {
            for &x in &xs {
                for (i, &t1) in ts.iter().enumerate() {
                    for &t2 in &ts[i + 1..] {
                        let lhs = (self.sigma(t1, x) - self.sigma(t2, x)).abs();
                        let rhs = hm.c * (t2 - t1).abs().powf(hm.alpha);
                        if lhs > rhs * (1.0 + 1e-9) + 1e-14 {
                            return fail(format!(
                                "Hölder bound fails at x={x}, t1={t1}, t2={t2}: {lhs} > {rhs}"
                            ));
                        }
                    }
                }
            }
        }

        for &x in &xs {
            let gx = self.g(x);
            if !(gx.abs() <= self.psi(x)) {
                return fail(format!(
                    "|g({x})| = {} exceeds psi = {}",
                    gx.abs(),
                    self.psi(x)
                ));
            }
        }
        Ok(())
    }
}

/// Evaluation point `(t, x)` of the forward process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemPoint {
    pub t0: f64,
    pub x0: f64,
}

impl ProblemPoint {
    pub fn new(t0: f64, x0: f64) -> Self {
        ProblemPoint { t0, x0 }
    }

    pub fn validate(&self, model: &CoefficientModel) -> Result<()> {
        if !(self.t0 >= 0.0 && self.t0 <= model.horizon_t) {
            return Err(invalid(
                "t0",
                self.t0,
                format!("must lie in [0, {}]", model.horizon_t),
            ));
        }
        if !self.x0.is_finite() {
            return Err(invalid("x0", self.x0, "must be finite"));
        }
        Ok(())
    }
}

pub struct ModelBuilder {
    name: String,
    horizon_t: f64,
    sigma: Option<(SpaceTimeFn, SpaceTimeFn)>,
    b: Option<(SpaceTimeFn, SpaceTimeFn)>,
    driver: Option<Driver>,
    z_coef: Option<ZCoefficient>,
    g: Option<PayoffFn>,
    g_prime: Option<PayoffFn>,
    jumps: Vec<f64>,
    lipschitz_k: f64,
    holder: Option<HolderModulus>,
    psi_k: f64,
    psi_p0: f64,
}

fn fd_x(f: SpaceTimeFn) -> SpaceTimeFn {
    Arc::new(move |t, x| {
        let h = FD_DERIVATIVE_STEP * x.abs().max(1.0);
        (f(t, x + h) - f(t, x - h)) / (2.0 * h)
    })
}

fn zero2() -> SpaceTimeFn {
    Arc::new(|_, _| 0.0)
}

impl ModelBuilder {
    pub fn new(name: impl Into<String>, horizon_t: f64) -> Self {
        ModelBuilder {
            name: name.into(),
            horizon_t,
            sigma: None,
            b: None,
            driver: None,
            z_coef: None,
            g: None,
            g_prime: None,
            jumps: Vec::new(),
            lipschitz_k: 1.0,
            holder: None,
            psi_k: 2.0,
            psi_p0: 1.0,
        }
    }

    pub fn volatility<F, G>(mut self, sigma: F, sigma_x: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.sigma = Some((Arc::new(sigma), Arc::new(sigma_x)));
        self
    }

    /// Volatility with `σ_x` from the central-difference fallback.
    pub fn volatility_fd<F>(mut self, sigma: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let s: SpaceTimeFn = Arc::new(sigma);
        self.sigma = Some((s.clone(), fd_x(s)));
        self
    }

    pub fn drift<F, G>(mut self, b: F, b_x: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.b = Some((Arc::new(b), Arc::new(b_x)));
        self
    }

    pub fn drift_fd<F>(mut self, b: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let s: SpaceTimeFn = Arc::new(b);
        self.b = Some((s.clone(), fd_x(s)));
        self
    }

    pub fn driver(mut self, driver: Driver) -> Self {
        self.driver = Some(driver);
        self
    }

    pub fn z_coefficient<F, G>(mut self, f2: F, f2_x: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.z_coef = Some(ZCoefficient {
            f2: Arc::new(f2),
            f2_x: Arc::new(f2_x),
        });
        self
    }

    pub fn payoff<F>(mut self, g: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.g = Some(Arc::new(g));
        self
    }

    pub fn payoff_derivative<F>(mut self, g_prime: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.g_prime = Some(Arc::new(g_prime));
        self
    }

    pub fn jumps(mut self, jumps: Vec<f64>) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn lipschitz(mut self, k: f64) -> Self {
        self.lipschitz_k = k;
        self
    }

    pub fn holder(mut self, alpha: f64, c: f64) -> Self {
        self.holder = Some(HolderModulus { alpha, c });
        self
    }

    pub fn growth(mut self, psi_k: f64, psi_p0: f64) -> Self {
        self.psi_k = psi_k;
        self.psi_p0 = psi_p0;
        self
    }

    pub fn build(self) -> Result<CoefficientModel> {
        if !(self.horizon_t > 0.0 && self.horizon_t.is_finite()) {
            return Err(invalid("T", self.horizon_t, "must be positive and finite"));
        }
        if !(self.lipschitz_k > 0.0) {
            return Err(invalid("lipschitz_k", self.lipschitz_k, "must be positive"));
        }
        if let Some(h) = self.holder {
            if !(h.alpha > 0.0 && h.alpha <= 1.0) {
                return Err(invalid("holder_alpha", h.alpha, "must lie in (0, 1]"));
            }
            if !(h.c > 0.0) {
                return Err(invalid("holder_c", h.c, "must be positive"));
            }
        }
        if !(self.psi_k > 0.0 && self.psi_p0 > 0.0) {
            return Err(invalid(
                "psi",
                self.psi_k.min(self.psi_p0),
                "psi_k and psi_p0 must be positive",
            ));
        }
        let (sigma, sigma_x) = self.sigma.unwrap_or_else(|| (zero2(), zero2()));
        let (b, b_x) = self.b.unwrap_or_else(|| (zero2(), zero2()));
        Ok(CoefficientModel {
            name: self.name,
            sigma,
            sigma_x,
            b,
            b_x,
            driver: self.driver,
            z_coef: self.z_coef,
            g: self.g.unwrap_or_else(|| Arc::new(|_| 0.0)),
            g_prime: self.g_prime,
            jumps: self.jumps,
            lipschitz_k: self.lipschitz_k,
            holder: self.holder,
            psi_k: self.psi_k,
            psi_p0: self.psi_p0,
            horizon_t: self.horizon_t,
        })
    }
}

/// Names accepted by [`builtin_model`] / [`ModelSpec::build`].
pub const BUILTIN_MODELS: [&str; 6] = [
    "indicator_zero_vol",
    "example1",
    "bachelier_digital",
    "tanh_smooth",
    "girsanov_const",
    "step_vol",
];

pub type Params = BTreeMap<String, f64>;

/// Serializable model selection: a built-in name, keyed parameters and, for
/// `girsanov_const`, the wrapped base model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<ModelSpec>>,
}

impl ModelSpec {
    pub fn new(name: &str) -> Self {
        ModelSpec {
            name: name.to_string(),
            params: Params::new(),
            base: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn over(mut self, base: ModelSpec) -> Self {
        self.base = Some(Box::new(base));
        self
    }

    pub fn build(&self) -> Result<CoefficientModel> {
        if self.name == "girsanov_const" {
            let reader = ParamReader::new(&self.params, &["f2"])?;
            let f2 = reader.required("f2")?;
            let base = self
                .base
                .as_ref()
                .ok_or_else(|| FbsdeError::MissingParameter("base".into()))?
                .build()?;
            return girsanov_const(&base, f2);
        }
        if self.base.is_some() {
            return Err(FbsdeError::InvalidInput(format!(
                "model `{}` does not take a base model",
                self.name
            )));
        }
        builtin_model(&self.name, &self.params)
    }
}

struct ParamReader<'a> {
    params: &'a Params,
}

impl<'a> ParamReader<'a> {
    fn new(params: &'a Params, allowed: &[&str]) -> Result<Self> {
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(FbsdeError::InvalidInput(format!(
                "unknown parameter `{k}` (allowed: {})",
                allowed.join(", ")
            )));
        }
        for (k, v) in params {
            if !v.is_finite() {
                return Err(invalid(k, *v, "must be finite"));
            }
        }
        Ok(ParamReader { params })
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| FbsdeError::MissingParameter(key.to_string()))
    }

    fn or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.or(key, default);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(key, v, "must be positive"))
        }
    }
}

/// Build one of the named models. `girsanov_const` needs a base model and is
/// available through [`ModelSpec`] or [`girsanov_const`].
pub fn builtin_model(name: &str, params: &Params) -> Result<CoefficientModel> {
    match name {
        "indicator_zero_vol" => {
            let p = ParamReader::new(params, &["T"])?;
            let t = p.positive("T", 1.0)?;
            CoefficientModel::builder(name, t)
                .payoff(|x| if x > 0.0 { 1.0 } else { 0.0 })
                .jumps(vec![0.0])
                .lipschitz(1.0)
                .holder(1.0, 1.0)
                .build()
        }
        "example1" => {
            let p = ParamReader::new(params, &["alpha", "beta"])?;
            let alpha = p.required("alpha")?;
            let beta = p.required("beta")?;
            example1_model(alpha, beta)
        }
        "bachelier_digital" => {
            let p = ParamReader::new(params, &["sigma_bar", "strike", "T"])?;
            let sigma_bar = p.positive("sigma_bar", 1.0)?;
            let strike = p.or("strike", 0.0);
            let t = p.positive("T", 1.0)?;
            CoefficientModel::builder(name, t)
                .volatility(move |_, _| sigma_bar, |_, _| 0.0)
                .payoff(move |x| if x > strike { 1.0 } else { 0.0 })
                .jumps(vec![strike])
                .lipschitz(sigma_bar.max(1.0))
                .holder(1.0, 1.0)
                .build()
        }
        "tanh_smooth" => {
            let p = ParamReader::new(params, &["sigma_bar", "T"])?;
            let sigma_bar = p.positive("sigma_bar", 1.0)?;
            let t = p.positive("T", 1.0)?;
            CoefficientModel::builder(name, t)
                .volatility(move |_, _| sigma_bar, |_, _| 0.0)
                .payoff(f64::tanh)
                .payoff_derivative(|x| {
                    let c = x.cosh();
                    1.0 / (c * c)
                })
                .lipschitz(sigma_bar.max(1.0))
                .holder(1.0, 1.0)
                .build()
        }
        "step_vol" => {
            let p = ParamReader::new(params, &["sigma_bar", "t_cut", "strike", "T"])?;
            let sigma_bar = p.positive("sigma_bar", 1.0)?;
            let t = p.positive("T", 1.0)?;
            let t_cut = p.or("t_cut", 0.5 * t);
            if !(t_cut > 0.0 && t_cut < t) {
                return Err(invalid("t_cut", t_cut, format!("must lie in (0, {t})")));
            }
            let strike = p.or("strike", 0.0);
            // σ jumps in t, so no Hölder modulus is declared.
            CoefficientModel::builder(name, t)
                .volatility(
                    move |s, _| if s <= t_cut { sigma_bar } else { 0.0 },
                    |_, _| 0.0,
                )
                .payoff(move |x| if x > strike { 1.0 } else { 0.0 })
                .jumps(vec![strike])
                .lipschitz(sigma_bar.max(1.0))
                .build()
        }
        "girsanov_const" => Err(FbsdeError::MissingParameter("base".into())),
        other => Err(FbsdeError::UnknownModel(other.to_string())),
    }
}

/// Whether `(alpha, beta)` satisfy `alpha ∈ (0,1)` and `beta(1−alpha) − alpha/2 < 0`.
pub fn example1_admissible(alpha: f64, beta: f64) -> bool {
    alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta * (1.0 - alpha) - alpha / 2.0 < 0.0
}

/// `σ(t,x) = (1−t)^β` on `[0,1]`, zero on `(1,2]`; `g(x) = x/|x|^α`; `T = 2`.
pub fn example1_model(alpha: f64, beta: f64) -> Result<CoefficientModel> {
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
    CoefficientModel::builder("example1", 2.0)
        .volatility(
            move |t, _| {
                if t <= 1.0 {
                    (1.0 - t).max(0.0).powf(beta)
                } else {
                    0.0
                }
            },
            |_, _| 0.0,
        )
        .payoff(move |x| example1_payoff(x, alpha))
        .jumps(vec![0.0])
        .lipschitz(1.0)
        .holder(beta.min(1.0), beta.max(1.0))
        .growth(2.0, 1.0)
        .build()
}

/// `x/|x|^α`, with value 0 at the origin.
pub fn example1_payoff(x: f64, alpha: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(1.0 - alpha)
    }
}

/// Wrap `base` with the constant z-coefficient `f₂ ≡ f2` and `f₁ = 0`.
pub fn girsanov_const(base: &CoefficientModel, f2: f64) -> Result<CoefficientModel> {
    if !f2.is_finite() {
        return Err(invalid("f2", f2, "must be finite"));
    }
    let mut m = base.clone();
    m.name = "girsanov_const".to_string();
    m.driver = None;
    m.z_coef = Some(ZCoefficient {
        f2: Arc::new(move |_, _| f2),
        f2_x: Arc::new(|_, _| 0.0),
    });
    m.lipschitz_k = m.lipschitz_k.max(f2.abs());
    Ok(m)
}

/// Absorb the z-linear driver term into the drift: `b̃ = b + f₂σ`, `f₂ ≡ 0`.
pub fn transformed_drift(model: &CoefficientModel) -> CoefficientModel {
    let Some(z) = model.z_coef.clone() else {
        return model.clone();
    };
    let mut m = model.clone();
    let (b, bx) = (model.b.clone(), model.b_x.clone());
    let (s, sx) = (model.sigma.clone(), model.sigma_x.clone());
    let (f2, f2x) = (z.f2.clone(), z.f2_x.clone());
    let (s2, f22) = (s.clone(), f2.clone());
    m.b = Arc::new(move |t, x| b(t, x) + f2(t, x) * s(t, x));
    m.b_x = Arc::new(move |t, x| bx(t, x) + f2x(t, x) * s2(t, x) + f22(t, x) * sx(t, x));
    m.z_coef = None;
    m.lipschitz_k = model.lipschitz_k + model.lipschitz_k * model.lipschitz_k;
    m
}

/// Lower bound `min(T, (eps/c)^{1/α})` for the time window over which σ moves
/// by at most `eps`. Zero for models without a Hölder modulus.
pub fn holder_delta(model: &CoefficientModel, eps: f64) -> f64 {
    match model.holder {
        Some(h) => model.horizon_t.min((eps / h.c).powf(1.0 / h.alpha)),
        None => 0.0,
    }
}

//! Fixtures shared by the criterion benches.

use fbsde_core::{builtin_model, CoefficientModel, ModelSpec, Params, ProblemPoint, TimeGrid};

/// The blow-up model `example1` with `α = 0.8`, `β = 0.5` started at `(0, 0)`.
pub fn example1_fixture(n_steps: usize) -> (CoefficientModel, ProblemPoint, TimeGrid) {
    let model = ModelSpec::new("example1")
        .with("alpha", 0.8)
        .with("beta", 0.5)
        .build()
        .expect("example1 parameters are admissible");
    let point = ProblemPoint::new(0.0, 0.0);
    let grid = TimeGrid::for_model(&model, &point, n_steps).expect("valid grid");
    (model, point, grid)
}

/// A default-parameter built-in model started at `(0, 0)`.
pub fn builtin_fixture(name: &str, n_steps: usize) -> (CoefficientModel, ProblemPoint, TimeGrid) {
    let model = builtin_model(name, &Params::new()).expect("known model");
    let point = ProblemPoint::new(0.0, 0.0);
    let grid = TimeGrid::for_model(&model, &point, n_steps).expect("valid grid");
    (model, point, grid)
}

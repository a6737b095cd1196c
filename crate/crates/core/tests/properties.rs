use fbsde_core::oracles::{bachelier_digital, example1_u, Example1Params};
use fbsde_core::weights::{degenerate_weight, nondegenerate_weight};
use fbsde_core::{
    builtin_model, estimate_ux_weighted, gamma_report, sde::brownian_increments, simulate_path,
    solve_fd, CoefficientModel, FbsdeError, McOptions, ModelSpec, Params, PdeGrid, ProblemPoint,
    TimeGrid, WeightKind, DEFAULT_EPS_SIGMA,
};
use proptest::prelude::*;

fn example1(alpha: f64, beta: f64) -> CoefficientModel {
    ModelSpec::new("example1")
        .with("alpha", alpha)
        .with("beta", beta)
        .build()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn example1_u_is_odd(t in 0.0f64..2.0, x in -4.0f64..4.0, alpha in 0.2f64..0.95) {
        let p = Example1Params::new(alpha, 0.5 * alpha / (2.0 * (1.0 - alpha))).unwrap();
        let a = example1_u(t, x, &p, 64).unwrap();
        let b = example1_u(t, -x, &p, 64).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1.0), "{} {}", a, b);
    }

    #[test]
    fn example1_u_monotone_in_x(t in 0.0f64..0.99, x in -2.0f64..2.0, h in 0.01f64..0.5) {
        let p = Example1Params::new(0.8, 0.5).unwrap();
        prop_assert!(example1_u(t, x + h, &p, 128).unwrap() > example1_u(t, x, &p, 128).unwrap());
    }

    #[test]
    fn increments_reproducible(seed in any::<u64>(), path in 0u64..1_000_000, n in 1usize..64) {
        let a = brownian_increments(seed, path, n, 0.01);
        let b = brownian_increments(seed, path, n, 0.01);
        prop_assert_eq!(&a, &b);
        // a longer run extends the shorter one
        let c = brownian_increments(seed, path, n + 5, 0.01);
        prop_assert_eq!(&a[..], &c[..n]);
    }

    #[test]
    fn power_of_two_constant_weights_match(k in -3i32..3, seed in any::<u64>(), t0 in 0.0f64..0.9, n in 2usize..80) {
        let c = 2f64.powi(k);
        let m = CoefficientModel::builder("const", 1.0)
            .volatility(move |_, _| c, |_, _| 0.0)
            .lipschitz(c.max(1.0))
            .build()
            .unwrap();
        let p = ProblemPoint::new(t0, 0.0);
        let grid = TimeGrid::for_model(&m, &p, n).unwrap();
        let path = simulate_path(&m, &p, grid, seed, 0);
        for r in 1..=n {
            let d = degenerate_weight(&path, r, 0.0).value.unwrap();
            let nd = nondegenerate_weight(&path, r, 0.0).value.unwrap();
            prop_assert_eq!(d.to_bits(), nd.to_bits());
        }
    }

    #[test]
    fn lambda_nondecreasing_and_flow_positive(seed in any::<u64>(), x0 in -2.0f64..2.0) {
        let m = CoefficientModel::builder("xdep", 1.0)
            .volatility(|_, x| 0.5 + 0.3 * x.sin(), |_, x| 0.3 * x.cos())
            .drift(|_, x| -0.5 * x.tanh(), |_, x| -0.5 / x.cosh().powi(2))
            .build()
            .unwrap();
        let p = ProblemPoint::new(0.0, x0);
        let path = simulate_path(&m, &p, TimeGrid::for_model(&m, &p, 50).unwrap(), seed, 3);
        prop_assert!(path.lambda.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(path.grad_x.iter().all(|&g| g > 0.0));
    }

    #[test]
    fn weighted_refuses_exactly_outside_gamma0(t0 in 0.0f64..2.0, x0 in -1.0f64..1.0, which in 0usize..3) {
        let m = match which {
            0 => example1(0.8, 0.5),
            1 => builtin_model("step_vol", &Params::new()).unwrap(),
            _ => builtin_model("indicator_zero_vol", &Params::new()).unwrap(),
        };
        prop_assume!(t0 < m.horizon_t);
        let p = ProblemPoint::new(t0, x0);
        let inside = gamma_report(&m, &p, 100, DEFAULT_EPS_SIGMA).unwrap().in_gamma0;
        let grid = TimeGrid::for_model(&m, &p, 20).unwrap();
        let r = estimate_ux_weighted(&m, &p, grid, 1, 20, None, WeightKind::Degenerate, &McOptions::default());
        prop_assert_eq!(matches!(r, Err(FbsdeError::OutsideGamma0 { .. })), !inside);
    }

    #[test]
    fn fd_maximum_principle(sigma_bar in 0.2f64..2.0, strike in -0.5f64..0.5, which in 0usize..4) {
        let name = ["bachelier_digital", "tanh_smooth", "step_vol", "indicator_zero_vol"][which];
        let mut params = Params::new();
        if which < 3 {
            params.insert("sigma_bar".into(), sigma_bar);
        }
        if which == 0 || which == 2 {
            params.insert("strike".into(), strike);
        }
        let m = builtin_model(name, &params).unwrap();
        let grid = PdeGrid::auto(&m, -3.0, 3.0, 0.05, 0.0).unwrap();
        let sol = solve_fd(&m, &grid).unwrap();
        let g: Vec<f64> = grid.xs().iter().map(|&x| m.g(x)).collect();
        let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(sol.value_range.0 >= lo && sol.value_range.1 <= hi, "{:?} vs [{}, {}]", sol.value_range, lo, hi);
    }
}

#[test]
fn digital_delta_integrates_to_one() {
    for (t, sigma_bar, strike) in [(0.0, 1.0, 0.0), (0.5, 0.3, 1.2), (0.9, 2.0, -0.7)] {
        let s = sigma_bar * f64::sqrt(1.0 - t);
        let (a, b) = (strike - 8.0 * s, strike + 8.0 * s);
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let x = a + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += w * bachelier_digital(t, x, sigma_bar, strike, 1.0).unwrap().1;
        }
        assert!((sum * h - 1.0).abs() < 1e-6, "{}", sum * h);
    }
}

#[test]
fn fd_refinement_on_digital() {
    let m = builtin_model("bachelier_digital", &Params::new()).unwrap();
    let errs: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dx| {
            let grid = PdeGrid::auto(&m, -5.0, 5.0, dx, 0.0).unwrap();
            let sol = solve_fd(&m, &grid).unwrap();
            grid.xs()
                .iter()
                .zip(&sol.table().values()[0])
                .filter(|(x, _)| x.abs() <= 2.0)
                .map(|(x, u)| (u - bachelier_digital(0.0, *x, 1.0, 0.0, 1.0).unwrap().0).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(
        errs[0] / errs[1] >= 1.5 && errs[1] / errs[2] >= 1.5,
        "{errs:?}"
    );
}

#[test]
fn gamma_equivalence_under_constant_girsanov() {
    let spec = ModelSpec::new("girsanov_const")
        .with("f2", 0.5)
        .over(ModelSpec::new("step_vol"));
    let m = spec.build().unwrap();
    let pts = fbsde_core::sample_grid(&m, 20, 20, -2.0, 2.0);
    let r = fbsde_core::check_gamma_equivalence(&m, &pts, 100, DEFAULT_EPS_SIGMA).unwrap();
    assert_eq!(r.agreement_fraction, 1.0);
}

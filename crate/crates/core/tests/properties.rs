use fracdiff::fracquad::{caputo_derivative, rl_derivative, rl_integral, SampledFn, TimeGrid};
use fracdiff::ibvp::{
    solve, BoundaryPath, DerivativeKind, IbvpProblem, InitialData, RobinBC, SolveConfig, TimeData,
};
use fracdiff::laplace::{invert, InversionConfig};
use fracdiff::specfun::{
    delta_mu, mainardi, r_eval, r_laplace, r_partial_a, r_real_integral, r_series, FracIndex,
    RConfig,
};
use fracdiff::stefan::{stefan1_solve, Stefan1Config};
use fracdiff::volterra::{solve_scalar, KernelEntry};
use num_complex::Complex64;
use proptest::prelude::*;

fn mixed(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn routes_agree(mu in 0.0..=1.0f64, nu in 0.1..=0.5f64, a in 0.1..=5.0f64, t in 0.1..=5.0f64) {
        let cfg = RConfig::default();
        let idx = FracIndex::new(mu, nu).unwrap();
        let series = r_series(idx, a, t, &cfg).unwrap().value;
        let laplace = r_laplace(idx, a, t, &cfg.inversion).unwrap();
        let integral = r_real_integral(idx, a, t, &cfg.quad).unwrap();
        prop_assert!(mixed(laplace, series) <= 1e-6, "{laplace} vs {series}");
        prop_assert!((integral - series).abs() <= 1e-6, "{integral} vs {series}");
    }

    #[test]
    fn nonnegative_on_the_diffusive_range(nu in 0.1..=0.5f64, pick in 0usize..4, a in 0.1..=5.0f64, t in 0.1..=5.0f64) {
        let mu = [nu, 2.0 * nu, 1.0 - nu, 1.0][pick];
        let v = r_series(FracIndex::new(mu, nu).unwrap(), a, t, &RConfig::default()).unwrap().value;
        prop_assert!(v >= -1e-12, "{v}");
    }

    #[test]
    fn a_derivative_matches_differences(nu in 0.1..=0.5f64, extra in 0.0..=0.5f64, a in 0.3..=4.0f64, t in 0.2..=4.0f64) {
        let cfg = RConfig::default();
        let idx = FracIndex::new(nu + extra, nu).unwrap();
        let step = 1e-5 * a;
        let fd = (r_eval(idx, a + step, t, &cfg).unwrap() - r_eval(idx, a - step, t, &cfg).unwrap()) / (2.0 * step);
        let exact = r_partial_a(idx, a, t, &cfg).unwrap();
        prop_assert!((exact - fd).abs() <= 1e-5 * exact.abs().max(1e-3), "{exact} vs {fd}");
    }

    #[test]
    fn mainardi_relation(nu in 0.1..=0.5f64, a in 0.1..=4.0f64, t in 0.2..=4.0f64) {
        let cfg = RConfig::default();
        let lhs = mainardi(a * t.powf(-nu), nu, &cfg.series).unwrap();
        let rhs = t.powf(nu) * r_eval(FracIndex::new(1.0 - nu, nu).unwrap(), a, t, &cfg).unwrap();
        prop_assert!(mixed(lhs, rhs) <= 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn small_a_limit(mu in 0.2..=1.5f64, nu in 0.1..=0.5f64, t in 0.2..=4.0f64) {
        let v = r_eval(FracIndex::new(mu, nu).unwrap(), 1e-6, t, &RConfig::default()).unwrap();
        prop_assert!(rel(v, delta_mu(mu, t).unwrap()) <= 1e-4);
    }

    #[test]
    fn inversion_is_linear(alpha in -3.0..3.0f64, beta in -3.0..3.0f64, t in 0.1..=5.0f64) {
        let cfg = InversionConfig::default();
        let f = |s: Complex64| 1.0 / (s + 1.0);
        let g = |s: Complex64| 1.0 / ((s + 2.0) * (s + 2.0));
        let exact = alpha * (-t).exp() + beta * t * (-2.0 * t).exp();
        let combined = invert(|s| alpha * f(s) + beta * g(s), t, &cfg);
        // A combination that cancels to nothing is rejected by the precision guard.
        if let Ok(v) = combined {
            let parts = alpha * invert(f, t, &cfg).unwrap() + beta * invert(g, t, &cfg).unwrap();
            prop_assert!((v - parts).abs() <= 1e-12 * (alpha.abs() + beta.abs()).max(1.0));
            prop_assert!((v - exact).abs() <= 1e-9);
        }
    }
}

fn grid() -> TimeGrid {
    TimeGrid::new(2.0, 128).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fractional_operators_are_linear(alpha in -2.0..2.0f64, beta in -2.0..2.0f64, mu in 0.1..0.9f64) {
        let g = grid();
        let f = SampledFn::from_fn(g, |t| (2.0 * t).sin() + 0.3);
        let h = SampledFn::from_fn(g, |t| t * t - t);
        let combo = SampledFn::from_fn(g, |t| alpha * ((2.0 * t).sin() + 0.3) + beta * (t * t - t));
        let ops: [fn(&SampledFn, f64) -> fracdiff::Result<SampledFn>; 3] =
            [rl_integral, caputo_derivative, rl_derivative];
        for op in ops {
            let lhs = op(&combo, mu).unwrap();
            let rhs = &(&op(&f, mu).unwrap() * alpha) + &(&op(&h, mu).unwrap() * beta);
            for k in 1..g.len() {
                let scale = lhs.value(k).abs().max(1.0);
                prop_assert!((lhs.value(k) - rhs.value(k)).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn integer_order_is_the_trapezoid_rule(c in -2.0..2.0f64) {
        let g = grid();
        let f = SampledFn::from_fn(g, |t| c * t.cos() + t);
        let out = rl_integral(&f, 1.0).unwrap();
        let h = g.step();
        let mut acc = 0.0;
        for k in 1..g.len() {
            acc += 0.5 * h * (f.value(k - 1) + f.value(k));
            prop_assert!((out.value(k) - acc).abs() <= 1e-12 * acc.abs().max(1.0));
        }
    }

    #[test]
    fn semigroup(first in 0.1..0.9f64, second in 0.1..0.9f64) {
        // The composed rule sees a t^order start, so the gap closes like h^(first+second).
        let gap = |n| {
            let g = TimeGrid::new(2.0, n).unwrap();
            let f = SampledFn::from_fn(g, |t| 1.0 + t * t);
            let twice = rl_integral(&rl_integral(&f, first).unwrap(), second).unwrap();
            (&twice - &rl_integral(&f, first + second).unwrap()).max_abs()
        };
        let (coarse, fine) = (gap(64), gap(256));
        let rate = 0.9 * (first + second).min(1.5);
        prop_assert!(fine <= coarse * 4f64.powf(-rate), "{coarse} -> {fine}");
    }

    #[test]
    fn caputo_and_rl_differ_by_the_initial_value(c in -2.0..2.0f64, mu in 0.1..0.9f64) {
        let g = grid();
        let f = SampledFn::from_fn(g, |t| c + t + 0.5 * t * t);
        let rl = rl_derivative(&f, mu).unwrap();
        let caputo = caputo_derivative(&f, mu).unwrap();
        for (k, t) in g.nodes().enumerate().skip(8) {
            let gap = rl.value(k) - caputo.value(k) - c * delta_mu(1.0 - mu, t).unwrap();
            prop_assert!(gap.abs() <= 5e-3, "t = {t}: {gap}");
        }
    }

    #[test]
    fn volterra_solution_is_linear_in_the_data(alpha in -2.0..2.0f64, beta in -2.0..2.0f64, nu in 0.15..0.5f64) {
        let g = TimeGrid::new(1.0, 64).unwrap();
        let e = 2.0 * nu - 1.0;
        let kernel = KernelEntry::singular(e, move |t, tau| Ok((1.0 + 0.2 * tau) * (t - tau).powf(e)));
        let h1 = SampledFn::from_fn(g, |t| t);
        let h2 = SampledFn::from_fn(g, |t| t * t + 0.5 * t);
        let combo = SampledFn::from_fn(g, |t| alpha * t + beta * (t * t + 0.5 * t));
        let (p1, _) = solve_scalar(&kernel, &h1, &g).unwrap();
        let (p2, _) = solve_scalar(&kernel, &h2, &g).unwrap();
        let (pc, _) = solve_scalar(&kernel, &combo, &g).unwrap();
        for k in 1..g.len() {
            let want = alpha * p1.value(k) + beta * p2.value(k);
            prop_assert!((pc.value(k) - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }
}

fn half_line(kind: DerivativeKind, nu: f64, g: f64, f: f64) -> IbvpProblem {
    IbvpProblem {
        kind,
        nu,
        kappa: 1.0,
        left: RobinBC::dirichlet(TimeData::constant(g)),
        right: RobinBC::dirichlet(TimeData::constant(0.0)),
        left_path: BoundaryPath::constant(0.0),
        right_path: BoundaryPath::PlusInfinity,
        initial: InitialData::Constant(f),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn caputo_equals_rl_at_one_half(g in -2.0..2.0f64, f in -2.0..2.0f64, x in 0.05..3.0f64, t in 0.1..1.0f64) {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let cfg = SolveConfig::default();
        let c = solve(&half_line(DerivativeKind::Caputo, 0.5, g, f), &grid, &cfg).unwrap();
        let r = solve(&half_line(DerivativeKind::RiemannLiouville, 0.5, g, f), &grid, &cfg).unwrap();
        prop_assert!((c.eval_u(x, t).unwrap() - r.eval_u(x, t).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn flux_matches_differences(nu in 0.2..=0.5f64, g in 0.5..2.0f64, x in 0.2..2.0f64, t in 0.2..1.0f64) {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let s = solve(&half_line(DerivativeKind::Caputo, nu, g, 0.0), &grid, &SolveConfig::default()).unwrap();
        let dx = 1e-5;
        let fd = (s.eval_u(x + dx, t).unwrap() - s.eval_u(x - dx, t).unwrap()) / (2.0 * dx);
        let ux = s.eval_ux(x, t).unwrap();
        prop_assert!((ux - fd).abs() <= 1e-4 * ux.abs().max(1e-2), "{ux} vs {fd}");
    }

    #[test]
    fn similarity_solution_identities(nu in 0.2..=0.5f64, r in 0.3..3.0f64) {
        let s = stefan1_solve(DerivativeKind::Caputo, nu, r, &Stefan1Config::default()).unwrap();
        prop_assert!(rel(s.eta(4.0) / s.eta(1.0), 4f64.powf(nu)) <= 1e-14);
        for res in s.residuals(&[0.5, 1.0, 2.0]).unwrap() {
            prop_assert!(res.boundary.abs() <= 1e-10 && res.stefan.abs() <= 1e-10);
        }
    }
}

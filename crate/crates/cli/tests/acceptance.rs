//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use fracdiff::fracquad::{residual_int_eq, residual_ode, TimeGrid};
use fracdiff::ibvp::{
    solve, BoundaryPath, DerivativeKind, IbvpProblem, InitialData, RobinBC, SolveConfig, TimeData,
};
use fracdiff::specfun::{
    delta_mu, erf, erfc, r_eval, r_laplace, r_line_integral_check, r_partial_a, r_real_integral,
    r_series, r_tail_integral_check, FracIndex, RConfig,
};
use fracdiff::stefan::{
    rl_ansatz_check, stefan1_alpha, stefan1_solve, stefan2_solve, Stefan1Config, Stefan2Config,
    Stefan2State,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<(bool, String), fracdiff::Error>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

fn mixed(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

/// Gaussian and erfc forms at ν = 1/2.
fn half_order(mu: f64, a: f64, t: f64) -> f64 {
    let gauss = (-a * a / (4.0 * t)).exp();
    match mu {
        0.0 => a * gauss / (2.0 * (PI * t.powi(3)).sqrt()),
        0.5 => gauss / (PI * t).sqrt(),
        _ => erfc(a / (2.0 * t.sqrt())),
    }
}

fn closed_forms() -> Outcome {
    let cfg = RConfig::default();
    let mut rng = StdRng::seed_from_u64(20240917);
    let (mut series, mut laplace) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let a = rng.random_range(0.1..=5.0);
        let t = rng.random_range(0.1..=5.0);
        for mu in [0.0, 0.5, 1.0] {
            let idx = FracIndex::new(mu, 0.5)?;
            let want = half_order(mu, a, t);
            series = series.max(rel(r_series(idx, a, t, &cfg)?.value, want));
            laplace = laplace.max(rel(r_laplace(idx, a, t, &cfg.inversion)?, want));
        }
    }
    Ok((
        series <= 1e-8 && laplace <= 1e-8,
        format!("max rel error series {series:.2e}, laplace {laplace:.2e} (tol 1e-8)"),
    ))
}

fn cross_routes() -> Outcome {
    let cfg = RConfig::default();
    let quad = cfg.quad;
    let (mut worst, mut strict) = (0.0f64, 0.0f64);
    for mu in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for nu in [0.1, 0.25, 0.4, 0.5] {
            let idx = FracIndex::new(mu, nu)?;
            for a in [0.2, 1.0, 2.5, 5.0] {
                for t in [0.1, 0.5, 1.0, 5.0] {
                    let mut values = vec![
                        r_series(idx, a, t, &cfg)?.value,
                        r_laplace(idx, a, t, &cfg.inversion)?,
                        r_real_integral(idx, a, t, &quad)?,
                    ];
                    if nu == 0.5 && [0.0, 0.5, 1.0].contains(&mu) {
                        values.push(half_order(mu, a, t));
                    }
                    for x in &values[1..] {
                        worst = worst.max(mixed(*x, values[0]));
                        strict = strict.max(rel(*x, values[0]));
                    }
                }
            }
        }
    }
    Ok((
        worst <= 1e-6,
        format!("max disagreement {worst:.2e} (tol 1e-6); strict relative {strict:.2e}"),
    ))
}

fn max_finite(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0, |m, v| m.max(v.abs()))
}

fn identity_residuals() -> Outcome {
    let cfg = RConfig::default();
    let (a, t_end) = (4.0, 2.0);
    let mut lowest = f64::INFINITY;
    for nu in [0.25, 0.4] {
        for mu in [nu, 1.0 - nu, 1.0] {
            let idx = FracIndex::new(mu, nu)?;
            let coarse = TimeGrid::new(t_end, 128)?;
            let fine = TimeGrid::new(t_end, 256)?;
            let int_eq = max_finite(residual_int_eq(idx, a, &coarse, &cfg)?.values())
                / max_finite(residual_int_eq(idx, a, &fine, &cfg)?.values());
            let ode = max_finite(residual_ode(idx, a, &coarse, &cfg)?.values())
                / max_finite(residual_ode(idx, a, &fine, &cfg)?.values());
            lowest = lowest.min(int_eq).min(ode);
        }
    }
    Ok((
        lowest >= 2.5,
        format!("smallest reduction factor {lowest:.3} (need 2.5)"),
    ))
}

fn propositions() -> Outcome {
    let cfg = RConfig::default();
    let (mut deriv, mut small, mut line, mut tail) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (mu, nu) in [(0.5, 0.25), (1.0, 0.4), (0.8, 0.5), (0.4, 0.4)] {
        let idx = FracIndex::new(mu, nu)?;
        for (a, t) in [(0.5, 1.0), (1.5, 2.0), (3.0, 0.7)] {
            let step = 1e-5 * a;
            let fd =
                (r_eval(idx, a + step, t, &cfg)? - r_eval(idx, a - step, t, &cfg)?) / (2.0 * step);
            deriv = deriv.max(rel(r_partial_a(idx, a, t, &cfg)?, fd));
            tail = tail.max(r_tail_integral_check(idx, a, t, &cfg)?.abs_diff());
        }
        for t in [0.5, 1.0, 3.0] {
            small = small.max(rel(r_eval(idx, 1e-6, t, &cfg)?, delta_mu(mu, t)?));
            line = line.max(r_line_integral_check(idx, t, &cfg)?.abs_diff());
        }
    }
    Ok((
        deriv <= 1e-5 && small <= 1e-4 && line <= 1e-4 && tail <= 1e-5,
        format!(
            "a-derivative {deriv:.2e}, small a {small:.2e}, line integral {line:.2e}, tail integral {tail:.2e}"
        ),
    ))
}

fn half_line(kind: DerivativeKind) -> IbvpProblem {
    IbvpProblem {
        kind,
        nu: 0.5,
        kappa: 1.0,
        left: RobinBC::dirichlet(TimeData::constant(1.0)),
        right: RobinBC::dirichlet(TimeData::constant(0.0)),
        left_path: BoundaryPath::constant(0.0),
        right_path: BoundaryPath::PlusInfinity,
        initial: InitialData::Constant(0.0),
    }
}

/// Max error against erfc and max Caputo/RL gap on the 20×10 sample grid.
fn half_line_errors(symbolic: bool) -> Result<(f64, f64), fracdiff::Error> {
    let grid = TimeGrid::new(1.0, 256)?;
    let cfg = SolveConfig {
        symbolic,
        r: RConfig::default(),
    };
    let caputo = solve(&half_line(DerivativeKind::Caputo), &grid, &cfg)?;
    let rl = solve(&half_line(DerivativeKind::RiemannLiouville), &grid, &cfg)?;
    let (mut err, mut gap) = (0.0f64, 0.0f64);
    for i in 1..=20 {
        let x = 0.15 * i as f64;
        for j in 1..=10 {
            let t = 0.1 * j as f64;
            let u = caputo.eval_u(x, t)?;
            err = err.max((u - erfc(x / (2.0 * t.sqrt()))).abs());
            gap = gap.max((u - rl.eval_u(x, t)?).abs());
        }
    }
    Ok((err, gap))
}

fn ibvp_classical() -> Outcome {
    let (err, gap) = half_line_errors(true)?;
    // The purely numerical path smears the Dirac density over one panel.
    let (numeric, numeric_gap) = half_line_errors(false)?;
    Ok((
        err <= 1e-3 && gap <= 1e-6,
        format!(
            "max error {err:.2e} (tol 1e-3), Caputo vs RL {gap:.2e} (tol 1e-6); \
             numeric-only path {numeric:.2e}, gap {numeric_gap:.2e}"
        ),
    ))
}

fn neumann() -> Outcome {
    let cfg = Stefan1Config::default();
    let alpha = stefan1_alpha(0.5, 1.0, &cfg)?;
    let g = |a: f64| PI.sqrt() * a * erf(a) * (a * a).exp() - 1.0;
    let (mut lo, mut hi) = (0.01, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let sol = stefan1_solve(DerivativeKind::Caputo, 0.5, 1.0, &cfg)?;
    let mut field = 0.0f64;
    for j in 1..=10 {
        let t = 0.2 * j as f64;
        for i in 0..10 {
            let x = sol.eta(t) * i as f64 / 10.0;
            let want = 1.0 - erf(x / (2.0 * t.sqrt())) / erf(alpha);
            field = field.max((sol.eval_u(x, t)? - want).abs() / want.abs().max(1e-3));
        }
    }
    Ok((
        (alpha - 0.620063).abs() <= 1e-4 && (alpha - oracle).abs() <= 1e-4 && field <= 1e-10,
        format!("alpha {alpha:.10} vs oracle {oracle:.10}; field error {field:.2e} (tol 1e-10)"),
    ))
}

fn stefan_identities() -> Outcome {
    let mut worst = 0.0f64;
    for nu in [0.25, 0.3, 0.4] {
        let sol = stefan1_solve(DerivativeKind::Caputo, nu, 1.0, &Stefan1Config::default())?;
        for r in sol.residuals(&[0.5, 1.0, 2.0])? {
            worst = worst.max(r.boundary.abs()).max(r.stefan.abs());
        }
    }
    Ok((
        worst <= 1e-10,
        format!("max residual {worst:.2e} (tol 1e-10)"),
    ))
}

fn rl_exclusion() -> Outcome {
    let sol = stefan1_solve(DerivativeKind::Caputo, 0.3, 1.0, &Stefan1Config::default())?;
    let report = rl_ansatz_check(
        0.3,
        sol.alpha,
        sol.u0,
        &[0.5, 1.0, 2.0, 4.0],
        &RConfig::default(),
    )?;
    Ok((
        report.spread > 1e-3,
        format!("spread {:.3e} (need > 1e-3)", report.spread),
    ))
}

fn march(kind: DerivativeKind, n: usize) -> Result<Stefan2State, fracdiff::Error> {
    stefan2_solve(
        kind,
        0.5,
        1.0,
        TimeGrid::new(1.0, n)?,
        &Stefan2Config::default(),
    )
}

/// Max gap between two trajectories on the coarser one's nodes.
fn trajectory_gap(coarse: &Stefan2State, fine: &Stefan2State) -> f64 {
    let stride = fine.grid.n_steps() / coarse.grid.n_steps();
    coarse
        .eta
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| (v - fine.eta.value(k * stride)).abs())
        .fold(0.0, f64::max)
}

fn example_two() -> Outcome {
    let tol = Stefan2Config::default().tolerance;
    let runs = [64, 128, 256]
        .iter()
        .map(|&n| march(DerivativeKind::Caputo, n))
        .collect::<Result<Vec<_>, _>>()?;
    let rl = march(DerivativeKind::RiemannLiouville, 256)?;
    let coincide = trajectory_gap(&runs[2], &rl);
    let ratio = trajectory_gap(&runs[0], &runs[1]) / trajectory_gap(&runs[1], &runs[2]);
    let residual = runs
        .iter()
        .chain([&rl])
        .map(|s| s.max_residual())
        .fold(0.0, f64::max);
    Ok((
        coincide <= 5.0 * tol && ratio >= 1.5 && residual <= 1e-8,
        format!(
            "Caputo vs RL {coincide:.2e} (tol {:.0e}), convergence ratio {ratio:.3} (need 1.5), residual {residual:.2e} (tol 1e-8)",
            5.0 * tol
        ),
    ))
}

fn figure_demo() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_fracdiff"))
        .args([
            "profiles",
            "--nu",
            "0.3,0.4,0.5",
            "--a",
            "2.5",
            "--t-end",
            "5",
            "--points",
            "200",
        ])
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|f| f.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    let finite = rows.iter().all(|r| r.iter().all(|v| v.is_finite()));
    // Six profiles (two per ν), each rising then decaying.
    let smooth = rows.chunks(200).all(|p| {
        let slopes: Vec<f64> = p.windows(2).map(|w| w[1][4] - w[0][4]).collect();
        slopes.windows(2).filter(|s| s[0] * s[1] < 0.0).count() <= 1
    });
    Ok((
        out.status.success() && rows.len() == 1200 && finite && smooth,
        format!("{} rows, finite {finite}, unimodal {smooth}", rows.len()),
    ))
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        name: "closed-form recovery",
        budget: Duration::from_secs(5),
        run: closed_forms,
    },
    Criterion {
        id: 2,
        name: "cross-route consistency",
        budget: Duration::from_secs(30),
        run: cross_routes,
    },
    Criterion {
        id: 3,
        name: "identity residuals",
        budget: Duration::from_secs(60),
        run: identity_residuals,
    },
    Criterion {
        id: 4,
        name: "propositions",
        budget: Duration::from_secs(30),
        run: propositions,
    },
    Criterion {
        id: 5,
        name: "IBVP classical limit",
        budget: Duration::from_secs(60),
        run: ibvp_classical,
    },
    Criterion {
        id: 6,
        name: "Neumann constant",
        budget: Duration::from_secs(5),
        run: neumann,
    },
    Criterion {
        id: 7,
        name: "fractional Stefan identities",
        budget: Duration::from_secs(10),
        run: stefan_identities,
    },
    Criterion {
        id: 8,
        name: "RL ansatz exclusion",
        budget: Duration::from_secs(2),
        run: rl_exclusion,
    },
    Criterion {
        id: 9,
        name: "moving boundary march",
        budget: Duration::from_secs(120),
        run: example_two,
    },
    Criterion {
        id: 10,
        name: "R profile demo",
        budget: Duration::from_secs(30),
        run: figure_demo,
    },
];

fn main() {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let (ok, detail) = (c.run)().unwrap_or_else(|e| (false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let status = if ok && in_time { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {:>2} {}: {detail}; {:.2} s of {} s",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
        if status == "FAIL" {
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

//! Self-checks of every module against closed forms and identities,
//! reported one line per check in TAP form.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::fracquad::{residual_int_eq, rl_integral, sample_r_profile, SampledFn, TimeGrid};
use crate::ibvp::{
    solve, BoundaryPath, DerivativeKind, IbvpProblem, InitialData, RobinBC, SolveConfig, TimeData,
};
use crate::pulse::PulseSeries;
use crate::quad::QuadConfig;
use crate::specfun::{
    delta_mu, erfc, mainardi, r_closed_form_half, r_eval, r_laplace, r_line_integral_check,
    r_partial_a, r_real_integral, r_series, r_tail_integral_check, rgamma, wright, FracIndex,
    RConfig,
};
use crate::stefan::{
    rl_ansatz_check, stefan1_alpha, stefan1_solve, stefan2_solve, Stefan1Config, Stefan2Config,
};
use crate::volterra::{abel_invert_pulses, solve_first_kind, KernelEntry, KernelMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Specfun,
    Fracquad,
    Volterra,
    Ibvp,
    Stefan,
    All,
}

impl Suite {
    const MODULES: [Suite; 5] = [
        Suite::Specfun,
        Suite::Fracquad,
        Suite::Volterra,
        Suite::Ibvp,
        Suite::Stefan,
    ];

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::MODULES.to_vec(),
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "specfun" => Suite::Specfun,
            "fracquad" => Suite::Fracquad,
            "volterra" => Suite::Volterra,
            "ibvp" => Suite::Ibvp,
            "stefan" => Suite::Stefan,
            "all" => Suite::All,
            other => return domain(format!("unknown suite '{other}'")),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Specfun => "specfun",
            Suite::Fracquad => "fracquad",
            Suite::Volterra => "volterra",
            Suite::Ibvp => "ibvp",
            Suite::Stefan => "stefan",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_tap(&self) -> String {
        let mut out = format!("TAP version 13\n1..{}\n", self.checks.len());
        for (i, c) in self.checks.iter().enumerate() {
            let status = if c.passed { "ok" } else { "not ok" };
            out += &format!(
                "{status} {} - {}: {} # {}\n",
                i + 1,
                c.suite,
                c.name,
                c.detail
            );
        }
        out
    }
}

/// An evaluator of R_{μ,ν}(a, t).
pub type RSource = Arc<dyn Fn(FracIndex, f64, f64) -> Result<f64> + Send + Sync>;

/// Outcome of one check: pass flag and a short measurement.
type Outcome = Result<(bool, String)>;

fn within(err: f64, tol: f64) -> (bool, String) {
    (
        err <= tol,
        format!("max error {err:.3e} (tolerance {tol:.0e})"),
    )
}

fn mixed(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

pub struct Verifier {
    cfg: RConfig,
    laplace: RSource,
}

impl Default for Verifier {
    fn default() -> Self {
        let cfg = RConfig::default();
        Self {
            cfg,
            laplace: Arc::new(move |idx, a, t| r_laplace(idx, a, t, &cfg.inversion)),
        }
    }
}

impl Verifier {
    /// Replaces the Laplace-inversion route used by the specfun checks.
    pub fn with_laplace_route(mut self, laplace: RSource) -> Self {
        self.laplace = laplace;
        self
    }

    pub fn run(&self, suite: Suite) -> Report {
        let mut checks = Vec::new();
        for s in suite.members() {
            for (name, check) in self.checks(s) {
                let (passed, detail) =
                    check(self).unwrap_or_else(|e| (false, format!("error: {e}")));
                checks.push(Check {
                    suite: s,
                    name,
                    passed,
                    detail,
                });
            }
        }
        Report { checks }
    }

    #[allow(clippy::type_complexity)]
    fn checks(&self, suite: Suite) -> Vec<(&'static str, fn(&Self) -> Outcome)> {
        match suite {
            Suite::Specfun => vec![
                ("closed forms at nu = 1/2", Self::closed_forms),
                ("Wright special values", Self::wright_special),
                ("cross-route agreement", Self::cross_routes),
                ("a-derivative", Self::partial_a),
                ("small-a limit", Self::small_a),
                ("line integral", Self::line_integral),
                ("tail integral", Self::tail_integral),
                ("Mainardi relation", Self::mainardi_relation),
                ("vanishes as t -> 0+", Self::small_t),
                ("non-negativity", Self::non_negative),
            ],
            Suite::Fracquad => vec![
                ("integral of a line", Self::integral_of_line),
                ("integral of R", Self::semigroup),
                ("integral-equation residual", Self::int_eq_residual),
            ],
            Suite::Volterra => vec![
                ("Abel pulses", Self::abel_pulses),
                ("Abel equation", Self::abel_equation),
            ],
            Suite::Ibvp => vec![
                ("classical half line", Self::classical_half_line),
                ("Caputo and RL coincide at nu = 1/2", Self::ibvp_coincidence),
                ("pure initial-value problem", Self::pure_ivp),
            ],
            Suite::Stefan => vec![
                ("Neumann constant", Self::neumann),
                ("similarity residuals", Self::stefan_residuals),
                ("RL ansatz exclusion", Self::rl_exclusion),
                (
                    "marching Caputo and RL coincide at nu = 1/2",
                    Self::stefan2_coincidence,
                ),
            ],
            Suite::All => Vec::new(),
        }
    }

    fn closed_forms(&self) -> Outcome {
        let mut worst: f64 = 0.0;
        for (a, t) in [(0.5, 0.3), (1.0, 1.0), (2.0, 1.5), (3.5, 4.0)] {
            for mu in [0.0, 0.5, 1.0] {
                let idx = FracIndex::new(mu, 0.5)?;
                let want = r_closed_form_half(mu, a, t)?;
                let series = r_series(idx, a, t, &self.cfg)?.value;
                let laplace = (self.laplace)(idx, a, t)?;
                worst = worst.max(rel(series, want)).max(rel(laplace, want));
            }
        }
        Ok(within(worst, 1e-8))
    }

    fn wright_special(&self) -> Outcome {
        let pi = std::f64::consts::PI;
        let a = wright(-2.0, -0.5, 0.5, &self.cfg.series)?;
        let b = wright(-2.0, -0.5, 1.0, &self.cfg.series)?;
        let err = rel(a, (-1f64).exp() / pi.sqrt()).max(rel(b, erfc(1.0)));
        Ok(within(err, 1e-12))
    }

    fn cross_routes(&self) -> Outcome {
        let quad = QuadConfig::with_tolerances(1e-12, 1e-10);
        let mut worst: f64 = 0.0;
        for nu in [0.25, 0.4] {
            for mu in [0.0, 0.5, 1.0] {
                let idx = FracIndex::new(mu, nu)?;
                for (a, t) in [(0.5, 0.5), (2.0, 2.0), (1.0, 0.2)] {
                    let series = r_series(idx, a, t, &self.cfg)?.value;
                    let laplace = (self.laplace)(idx, a, t)?;
                    let integral = r_real_integral(idx, a, t, &quad)?;
                    worst = worst
                        .max(mixed(laplace, series))
                        .max(mixed(integral, series));
                }
            }
        }
        Ok(within(worst, 1e-6))
    }

    fn partial_a(&self) -> Outcome {
        let mut worst: f64 = 0.0;
        for (mu, nu, a, t) in [
            (1.0, 0.4, 1.0, 1.0),
            (0.6, 0.3, 0.5, 2.0),
            (0.3, 0.3, 2.0, 1.0),
        ] {
            let idx = FracIndex::new(mu, nu)?;
            let step = 1e-5;
            let fd = (r_eval(idx, a + step, t, &self.cfg)? - r_eval(idx, a - step, t, &self.cfg)?)
                / (2.0 * step);
            worst = worst.max(rel(r_partial_a(idx, a, t, &self.cfg)?, fd));
        }
        Ok(within(worst, 1e-5))
    }

    fn small_a(&self) -> Outcome {
        let mut worst: f64 = 0.0;
        for (mu, nu, t) in [(0.5, 0.3, 1.0), (1.0, 0.25, 2.0), (1.5, 0.5, 1.0)] {
            let idx = FracIndex::new(mu, nu)?;
            worst = worst.max(rel(r_eval(idx, 1e-6, t, &self.cfg)?, delta_mu(mu, t)?));
        }
        Ok(within(worst, 1e-4))
    }

    fn line_integral(&self) -> Outcome {
        let mut worst: f64 = 0.0;
        for (mu, nu, t) in [(0.5, 0.5, 1.0), (0.2, 0.3, 2.0), (1.0, 0.4, 1.0)] {
            worst =
                worst.max(r_line_integral_check(FracIndex::new(mu, nu)?, t, &self.cfg)?.abs_diff());
        }
        Ok(within(worst, 1e-4))
    }

    fn tail_integral(&self) -> Outcome {
        let mut worst: f64 = 0.0;
        for (mu, nu, a, t) in [
            (0.5, 0.5, 1.0, 1.0),
            (0.3, 0.3, 2.0, 1.0),
            (1.0, 0.4, 0.5, 2.0),
        ] {
            worst = worst
                .max(r_tail_integral_check(FracIndex::new(mu, nu)?, a, t, &self.cfg)?.abs_diff());
        }
        Ok(within(worst, 1e-5))
    }

    fn mainardi_relation(&self) -> Outcome {
        let mut worst: f64 = 0.0;
        for (nu, a, t) in [(0.25f64, 1.0, 1.0f64), (0.4, 0.7, 2.0), (0.5, 2.0, 0.5)] {
            let lhs = mainardi(a * t.powf(-nu), nu, &self.cfg.series)?;
            let rhs = t.powf(nu) * r_eval(FracIndex::new(1.0 - nu, nu)?, a, t, &self.cfg)?;
            worst = worst.max(rel(lhs, rhs));
        }
        Ok(within(worst, 1e-8))
    }

    fn small_t(&self) -> Outcome {
        let mut worst: f64 = 0.0;
        for nu in [0.25, 0.4, 0.5] {
            for mu in [0.0, 0.5, 1.0] {
                worst = worst.max(r_eval(FracIndex::new(mu, nu)?, 1.0, 1e-6, &self.cfg)?.abs());
            }
        }
        Ok(within(worst, 1e-12))
    }

    fn non_negative(&self) -> Outcome {
        let mut lowest = f64::INFINITY;
        for nu in [0.1, 0.25, 0.4] {
            for mu in [nu, 2.0 * nu, 1.0 - nu, 1.0] {
                let idx = FracIndex::new(mu, nu)?;
                for a in [0.1, 1.0, 3.0, 5.0] {
                    for t in [0.1, 1.0, 5.0] {
                        lowest = lowest.min(r_series(idx, a, t, &self.cfg)?.value);
                    }
                }
            }
        }
        Ok((lowest >= -1e-12, format!("smallest value {lowest:.3e}")))
    }

    fn integral_of_line(&self) -> Outcome {
        let grid = TimeGrid::new(2.0, 64)?;
        let mu = 0.35;
        let out = rl_integral(&SampledFn::from_fn(grid, |t| t), mu)?;
        let err = grid
            .nodes()
            .zip(out.values())
            .map(|(t, v)| (v - t.powf(1.0 + mu) * rgamma(2.0 + mu)).abs())
            .fold(0.0, f64::max);
        Ok(within(err, 1e-12))
    }

    fn semigroup(&self) -> Outcome {
        let (nu, mu, a) = (0.4, 0.6, 1.0);
        let base = FracIndex::new(0.3, nu)?;
        let target = FracIndex::new(0.3 + mu, nu)?;
        let errs = [64, 128]
            .iter()
            .map(|&n| {
                let grid = TimeGrid::new(2.0, n)?;
                let out = rl_integral(&sample_r_profile(base, a, &grid, &self.cfg)?, mu)?;
                let exact = sample_r_profile(target, a, &grid, &self.cfg)?;
                Ok((&out - &exact).max_abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((
            errs[1] < 0.5 * errs[0] && errs[1] < 5e-3,
            format!("errors {:.3e} -> {:.3e}", errs[0], errs[1]),
        ))
    }

    fn int_eq_residual(&self) -> Outcome {
        let idx = FracIndex::new(1.0, 0.4)?;
        let norms = [128, 256]
            .iter()
            .map(|&n| Ok(residual_int_eq(idx, 4.0, &TimeGrid::new(2.0, n)?, &self.cfg)?.max_abs()))
            .collect::<Result<Vec<f64>>>()?;
        let ratio = norms[0] / norms[1];
        Ok((ratio >= 2.5, format!("residual ratio {ratio:.3}")))
    }

    fn abel_pulses(&self) -> Outcome {
        let g = PulseSeries::single(2.6, 1.0)?;
        let p = abel_invert_pulses(&g, 0.6)?;
        let ok = p.terms().len() == 1 && (p.terms()[0].order - 0.4).abs() < 1e-15;
        Ok((ok, format!("{:?}", p.terms())))
    }

    fn abel_equation(&self) -> Outcome {
        // ∫ ½δ_{2ν}(t−τ) φ dτ = t has φ = 2δ_{2−2ν}.
        let nu = 0.3;
        let grid = TimeGrid::new(1.0, 128)?;
        let h = SampledFn::from_fn(grid, |t| t);
        let zero = SampledFn::from_fn(grid, |_| 0.0);
        let half_pulse = 0.5 * rgamma(2.0 * nu);
        let k = KernelMatrix::new(
            KernelEntry::singular(2.0 * nu - 1.0, move |t, tau| {
                Ok(half_pulse * (t - tau).powf(2.0 * nu - 1.0))
            }),
            KernelEntry::Zero,
            KernelEntry::Zero,
            KernelEntry::Dirac(1.0),
        );
        let s = solve_first_kind(&k, &h, &zero, &grid)?;
        let err = (grid.len() / 10..grid.len())
            .map(|n| {
                (s.phi_minus.value(n)
                    - 2.0 * delta_mu(2.0 - 2.0 * nu, grid.node(n)).unwrap_or(f64::NAN))
                .abs()
            })
            .fold(0.0, f64::max);
        Ok(within(err, 2e-2))
    }

    fn half_line(kind: DerivativeKind, nu: f64) -> IbvpProblem {
        IbvpProblem {
            kind,
            nu,
            kappa: 1.0,
            left: RobinBC::dirichlet(TimeData::constant(1.0)),
            right: RobinBC::dirichlet(TimeData::constant(0.0)),
            left_path: BoundaryPath::constant(0.0),
            right_path: BoundaryPath::PlusInfinity,
            initial: InitialData::Constant(0.0),
        }
    }

    fn classical_half_line(&self) -> Outcome {
        let p = Self::half_line(DerivativeKind::Caputo, 0.5);
        let grid = TimeGrid::new(1.0, 64)?;
        let cfg = SolveConfig {
            symbolic: false,
            r: self.cfg,
        };
        let s = solve(&p, &grid, &cfg)?;
        let mut worst: f64 = 0.0;
        for x in [0.1, 0.5, 1.0, 2.0] {
            for t in [0.25, 0.5, 1.0] {
                worst = worst.max((s.eval_u(x, t)? - erfc(x / (2.0 * f64::sqrt(t)))).abs());
            }
        }
        Ok(within(worst, 1e-2))
    }

    fn ibvp_coincidence(&self) -> Outcome {
        let grid = TimeGrid::new(1.0, 32)?;
        let cfg = SolveConfig {
            symbolic: true,
            r: self.cfg,
        };
        let mut c = Self::half_line(DerivativeKind::Caputo, 0.5);
        c.initial = InitialData::Constant(0.3);
        let mut r = c.clone();
        r.kind = DerivativeKind::RiemannLiouville;
        let (sc, sr) = (solve(&c, &grid, &cfg)?, solve(&r, &grid, &cfg)?);
        let mut worst: f64 = 0.0;
        for x in [0.2, 1.0] {
            for t in [0.3, 1.0] {
                worst = worst.max((sc.eval_u(x, t)? - sr.eval_u(x, t)?).abs());
            }
        }
        Ok(within(worst, 1e-10))
    }

    fn pure_ivp(&self) -> Outcome {
        let mut p = Self::half_line(DerivativeKind::Caputo, 0.3);
        p.left_path = BoundaryPath::MinusInfinity;
        p.initial = InitialData::Constant(3.0);
        let s = solve(&p, &TimeGrid::new(1.0, 16)?, &SolveConfig::default())?;
        let err = [(-1.0, 0.5), (0.0, 1.0), (4.0, 0.2)]
            .iter()
            .map(|&(x, t)| Ok((s.eval_u(x, t)? - 3.0).abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(within(err, 1e-12))
    }

    fn neumann(&self) -> Outcome {
        let cfg = Stefan1Config {
            r: self.cfg,
            ..Default::default()
        };
        let alpha = stefan1_alpha(0.5, 1.0, &cfg)?;
        // Independent bisection on √π α erf(α) e^{α²} = 1.
        let g = |a: f64| std::f64::consts::PI.sqrt() * a * (1.0 - erfc(a)) * (a * a).exp() - 1.0;
        let (mut lo, mut hi) = (1e-6, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(within((alpha - 0.5 * (lo + hi)).abs(), 1e-10))
    }

    fn stefan_residuals(&self) -> Outcome {
        let cfg = Stefan1Config {
            r: self.cfg,
            ..Default::default()
        };
        let mut worst: f64 = 0.0;
        for nu in [0.25, 0.3, 0.4, 0.5] {
            let s = stefan1_solve(DerivativeKind::Caputo, nu, 1.0, &cfg)?;
            for r in s.residuals(&[0.5, 1.0, 2.0])? {
                worst = worst.max(r.boundary).max(r.stefan);
            }
        }
        Ok(within(worst, 1e-10))
    }

    fn rl_exclusion(&self) -> Outcome {
        let rep = rl_ansatz_check(0.3, 0.5, -0.5, &[0.5, 1.0, 2.0], &self.cfg)?;
        let refused = matches!(
            stefan1_solve(
                DerivativeKind::RiemannLiouville,
                0.3,
                1.0,
                &Stefan1Config::default()
            ),
            Err(Error::AnsatzExcluded { .. })
        );
        Ok((
            rep.spread > 1e-3 && refused,
            format!("spread {:.3e}", rep.spread),
        ))
    }

    fn stefan2_coincidence(&self) -> Outcome {
        let grid = TimeGrid::new(1.0, 32)?;
        let cfg = Stefan2Config {
            r: self.cfg,
            ..Default::default()
        };
        let c = stefan2_solve(DerivativeKind::Caputo, 0.5, 1.0, grid, &cfg)?;
        let r = stefan2_solve(DerivativeKind::RiemannLiouville, 0.5, 1.0, grid, &cfg)?;
        let gap = c
            .eta
            .values()
            .iter()
            .zip(r.eta.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let res = c.max_residual().max(r.max_residual());
        Ok((
            gap <= 5.0 * cfg.tolerance && res <= 1e-8,
            format!("eta gap {gap:.3e}, residual {res:.3e}"),
        ))
    }
}

/// Runs a suite with the default evaluators.
pub fn run(suite: Suite) -> Report {
    Verifier::default().run(suite)
}

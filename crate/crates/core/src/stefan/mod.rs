//! The two fractional Stefan problems: melting from a fixed wall (closed
//! form through a similarity constant) and a subcooled half-space with a
//! source in the interface condition (time marching).

mod two;

pub use two::{stefan2_solve, Stefan2Config, Stefan2State};

use crate::error::{domain, Error, Result};
use crate::ibvp::DerivativeKind;
use crate::roots::{find_root, sign_changes};
use crate::specfun::{gamma, r_eval, FracIndex, RConfig};

/// W(−2α; −ν, μ), evaluated as R_{μ,ν}(2α, 1).
fn wright_at(alpha: f64, nu: f64, mu: f64, cfg: &RConfig) -> Result<f64> {
    r_eval(FracIndex::new(mu, nu)?, 2.0 * alpha, 1.0, cfg)
}

/// 2αΓ(1+ν)/Γ(1−ν) per unit α: D^{2ν}(2α t^ν) = speed_factor · α · t^{−ν}.
fn speed_factor(nu: f64) -> f64 {
    2.0 * gamma(1.0 + nu) / gamma(1.0 - nu)
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= 0.5) {
        return domain(format!("nu must lie in (0, 1/2], got {nu}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stefan1Config {
    pub r: RConfig,
    /// Search interval for α.
    pub bracket: (f64, f64),
    pub scan_points: usize,
    pub tolerance: f64,
}

impl Default for Stefan1Config {
    fn default() -> Self {
        Self {
            r: RConfig::default(),
            bracket: (1e-6, 8.0),
            scan_points: 400,
            tolerance: 1e-13,
        }
    }
}

/// Left side minus right side of the α equation.
pub fn alpha_equation(alpha: f64, nu: f64, r: f64, cfg: &RConfig) -> Result<f64> {
    let w1 = wright_at(alpha, nu, 1.0, cfg)?;
    let w = wright_at(alpha, nu, 1.0 - nu, cfg)?;
    Ok(speed_factor(nu) * alpha * r * (1.0 - w1) - w)
}

/// The similarity constant α > 0 of the melting problem.
pub fn stefan1_alpha(nu: f64, r: f64, cfg: &Stefan1Config) -> Result<f64> {
    check_nu(nu)?;
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("r must be positive, got {r}"));
    }
    let f = |a: f64| alpha_equation(a, nu, r, &cfg.r);
    let (lo, hi) = cfg.bracket;
    let brackets = sign_changes(f, lo, hi, cfg.scan_points)?;
    match brackets.as_slice() {
        [] => Err(Error::NoRoot { lo, hi }),
        [(a, b)] => find_root(f, *a, *b, cfg.tolerance),
        _ => Err(Error::AmbiguousRoot(brackets)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stefan1Solution {
    pub nu: f64,
    pub r: f64,
    pub alpha: f64,
    pub u0: f64,
    /// W(−2α; −ν, 1), the value of R_{1,ν} along the interface.
    pub interface_level: f64,
    cfg: RConfig,
}

/// Per-time residuals of the interface conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stefan1Residual {
    pub t: f64,
    pub boundary: f64,
    pub stefan: f64,
}

impl Stefan1Solution {
    /// Builds the solution for a given α, deriving u₀ from the interface
    /// condition.
    pub fn from_alpha(nu: f64, r: f64, alpha: f64, cfg: &RConfig) -> Result<Self> {
        check_nu(nu)?;
        let w1 = wright_at(alpha, nu, 1.0, cfg)?;
        Ok(Self {
            nu,
            r,
            alpha,
            u0: -w1 / (1.0 - w1),
            interface_level: w1,
            cfg: *cfg,
        })
    }

    pub fn eta(&self, t: f64) -> f64 {
        2.0 * self.alpha * t.powf(self.nu)
    }

    pub fn eval_u(&self, x: f64, t: f64) -> Result<f64> {
        if !(x >= 0.0 && t > 0.0) {
            return domain(format!("u needs x >= 0 and t > 0, got x = {x}, t = {t}"));
        }
        let r1 = r_eval(FracIndex::new(1.0, self.nu)?, x, t, &self.cfg)?;
        Ok((r1 - self.interface_level) / (1.0 - self.interface_level))
    }

    pub fn residuals(&self, times: &[f64]) -> Result<Vec<Stefan1Residual>> {
        let nu = self.nu;
        times
            .iter()
            .map(|&t| {
                let eta = self.eta(t);
                let r1 = r_eval(FracIndex::new(1.0, nu)?, eta, t, &self.cfg)?;
                let rn = r_eval(FracIndex::new(1.0 - nu, nu)?, eta, t, &self.cfg)?;
                let speed = speed_factor(nu) * self.alpha * t.powf(-nu);
                Ok(Stefan1Residual {
                    t,
                    boundary: (r1 + self.u0 / (1.0 - self.u0)).abs(),
                    stefan: (-self.r * speed + (1.0 - self.u0) * rn).abs(),
                })
            })
            .collect()
    }
}

/// Solves the melting problem for given (ν, r).
pub fn stefan1_solve(
    kind: DerivativeKind,
    nu: f64,
    r: f64,
    cfg: &Stefan1Config,
) -> Result<Stefan1Solution> {
    check_nu(nu)?;
    if kind == DerivativeKind::RiemannLiouville && nu < 0.5 {
        return Err(Error::AnsatzExcluded { nu });
    }
    let alpha = stefan1_alpha(nu, r, cfg)?;
    Stefan1Solution::from_alpha(nu, r, alpha, &cfg.r)
}

/// The inverse problem: given u₀ < 0, find α from the interface condition
/// and then the r that makes the Stefan condition hold.
pub fn stefan1_from_u0(nu: f64, u0: f64, cfg: &Stefan1Config) -> Result<Stefan1Solution> {
    check_nu(nu)?;
    if !(u0 < 0.0) {
        return domain(format!("the interface condition needs u0 < 0, got {u0}"));
    }
    let target = -u0 / (1.0 - u0);
    let (lo, hi) = cfg.bracket;
    let alpha = find_root(
        |a| Ok(wright_at(a, nu, 1.0, &cfg.r)? - target),
        lo,
        hi,
        cfg.tolerance,
    )?;
    let w = wright_at(alpha, nu, 1.0 - nu, &cfg.r)?;
    let r = (1.0 - u0) * w / (speed_factor(nu) * alpha);
    Stefan1Solution::from_alpha(nu, r, alpha, &cfg.r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzReport {
    /// Interface-condition defect at each sample time.
    pub values: Vec<f64>,
    /// max − min of the defect.
    pub spread: f64,
    /// u₀ = 0 makes the check vacuous.
    pub trivial: bool,
}

/// Evaluates the Riemann–Liouville interface condition under η = 2αt^ν,
/// whose defect must be independent of t for the similarity form to work.
pub fn rl_ansatz_check(
    nu: f64,
    alpha: f64,
    u0: f64,
    times: &[f64],
    cfg: &RConfig,
) -> Result<AnsatzReport> {
    if !(nu > 0.0 && nu < 0.5) {
        return domain(format!("the check needs 0 < nu < 1/2, got {nu}"));
    }
    let w1 = wright_at(alpha, nu, 1.0, cfg)?;
    let w2 = wright_at(alpha, nu, 2.0 * nu, cfg)?;
    let pulse = 1.0 / gamma(2.0 * nu);
    let values: Vec<f64> = times
        .iter()
        .map(|t| w1 - u0 * t.powf(2.0 * nu - 1.0) * (w2 - pulse))
        .collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    Ok(AnsatzReport {
        spread: if values.is_empty() { 0.0 } else { hi - lo },
        values,
        trivial: u0 == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{erf, erfc};
    use approx::assert_relative_eq;

    /// Bisection on r√π α erf(α) e^{α²} = 1.
    fn neumann_alpha(r: f64) -> f64 {
        let g = |a: f64| r * std::f64::consts::PI.sqrt() * a * erf(a) * (a * a).exp() - 1.0;
        let (mut lo, mut hi) = (1e-6, 5.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if g(m) > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn neumann_constant() {
        let cfg = Stefan1Config::default();
        let a = stefan1_alpha(0.5, 1.0, &cfg).unwrap();
        assert!((a - neumann_alpha(1.0)).abs() < 1e-10);
        assert!((a - 0.620063).abs() < 1e-6);
        let a10 = stefan1_alpha(0.5, 10.0, &cfg).unwrap();
        assert!(a10 < a);
        assert!((a10 - neumann_alpha(10.0)).abs() < 1e-10);
    }

    #[test]
    fn neumann_field_and_u0() {
        let s = stefan1_solve(DerivativeKind::Caputo, 0.5, 1.0, &Stefan1Config::default()).unwrap();
        let e = erf(s.alpha);
        assert_relative_eq!(s.u0, -erfc(s.alpha) / e, max_relative = 1e-12);
        assert!(s.u0 < 0.0);
        for (x, t) in [(0.05, 0.1), (0.4, 1.0), (1.0, 2.0)] {
            let want = 1.0 - erf(x / (2.0 * f64::sqrt(t))) / e;
            assert_relative_eq!(
                s.eval_u(x, t).unwrap(),
                want,
                max_relative = 1e-10,
                epsilon = 1e-13
            );
        }
        let rl = stefan1_solve(
            DerivativeKind::RiemannLiouville,
            0.5,
            1.0,
            &Stefan1Config::default(),
        )
        .unwrap();
        assert_eq!(rl, s);
    }

    #[test]
    fn fractional_residuals() {
        for nu in [0.25, 0.3, 0.4, 0.5] {
            let s =
                stefan1_solve(DerivativeKind::Caputo, nu, 1.0, &Stefan1Config::default()).unwrap();
            assert!(
                alpha_equation(s.alpha, nu, 1.0, &RConfig::default())
                    .unwrap()
                    .abs()
                    < 1e-12
            );
            for res in s.residuals(&[0.5, 1.0, 2.0]).unwrap() {
                assert!(res.boundary < 1e-10 && res.stefan < 1e-10, "{nu} {res:?}");
            }
            assert!(s.eval_u(s.eta(1.3), 1.3).unwrap().abs() < 1e-10);
            assert!((s.eval_u(1e-12, 0.7).unwrap() - 1.0).abs() < 1e-9);
            assert_relative_eq!(s.eta(4.0) / s.eta(1.0), 4f64.powf(nu), max_relative = 1e-14);
        }
    }

    #[test]
    fn perturbed_alpha_is_detected() {
        let s = stefan1_solve(DerivativeKind::Caputo, 0.4, 1.0, &Stefan1Config::default()).unwrap();
        let p = Stefan1Solution::from_alpha(0.4, 1.0, s.alpha + 1e-3, &RConfig::default()).unwrap();
        let worst = p
            .residuals(&[0.5, 1.0, 2.0])
            .unwrap()
            .iter()
            .map(|r| r.boundary.max(r.stefan))
            .fold(0.0, f64::max);
        assert!(worst >= 1e-4);
    }

    #[test]
    fn inverse_problem_round_trip() {
        let s = stefan1_solve(DerivativeKind::Caputo, 0.3, 2.0, &Stefan1Config::default()).unwrap();
        let back = stefan1_from_u0(0.3, s.u0, &Stefan1Config::default()).unwrap();
        assert_relative_eq!(back.alpha, s.alpha, max_relative = 1e-9);
        assert_relative_eq!(back.r, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn rl_exclusion() {
        assert!(matches!(
            stefan1_solve(
                DerivativeKind::RiemannLiouville,
                0.3,
                1.0,
                &Stefan1Config::default()
            ),
            Err(Error::AnsatzExcluded { .. })
        ));
        let cfg = RConfig::default();
        let rep = rl_ansatz_check(0.3, 0.5, -0.5, &[0.5, 1.0, 2.0], &cfg).unwrap();
        assert!(rep.spread > 1e-3 && !rep.trivial);
        let rep = rl_ansatz_check(0.3, 0.5, 0.0, &[0.5, 1.0, 2.0], &cfg).unwrap();
        assert!(rep.spread == 0.0 && rep.trivial);
        assert!(rl_ansatz_check(0.5, 0.5, -0.5, &[1.0], &cfg).is_err());
    }
}

//! Wright function W(z; α, β) = Σ z^j / (j! Γ(αj + β)) by direct summation.

use std::f64::consts::PI;

use super::gamma::{ln_abs_rgamma, ln_gamma, rgamma, sin_pi};
use super::SeriesConfig;
use crate::error::{domain, Error, Result};

/// Outcome of a compensated series summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    /// max |term| / |value|; large values mean digits were lost.
    pub cancellation: f64,
}

/// One series coefficient 1/(j! Γ(αj + β)).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coef {
    /// The coefficient itself when it is a normal double, else `None`.
    direct: Option<f64>,
    ln_abs: f64,
    sign: f64,
    /// Log of the coefficient's magnitude with the oscillating sine factor
    /// dropped; a smooth upper envelope used for stopping.
    ln_envelope: f64,
}

impl Coef {
    pub(crate) fn new(j: usize, alpha: f64, beta: f64) -> Self {
        let x = alpha * j as f64 + beta;
        let ln_fact = ln_gamma(j as f64 + 1.0);
        let ln_envelope = if x >= 0.5 {
            -ln_gamma(x)
        } else {
            ln_gamma(1.0 - x) - PI.ln()
        } - ln_fact;
        let pole = x <= 0.0 && x == x.floor();
        let sign = if pole {
            0.0
        } else if x >= 0.5 {
            1.0
        } else {
            sin_pi(x).signum()
        };
        let ln_abs = ln_abs_rgamma(x) - ln_fact;
        let direct = if pole {
            Some(0.0)
        } else if j <= 170 {
            let fact: f64 = (1..=j).map(|k| k as f64).product();
            Some(rgamma(x) / fact).filter(|c| c.is_normal())
        } else {
            None
        };
        Self {
            direct,
            ln_abs,
            sign,
            ln_envelope,
        }
    }

    fn term(&self, j: usize, z: f64, ln_z: f64) -> f64 {
        if let Some(c) = self.direct {
            let p = z.powi(j as i32);
            if p.is_normal() || j == 0 {
                return c * p;
            }
        }
        if self.sign == 0.0 {
            return 0.0;
        }
        let sign = if z < 0.0 && j % 2 == 1 {
            -self.sign
        } else {
            self.sign
        };
        sign * (self.ln_abs + j as f64 * ln_z).exp()
    }
}

/// Sums Σ coef_j z^j with Neumaier compensation. Stops once the smooth
/// envelope of the terms is decreasing and below tolerance, so isolated
/// zero terms at poles of Γ never end the sum early.
pub(crate) fn sum_with<C>(z: f64, coef: C, cfg: &SeriesConfig) -> Result<SeriesSum>
where
    C: Fn(usize) -> Coef,
{
    let ln_z = z.abs().ln();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut max_term: f64 = 0.0;
    let mut prev_envelope = f64::INFINITY;
    for j in 0..cfg.max_terms {
        let c = coef(j);
        let term = if z == 0.0 && j > 0 {
            0.0
        } else {
            c.term(j, z, ln_z)
        };
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        max_term = max_term.max(term.abs());
        if z == 0.0 {
            return Ok(finish(sum + comp, j + 1, max_term));
        }
        let envelope = (c.ln_envelope + j as f64 * ln_z).exp();
        let total = (sum + comp).abs();
        if j > 0 && envelope < prev_envelope && envelope <= (cfg.rel_tol * total).max(cfg.abs_tol) {
            return Ok(finish(sum + comp, j + 1, max_term));
        }
        prev_envelope = envelope;
    }
    Err(Error::SeriesNonConvergence {
        terms: cfg.max_terms,
        z,
    })
}

fn finish(value: f64, terms: usize, max_term: f64) -> SeriesSum {
    let cancellation = if max_term == 0.0 {
        1.0
    } else {
        max_term / value.abs()
    };
    SeriesSum {
        value,
        terms,
        cancellation,
    }
}

/// Wright function with summation diagnostics.
pub fn wright_sum(z: f64, alpha: f64, beta: f64, cfg: &SeriesConfig) -> Result<SeriesSum> {
    cfg.validate()?;
    if !(alpha > -1.0) {
        return domain(format!("Wright function needs alpha > -1, got {alpha}"));
    }
    if !z.is_finite() || !beta.is_finite() {
        return domain("Wright function arguments must be finite");
    }
    sum_with(z, |j| Coef::new(j, alpha, beta), cfg)
}

/// W(z; α, β).
pub fn wright(z: f64, alpha: f64, beta: f64, cfg: &SeriesConfig) -> Result<f64> {
    wright_sum(z, alpha, beta, cfg).map(|s| s.value)
}

/// Mainardi function M(z; ν) = W(−z; −ν, 1−ν).
pub fn mainardi(z: f64, nu: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return domain(format!("Mainardi function needs nu in (0, 1), got {nu}"));
    }
    if !(z >= 0.0) {
        return domain(format!("Mainardi function needs z >= 0, got {z}"));
    }
    wright(-z, -nu, 1.0 - nu, cfg)
}

/// F(z; ν) = W(−z; −ν, 0), so that F(a t^{−ν}; ν) = t R_{0,ν}(a, t).
pub fn f_aux(z: f64, nu: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(nu > 0.0 && nu <= 0.5) {
        return domain(format!("auxiliary F needs nu in (0, 1/2], got {nu}"));
    }
    if !(z >= 0.0) {
        return domain(format!("auxiliary F needs z >= 0, got {z}"));
    }
    wright(-z, -nu, 0.0, cfg)
}

//! Special functions: the auxiliary function R_{μ,ν}(a,t) with its
//! evaluation routes, Wright and Mainardi functions, and power-law pulses.

mod gamma;
mod rfun;
mod wright;

pub use gamma::{erf, erfc, gamma, ln_gamma, rgamma, sin_pi};
pub use rfun::{
    r_closed_form_half, r_eval, r_eval_detailed, r_laplace, r_line_integral_check, r_partial_a,
    r_real_integral, r_series, r_tail_integral_check, IntegralCheck, RConfig, REvaluation,
    RFunction, RMethod,
};
pub use wright::{f_aux, mainardi, wright, wright_sum, SeriesSum};

use crate::error::{domain, Error, Result};

/// The order pair (μ, ν) indexing the family R_{μ,ν}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracIndex {
    mu: f64,
    nu: f64,
}

impl FracIndex {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return domain(format!("mu must be finite and non-negative, got {mu}"));
        }
        if !(nu > 0.0 && nu <= 1.0) {
            return domain(format!("nu must lie in (0, 1], got {nu}"));
        }
        Ok(Self { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Whether the series and real-axis routes apply (ν ≤ 1/2).
    pub fn is_diffusive(&self) -> bool {
        self.nu <= 0.5
    }

    /// Index with μ shifted by `shift`, keeping ν.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        Self::new(self.mu + shift, self.nu)
    }
}

/// The pulse δ_μ(t) = t^{μ−1}/Γ(μ), with μ = 0 standing for the Dirac
/// delta at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerLawPulse {
    PowerLaw { coefficient: f64, exponent: f64 },
    DiracAtZero,
}

impl PowerLawPulse {
    pub fn of_order(mu: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return domain(format!("pulse order must be non-negative, got {mu}"));
        }
        if mu == 0.0 {
            Ok(Self::DiracAtZero)
        } else {
            Ok(Self::PowerLaw {
                coefficient: rgamma(mu),
                exponent: mu - 1.0,
            })
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match *self {
            Self::DiracAtZero => Err(Error::SymbolicOnly(
                "the Dirac delta has no pointwise value".into(),
            )),
            Self::PowerLaw {
                coefficient,
                exponent,
            } => {
                if !(t > 0.0) {
                    return domain(format!("pulse evaluated at t = {t} <= 0"));
                }
                Ok(coefficient * t.powf(exponent))
            }
        }
    }
}

/// δ_μ(t) = t^{μ−1}/Γ(μ) for μ > 0 and t > 0.
pub fn delta_mu(mu: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("delta_mu needs t > 0, got {t}"));
    }
    PowerLawPulse::of_order(mu)?.eval(t)
}

/// Controls for the alternating series of the Wright function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub max_terms: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest accepted ratio max|term| / |sum| before the series result is
    /// considered too inaccurate and R falls back to Laplace inversion.
    pub max_cancellation: f64,
    /// Largest series argument `a t^{-ν}` attempted before falling back.
    pub max_argument: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            max_terms: 400,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_cancellation: 1e5,
            max_argument: 30.0,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms == 0 {
            return domain("max_terms must be at least 1");
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be finite and positive, got {v}"));
            }
        }
        Ok(())
    }
}

//! Finite sums of power-law pulses Σ c_k δ_{μ_k}(t), closed under
//! fractional integration and (where representable) differentiation.

use crate::error::{domain, Error, Result};
use crate::specfun::{delta_mu, r_eval, FracIndex, RConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub coefficient: f64,
    /// μ ≥ 0; μ = 0 is the Dirac delta at the origin.
    pub order: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PulseSeries {
    terms: Vec<Pulse>,
}

impl PulseSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(coefficient: f64, order: f64) -> Result<Self> {
        Self::zero().plus(coefficient, order)
    }

    /// Adds c δ_μ, merging with an existing term of the same order.
    pub fn plus(mut self, coefficient: f64, order: f64) -> Result<Self> {
        if !(order >= 0.0 && order.is_finite()) {
            return domain(format!("pulse order must be non-negative, got {order}"));
        }
        if coefficient == 0.0 {
            return Ok(self);
        }
        match self.terms.iter_mut().find(|p| p.order == order) {
            Some(p) => p.coefficient += coefficient,
            None => self.terms.push(Pulse { coefficient, order }),
        }
        self.terms.retain(|p| p.coefficient != 0.0);
        self.terms.sort_by(|a, b| a.order.total_cmp(&b.order));
        Ok(self)
    }

    pub fn terms(&self) -> &[Pulse] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|p| Pulse {
                    coefficient: p.coefficient * c,
                    order: p.order,
                })
                .collect(),
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for p in &other.terms {
            out = out
                .plus(p.coefficient, p.order)
                .expect("orders already validated");
        }
        out
    }

    /// Weight of the Dirac component.
    pub fn dirac_weight(&self) -> f64 {
        self.terms
            .iter()
            .filter(|p| p.order == 0.0)
            .map(|p| p.coefficient)
            .sum()
    }

    /// Pointwise value; fails if a Dirac component is present.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if self.dirac_weight() != 0.0 {
            return Err(Error::SymbolicOnly(
                "pulse series contains a Dirac delta".into(),
            ));
        }
        self.eval_regular(t)
    }

    /// Pointwise value of the non-Dirac part.
    pub fn eval_regular(&self, t: f64) -> Result<f64> {
        self.terms
            .iter()
            .filter(|p| p.order > 0.0)
            .map(|p| Ok(p.coefficient * delta_mu(p.order, t)?))
            .sum()
    }

    /// D^{−α}: δ_μ ↦ δ_{μ+α}.
    pub fn integrate(&self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return domain(format!(
                "integration order must be non-negative, got {alpha}"
            ));
        }
        Ok(Self {
            terms: self
                .terms
                .iter()
                .map(|p| Pulse {
                    coefficient: p.coefficient,
                    order: p.order + alpha,
                })
                .collect(),
        })
    }

    /// D^α: δ_μ ↦ δ_{μ−α}, representable only when every μ ≥ α.
    pub fn differentiate(&self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return domain(format!(
                "differentiation order must be non-negative, got {alpha}"
            ));
        }
        let mut out = Self::zero();
        for p in &self.terms {
            let order = p.order - alpha;
            if order < -1e-14 {
                return Err(Error::Unrepresentable(format!(
                    "D^{alpha} of delta_{} is not a pulse",
                    p.order
                )));
            }
            out = out.plus(p.coefficient, order.max(0.0))?;
        }
        Ok(out)
    }

    /// (Σ c_k δ_{μ_k}) ∗ R_{λ,ν}(a, ·) evaluated at t, which is
    /// Σ c_k R_{λ+μ_k,ν}(a, t).
    pub fn convolve_r(&self, lambda: f64, nu: f64, a: f64, t: f64, cfg: &RConfig) -> Result<f64> {
        self.terms
            .iter()
            .map(|p| Ok(p.coefficient * r_eval(FracIndex::new(lambda + p.order, nu)?, a, t, cfg)?))
            .sum()
    }
}

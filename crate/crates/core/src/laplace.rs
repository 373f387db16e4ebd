//! Numerical inversion of Laplace transforms along a cotangent-deformed
//! (optimised Talbot) contour with midpoint-rule quadrature.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

// Contour z(θ) = λ (SIGMA + MU θ cot(ALPHA θ) + i NU θ), θ ∈ (−π, π).
const SIGMA: f64 = -0.6122;
const MU: f64 = 0.5017;
const ALPHA: f64 = 0.6407;
const NU: f64 = 0.2645;

/// Leftmost point of the contour on the real axis, in units of λ.
pub const CONTOUR_APEX: f64 = SIGMA + MU / ALPHA;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    /// Number of nodes on the full contour; only the upper half is evaluated.
    pub node_count: usize,
    /// Multiplier on the default contour scale `node_count / t`.
    pub contour_scale: f64,
    /// Largest tolerated ratio of summed absolute contributions to |result|.
    pub working_precision_guard: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            node_count: 32,
            contour_scale: 1.0,
            working_precision_guard: 1e13,
        }
    }
}

impl InversionConfig {
    pub fn new(
        node_count: usize,
        contour_scale: f64,
        working_precision_guard: f64,
    ) -> Result<Self> {
        let cfg = Self {
            node_count,
            contour_scale,
            working_precision_guard,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return domain(format!(
                "node_count must be at least 8, got {}",
                self.node_count
            ));
        }
        if !(self.contour_scale > 0.0 && self.contour_scale.is_finite()) {
            return domain(format!(
                "contour_scale must be positive, got {}",
                self.contour_scale
            ));
        }
        if !(self.working_precision_guard > 1.0) {
            return domain("working_precision_guard must exceed 1");
        }
        Ok(())
    }
}

fn contour(theta: f64, lambda: f64) -> (Complex64, Complex64) {
    let c = ALPHA * theta;
    let cot = c.cos() / c.sin();
    let csc2 = 1.0 / (c.sin() * c.sin());
    let z = Complex64::new(SIGMA + MU * theta * cot, NU * theta) * lambda;
    let dz = Complex64::new(MU * (cot - c * csc2), NU) * lambda;
    (z, dz)
}

/// Inverts `F` at time `t`, where `log_integrand(z)` returns `ln F(z)`.
/// Working with the logarithm lets `e^{zt} F(z)` be formed without
/// intermediate overflow when F decays exponentially.
pub fn invert_log<F>(log_transform: F, t: f64, cfg: &InversionConfig) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    cfg.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!(
            "inversion time must be positive and finite, got {t}"
        ));
    }
    let n = cfg.node_count + cfg.node_count % 2;
    let lambda = cfg.contour_scale * n as f64 / t;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for k in 0..n / 2 {
        let theta = (k as f64 + 0.5) * step;
        let (z, dz) = contour(theta, lambda);
        let term = ((z * t + log_transform(z)).exp() * dz).im;
        if !term.is_finite() {
            return Err(Error::Inversion {
                t,
                reason: format!("non-finite contribution at node {k} (s = {z})"),
            });
        }
        sum += term;
        abs_sum += term.abs();
    }
    let value = sum * 2.0 / n as f64;
    let abs_sum = abs_sum * 2.0 / n as f64;
    if abs_sum < 1e-290 {
        return Ok(value);
    }
    if abs_sum > cfg.working_precision_guard * value.abs() {
        return Err(Error::Inversion {
            t,
            reason: format!(
                "condition estimate {:e} exceeds guard {:e}",
                abs_sum / value.abs(),
                cfg.working_precision_guard
            ),
        });
    }
    Ok(value)
}

/// Inverts the transform `F` at time `t`.
pub fn invert<F>(transform: F, t: f64, cfg: &InversionConfig) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    invert_log(|z| transform(z).ln(), t, cfg)
}

//! Gamma-function helpers on top of `libm`.

use std::f64::consts::PI;

pub use libm::{erf, erfc};

/// Γ(x).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln|Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `sin(πx)` with the argument reduced exactly, so integers give exact zeros.
pub fn sin_pi(x: f64) -> f64 {
    let r = x % 2.0; // exact
    let r = if r < 0.0 { r + 2.0 } else { r };
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r <= 0.25 {
        (PI * r).sin()
    } else if r <= 0.75 {
        (PI * (0.5 - r)).cos()
    } else if r <= 1.25 {
        (PI * (1.0 - r)).sin()
    } else if r <= 1.75 {
        -(PI * (r - 1.5)).cos()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// `1/Γ(x)`, an entire function: zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x >= 0.5 {
        if x == x.floor() && x <= 171.0 {
            return 1.0 / (1..x as u32).map(f64::from).product::<f64>();
        }
        if x < 171.0 {
            return 1.0 / gamma(x);
        }
        return (-ln_gamma(x)).exp();
    }
    // Reflection: 1/Γ(x) = sin(πx) Γ(1−x) / π.
    let s = sin_pi(x);
    let g = gamma(1.0 - x);
    if g.is_finite() {
        s * g / PI
    } else {
        s.signum() * (ln_gamma(1.0 - x) + s.abs().ln() - PI.ln()).exp()
    }
}

/// `ln|1/Γ(x)|`, or `-∞` at the poles of Γ.
pub fn ln_abs_rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NEG_INFINITY;
    }
    if x >= 0.5 {
        -ln_gamma(x)
    } else {
        ln_gamma(1.0 - x) + sin_pi(x).abs().ln() - PI.ln()
    }
}

//! Bracketing root finders for scalar equations.

use crate::error::{domain, Error, Result};

/// Sub-intervals of [lo, hi] on which `f` changes sign, found by sampling
/// at `samples` log-spaced points.
pub fn sign_changes(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(lo > 0.0 && hi > lo && samples >= 2) {
        return domain(format!(
            "log-spaced scan needs 0 < lo < hi, got [{lo}, {hi}]"
        ));
    }
    let ratio = (hi / lo).powf(1.0 / (samples - 1) as f64);
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0)?;
    for k in 1..samples {
        let x1 = if k == samples - 1 {
            hi
        } else {
            lo * ratio.powi(k as i32)
        };
        let f1 = f(x1)?;
        if f0 == 0.0 || f0.signum() != f1.signum() && f1 != 0.0 {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(out)
}

/// Root of `f` in a sign-changing bracket by the Illinois variant of
/// false position, falling back to bisection when it stalls.
pub fn find_root(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot { lo, hi });
    }
    let mut side = 0;
    for _ in 0..200 {
        let width = (b - a).abs();
        if width <= tol * b.abs().max(1.0) {
            break;
        }
        let mut c = b - fb * (b - a) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        // Guarantee progress on stubborn brackets.
        if (b - a).abs() > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m)?;
            if fm.signum() == fb.signum() {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

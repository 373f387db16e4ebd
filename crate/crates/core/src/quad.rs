//! Adaptive Gauss-Kronrod quadrature (7/15 point) on finite and
//! semi-infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections on a finite interval.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    /// Kronrod estimate of ∫|f|, which sets the round-off floor.
    magnitude: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, lo: f64, hi: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut magnitude = WGK[7] * fc.abs();
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let (fl, fr) = (f(center - dx)?, f(center + dx)?);
        let pair = fl + fr;
        kronrod += w * pair;
        magnitude += w * (fl.abs() + fr.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(Error::Quadrature {
            error: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    let magnitude = magnitude * half.abs();
    Ok(Segment {
        lo,
        hi,
        value,
        error,
        magnitude,
    })
}

/// Errors below this multiple of ε·∫|f| are indistinguishable from round-off.
const ROUNDOFF_FACTOR: f64 = 50.0 * f64::EPSILON;

/// Integrates `f` over `[lo, hi]`, bisecting the worst segment until the
/// summed error estimate meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = kronrod(&mut f, lo, hi)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_mag = first.magnitude;
    let mut heap = BinaryHeap::from([first]);
    let mut splits = 0;
    loop {
        let tol = cfg
            .abs_tol
            .max(cfg.rel_tol * total.abs())
            .max(ROUNDOFF_FACTOR * total_mag);
        if total_err <= tol {
            break;
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::Quadrature {
                error: total_err,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval exhausted at double precision; accept what we have.
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let left = kronrod(&mut f, worst.lo, mid)?;
        let right = kronrod(&mut f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_mag += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
        splits += 1;
    }
    // Re-sum from the pieces to shed the drift of the running update.
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error })
}

/// Integrates `f` over `[lo, ∞)` as a sum of finite panels whose widths
/// double from `scale`. Stops once two consecutive panels contribute less
/// than the absolute tolerance, which assumes the integrand has settled
/// into monotone decay by then.
pub fn integrate_to_infinity<F>(f: F, lo: f64, scale: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_to_infinity_capped(f, lo, scale, f64::INFINITY, cfg)
}

/// As [`integrate_to_infinity`], but panel widths never exceed `max_width`.
/// Slowly decaying oscillatory integrands need this so that no single panel
/// holds too many oscillations.
pub fn integrate_to_infinity_capped<F>(
    mut f: F,
    lo: f64,
    scale: f64,
    max_width: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    const MAX_PANELS: usize = 20_000;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut a = lo;
    let mut width = scale;
    let mut quiet = 0;
    for _ in 0..MAX_PANELS {
        let b = a + width;
        let panel = integrate(&mut f, a, b, cfg)?;
        value += panel.value;
        error += panel.error;
        if panel.value.abs() <= cfg.abs_tol {
            quiet += 1;
            if quiet >= 2 {
                return Ok(QuadResult { value, error });
            }
        } else {
            quiet = 0;
        }
        a = b;
        width = (2.0 * width).min(max_width);
    }
    Err(Error::Quadrature {
        error: f64::INFINITY,
        tolerance: cfg.abs_tol,
    })
}

/// Fixed n-point Gauss-Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "a Gauss-Legendre rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                deriv = nf * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / deriv;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * deriv * deriv));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto [lo, hi].
    pub fn points(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }

    pub fn integrate<F>(&self, mut f: F, lo: f64, hi: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x)?;
        }
        Ok(sum * half)
    }
}

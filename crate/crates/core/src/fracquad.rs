//! Discrete fractional integrals and derivatives on uniform grids.

use std::ops::{Add, Mul, Sub};

use crate::error::{domain, Result};
use crate::par;
use crate::specfun::{gamma, r_eval, rgamma, FracIndex, RConfig, RFunction};

/// Uniform grid t_k = k h, k = 0..=n_steps, with h = t_end / n_steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return domain(format!("grid end time must be positive, got {t_end}"));
        }
        if n_steps < 2 {
            return domain(format!("grid needs at least 2 steps, got {n_steps}"));
        }
        Ok(Self { t_end, n_steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            k as f64 * self.step()
        }
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.node(k))
    }

    /// The same span with twice as many steps.
    pub fn refined(&self) -> Self {
        Self {
            t_end: self.t_end,
            n_steps: 2 * self.n_steps,
        }
    }
}

/// How a sampled function behaves at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    /// values[0] holds the finite value f(0).
    Finite,
    /// f(0) is not available; values[0] is NaN.
    Unset,
    /// f(t) ~ C t^p near 0 with p ∈ (−1, 0); values[0] is NaN.
    PowerLaw { exponent: f64 },
}

/// Values of a function at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    grid: TimeGrid,
    values: Vec<f64>,
    origin: Origin,
}

impl SampledFn {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        Self::with_origin(grid, values, Origin::Finite)
    }

    pub fn with_origin(grid: TimeGrid, mut values: Vec<f64>, origin: Origin) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            ));
        }
        if let Origin::PowerLaw { exponent } = origin {
            if !(exponent > -1.0 && exponent < 0.0) {
                return domain(format!(
                    "singular exponent must lie in (-1, 0), got {exponent}"
                ));
            }
        }
        if origin != Origin::Finite {
            values[0] = f64::NAN;
        }
        Ok(Self {
            grid,
            values,
            origin,
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
            origin: Origin::Finite,
        }
    }

    /// Samples `f` at t > 0 for a function behaving like t^exponent at 0.
    pub fn from_fn_singular(grid: TimeGrid, exponent: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid
            .nodes()
            .map(|t| if t > 0.0 { f(t) } else { f64::NAN })
            .collect();
        Self::with_origin(grid, values, Origin::PowerLaw { exponent })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    /// Largest |value| over the nodes that carry a value.
    pub fn max_abs(&self) -> f64 {
        let skip = usize::from(self.origin != Origin::Finite);
        self.values
            .iter()
            .skip(skip)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(
            self.grid, other.grid,
            "sampled functions live on different grids"
        );
        let origin = match (self.origin, other.origin) {
            (Origin::Finite, Origin::Finite) => Origin::Finite,
            (Origin::PowerLaw { exponent: p }, Origin::PowerLaw { exponent: q }) => {
                Origin::PowerLaw { exponent: p.min(q) }
            }
            (Origin::PowerLaw { exponent }, Origin::Finite)
            | (Origin::Finite, Origin::PowerLaw { exponent }) => Origin::PowerLaw { exponent },
            _ => Origin::Unset,
        };
        let mut values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| op(a, b))
            .collect();
        if origin != Origin::Finite {
            values[0] = f64::NAN;
        }
        Self {
            grid: self.grid,
            values,
            origin,
        }
    }
}

impl Add for &SampledFn {
    type Output = SampledFn;
    fn add(self, rhs: Self) -> SampledFn {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SampledFn {
    type Output = SampledFn;
    fn sub(self, rhs: Self) -> SampledFn {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &SampledFn {
    type Output = SampledFn;
    fn mul(self, c: f64) -> SampledFn {
        SampledFn {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            origin: self.origin,
        }
    }
}

/// Product-integration weights for ∫ (t_n − τ)^{μ−1} f(τ) dτ with f
/// piecewise linear: panel k steps back from t_n contributes
/// `upper[k] f_{n−k+1} + lower[k] f_{n−k}` (times h^μ).
struct PanelWeights {
    upper: Vec<f64>,
    lower: Vec<f64>,
}

impl PanelWeights {
    fn new(mu: f64, n: usize) -> Self {
        let mut upper = vec![0.0; n + 1];
        let mut lower = vec![0.0; n + 1];
        for k in 1..=n {
            let (kf, km) = (k as f64, (k - 1) as f64);
            let i0 = (kf.powf(mu) - km.powf(mu)) / mu;
            let i1 = (kf.powf(mu + 1.0) - km.powf(mu + 1.0)) / (mu + 1.0);
            upper[k] = kf * i0 - i1;
            lower[k] = i1 - km * i0;
        }
        Self { upper, lower }
    }
}

/// Splits f = C t^p + r, fitting C t^p + r(0) through the first two
/// samples so that r is regular at the origin.
fn split_power_law(f: &SampledFn, p: f64) -> (f64, Vec<f64>) {
    let grid = f.grid();
    let hp = grid.step().powf(p);
    let c = (f.value(2) - f.value(1)) / (hp * (2f64.powf(p) - 1.0));
    let mut rest: Vec<f64> = grid
        .nodes()
        .zip(f.values())
        .map(|(t, &v)| v - c * t.powf(p))
        .collect();
    rest[0] = rest[1];
    (c, rest)
}

fn integrate_regular(grid: TimeGrid, v: &[f64], mu: f64) -> Vec<f64> {
    let n_steps = grid.n_steps();
    let w = PanelWeights::new(mu, n_steps);
    let scale = grid.step().powf(mu) * rgamma(mu);
    par::map_range(n_steps + 1, |n| {
        scale
            * (0..n)
                .map(|j| w.upper[n - j] * v[j + 1] + w.lower[n - j] * v[j])
                .sum::<f64>()
    })
}

/// Riemann-Liouville integral (δ_μ ∗ f)(t_k) at every node. A power-law
/// origin C t^p is integrated exactly, with C fitted from the first samples.
pub fn rl_integral(f: &SampledFn, mu: f64) -> Result<SampledFn> {
    if !(mu > 0.0 && mu.is_finite()) {
        return domain(format!("integral order must be positive, got {mu}"));
    }
    let grid = *f.grid();
    match f.origin() {
        Origin::Finite => SampledFn::new(grid, integrate_regular(grid, f.values(), mu)),
        Origin::Unset => domain("cannot integrate a function whose behaviour at t = 0 is unknown"),
        Origin::PowerLaw { exponent: p } => {
            let (c, rest) = split_power_law(f, p);
            let mut out = integrate_regular(grid, &rest, mu);
            let q = p + mu;
            let amp = c * gamma(p + 1.0) * rgamma(q + 1.0);
            for (k, t) in grid.nodes().enumerate().skip(1) {
                out[k] += amp * t.powf(q);
            }
            let origin = if q < 0.0 {
                Origin::PowerLaw { exponent: q }
            } else {
                out[0] = if q == 0.0 { amp } else { 0.0 };
                Origin::Finite
            };
            SampledFn::with_origin(grid, out, origin)
        }
    }
}

fn require_unit_order(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return domain(format!("derivative order must lie in (0, 1), got {mu}"));
    }
    Ok(())
}

/// The L1 stencil for a Caputo derivative of order μ ∈ (0, 1]; at μ = 1 it
/// reduces to the backward difference.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Stencil {
    coeffs: Vec<f64>,
    scale: f64,
}

impl L1Stencil {
    pub fn new(mu: f64, grid: &TimeGrid) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return domain(format!("L1 order must lie in (0, 1], got {mu}"));
        }
        let n_steps = grid.n_steps();
        let coeffs = if mu == 1.0 {
            (0..n_steps)
                .map(|k| if k == 0 { 1.0 } else { 0.0 })
                .collect()
        } else {
            (0..n_steps)
                .map(|k| ((k + 1) as f64).powf(1.0 - mu) - (k as f64).powf(1.0 - mu))
                .collect()
        };
        Ok(Self {
            coeffs,
            scale: grid.step().powf(-mu) * rgamma(2.0 - mu),
        })
    }

    /// Weight of v[n] in the derivative at node n.
    pub fn leading(&self) -> f64 {
        self.scale * self.coeffs[0]
    }

    /// The derivative at node n ≥ 1 from samples v[0..=n].
    pub fn apply(&self, v: &[f64], n: usize) -> f64 {
        self.scale
            * (0..n)
                .map(|j| self.coeffs[n - j - 1] * (v[j + 1] - v[j]))
                .sum::<f64>()
    }
}

/// L1 discretisation of the Caputo derivative; node 0 is left unset.
pub fn caputo_derivative(f: &SampledFn, mu: f64) -> Result<SampledFn> {
    require_unit_order(mu)?;
    if f.origin() != Origin::Finite {
        return domain("the Caputo derivative needs a finite value at t = 0");
    }
    let grid = *f.grid();
    let stencil = L1Stencil::new(mu, &grid)?;
    let v = f.values();
    let out = par::map_range(grid.n_steps() + 1, |n| {
        if n == 0 {
            f64::NAN
        } else {
            stencil.apply(v, n)
        }
    });
    SampledFn::with_origin(grid, out, Origin::Unset)
}

/// Second-order derivative of samples, one-sided at the last node.
fn differentiate(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len() - 1;
    (0..=n)
        .map(|k| match k {
            0 => f64::NAN,
            k if k == n => (3.0 * g[n] - 4.0 * g[n - 1] + g[n - 2]) / (2.0 * h),
            k => (g[k + 1] - g[k - 1]) / (2.0 * h),
        })
        .collect()
}

/// Riemann-Liouville derivative d/dt (δ_{1−μ} ∗ f). The part of f that is
/// singular or non-zero at the origin is differentiated exactly, the rest
/// numerically; node 0 is left unset.
pub fn rl_derivative(f: &SampledFn, mu: f64) -> Result<SampledFn> {
    require_unit_order(mu)?;
    let grid = *f.grid();
    let h = grid.step();
    // Split f = C t^p + r (p = 0 and r(0) = 0 for a finite origin).
    let (p, c, rest) = match f.origin() {
        Origin::Finite => {
            let c = f.value(0);
            (0.0, c, f.values().iter().map(|v| v - c).collect())
        }
        Origin::PowerLaw { exponent } => {
            let (c, rest) = split_power_law(f, exponent);
            (exponent, c, rest)
        }
        Origin::Unset => {
            return domain("the Riemann-Liouville derivative needs a known behaviour at t = 0")
        }
    };
    let integrated = rl_integral(&SampledFn::new(grid, rest)?, 1.0 - mu)?;
    let mut out = differentiate(integrated.values(), h);
    let exact = gamma(p + 1.0) * rgamma(p + 1.0 - mu);
    for (k, t) in grid.nodes().enumerate().skip(1) {
        out[k] += c * exact * t.powf(p - mu);
    }
    SampledFn::with_origin(grid, out, Origin::Unset)
}

fn sample_r(idx: FracIndex, a: f64, grid: &TimeGrid, cfg: &RConfig) -> Result<SampledFn> {
    if idx.mu() == 0.0 {
        return domain(
            "the identity residuals need mu > 0 (R_{0,nu} is not integrable at t = 0 as a sample)",
        );
    }
    if !idx.is_diffusive() {
        return domain(format!(
            "the identity residuals need nu <= 1/2, got {}",
            idx.nu()
        ));
    }
    if !(a > 0.0) {
        return domain(format!("the identity residuals need a > 0, got {a}"));
    }
    let f = RFunction::new(idx, *cfg)?;
    let values = par::try_map_range(grid.len(), |k| {
        let t = grid.node(k);
        if t == 0.0 {
            Ok(0.0)
        } else {
            f.eval(a, t)
        }
    })?;
    SampledFn::new(*grid, values)
}

/// Nodewise aν D^{−(1−ν)} y − t y + μ ∫y for y = R_{μ,ν}(a, ·).
pub fn residual_int_eq(
    idx: FracIndex,
    a: f64,
    grid: &TimeGrid,
    cfg: &RConfig,
) -> Result<SampledFn> {
    let y = sample_r(idx, a, grid, cfg)?;
    let (mu, nu) = (idx.mu(), idx.nu());
    let frac = rl_integral(&y, 1.0 - nu)?;
    let whole = rl_integral(&y, 1.0)?;
    let values = grid
        .nodes()
        .enumerate()
        .map(|(k, t)| a * nu * frac.value(k) - t * y.value(k) + mu * whole.value(k))
        .collect();
    SampledFn::new(*grid, values)
}

/// Nodewise aν D^ν_C y − t y′ − (1−μ) y for given samples y.
pub fn ode_residual_of(y: &SampledFn, idx: FracIndex, a: f64) -> Result<SampledFn> {
    let grid = *y.grid();
    let (mu, nu) = (idx.mu(), idx.nu());
    let dy = differentiate(y.values(), grid.step());
    let caputo = if nu < 1.0 {
        caputo_derivative(y, nu)?
    } else {
        SampledFn::with_origin(grid, dy.clone(), Origin::Unset)?
    };
    let values = grid
        .nodes()
        .enumerate()
        .map(|(k, t)| {
            if k == 0 {
                f64::NAN
            } else {
                a * nu * caputo.value(k) - t * dy[k] - (1.0 - mu) * y.value(k)
            }
        })
        .collect();
    SampledFn::with_origin(grid, values, Origin::Unset)
}

/// Nodewise aν D^ν_C y − t y′ − (1−μ) y for y = R_{μ,ν}(a, ·).
pub fn residual_ode(idx: FracIndex, a: f64, grid: &TimeGrid, cfg: &RConfig) -> Result<SampledFn> {
    let y = sample_r(idx, a, grid, cfg)?;
    ode_residual_of(&y, idx, a)
}

/// Convenience: R_{μ,ν}(a, ·) sampled on a grid (zero at t = 0).
pub fn sample_r_profile(
    idx: FracIndex,
    a: f64,
    grid: &TimeGrid,
    cfg: &RConfig,
) -> Result<SampledFn> {
    if a > 0.0 {
        return sample_r(idx, a, grid, cfg);
    }
    let values = grid
        .nodes()
        .map(|t| {
            if t > 0.0 {
                r_eval(idx, a, t, cfg)
            } else {
                Ok(f64::NAN)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SampledFn::with_origin(*grid, values, Origin::Unset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(2.0, n).unwrap()
    }

    fn max_err(f: &SampledFn, exact: impl Fn(f64) -> f64) -> f64 {
        max_err_from(f, 0.0, exact)
    }

    fn max_err_from(f: &SampledFn, t0: f64, exact: impl Fn(f64) -> f64) -> f64 {
        f.grid()
            .nodes()
            .enumerate()
            .skip(1)
            .filter(|&(_, t)| t >= t0)
            .map(|(k, t)| (f.value(k) - exact(t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 4).is_err());
        let g = grid(8);
        assert_eq!(g.len(), 9);
        assert_eq!(g.node(8), 2.0);
        assert_eq!(g.refined().n_steps(), 16);
    }

    #[test]
    fn integer_order_is_trapezoid() {
        let g = grid(10);
        let f = SampledFn::from_fn(g, |t| (3.0 * t).sin());
        let i = rl_integral(&f, 1.0).unwrap();
        let h = g.step();
        let mut acc = 0.0;
        for k in 1..g.len() {
            acc += 0.5 * h * (f.value(k) + f.value(k - 1));
            assert!((i.value(k) - acc).abs() < 1e-14);
        }
    }

    #[test]
    fn integral_power_rules() {
        let g = grid(64);
        let one = SampledFn::from_fn(g, |_| 1.0);
        assert!(max_err(&rl_integral(&one, 1.0).unwrap(), |t| t) < 1e-13);
        let lin = SampledFn::from_fn(g, |t| t);
        assert!(max_err(&rl_integral(&lin, 1.0).unwrap(), |t| t * t / 2.0) < 1e-3);
        // Linear data is reproduced exactly by the piecewise-linear scheme.
        let half = rl_integral(&lin, 0.5).unwrap();
        assert!(max_err(&half, |t| t.powf(1.5) / gamma(2.5)) < 1e-12);
        assert_relative_eq!(1.0 / gamma(2.5), 0.752_252_778_1, max_relative = 1e-9);
    }

    #[test]
    fn singular_first_panel_is_exact_for_power_law() {
        let g = grid(32);
        let p = -0.4;
        let f = SampledFn::from_fn_singular(g, p, |t| t.powf(p)).unwrap();
        let mu = 0.7;
        let i = rl_integral(&f, mu).unwrap();
        let exact = |t: f64| gamma(p + 1.0) / gamma(p + mu + 1.0) * t.powf(p + mu);
        assert!(max_err(&i, exact) < 1e-13);
        // A regular remainder on top of the singular part converges.
        let mixed = |t: f64| 2.0 * t.powf(p) + t.cos();
        let exact = |t: f64| {
            let sing = 2.0 * gamma(p + 1.0) / gamma(p + mu + 1.0) * t.powf(p + mu);
            let reg = rl_integral(
                &SampledFn::from_fn(TimeGrid::new(t, 4096).unwrap(), f64::cos),
                mu,
            )
            .unwrap();
            sing + reg.value(4096)
        };
        let coarse = max_err(
            &rl_integral(&SampledFn::from_fn_singular(g, p, mixed).unwrap(), mu).unwrap(),
            exact,
        );
        let fine = max_err(
            &rl_integral(
                &SampledFn::from_fn_singular(g.refined(), p, mixed).unwrap(),
                mu,
            )
            .unwrap(),
            exact,
        );
        assert!(coarse < 1e-2 && fine < coarse / 1.5, "{coarse} {fine}");
    }

    #[test]
    fn caputo_power_rules() {
        let g = grid(256);
        let c = SampledFn::from_fn(g, |_| 4.2);
        assert_eq!(max_err(&caputo_derivative(&c, 0.4).unwrap(), |_| 0.0), 0.0);
        let lin = SampledFn::from_fn(g, |t| t);
        assert!(
            max_err(&caputo_derivative(&lin, 0.5).unwrap(), |t| 2.0 * t.sqrt()
                / PI.sqrt())
                < 1e-12
        );
        let sq = SampledFn::from_fn(g, |t| t * t);
        let e = max_err(&caputo_derivative(&sq, 0.5).unwrap(), |t| {
            2.0 * t.powf(1.5) / gamma(2.5)
        });
        assert!(e < 1e-3, "{e}");
    }

    #[test]
    fn rl_derivative_power_rules() {
        let g = grid(256);
        let one = SampledFn::from_fn(g, |_| 1.0);
        let e = max_err(&rl_derivative(&one, 0.5).unwrap(), |t| {
            1.0 / (PI * t).sqrt()
        });
        assert!(e < 1e-12, "{e}");
        let lin = SampledFn::from_fn(g, |t| t);
        let d = rl_derivative(&lin, 0.5).unwrap();
        let exact = |t: f64| 2.0 * t.sqrt() / PI.sqrt();
        assert!(max_err(&d, exact) < 1e-2);
        assert!(
            max_err_from(&d, 0.1, exact) < 1e-4,
            "{}",
            max_err_from(&d, 0.1, exact)
        );
        let root = SampledFn::from_fn(g, |t| t.sqrt());
        let d = rl_derivative(&root, 0.5).unwrap();
        assert!(max_err_from(&d, 0.1, |_| PI.sqrt() / 2.0) < 1e-2);
    }

    #[test]
    fn caputo_rl_link() {
        let g = grid(128);
        let f = SampledFn::from_fn(g, |t| 1.5 + t.sin());
        let rl = rl_derivative(&f, 0.3).unwrap();
        let cap = caputo_derivative(&f, 0.3).unwrap();
        let e = g
            .nodes()
            .enumerate()
            .skip(1)
            .map(|(k, t)| (rl.value(k) - cap.value(k) - 1.5 * t.powf(-0.3) / gamma(0.7)).abs())
            .fold(0.0, f64::max);
        assert!(e < 1e-2, "{e}");
    }

    #[test]
    fn residual_evaluator_plug_in() {
        let g = grid(64);
        let idx = FracIndex::new(0.4, 0.3).unwrap();
        let y = SampledFn::from_fn(g, |_| 1.0);
        let r = ode_residual_of(&y, idx, 2.0).unwrap();
        for k in 1..g.len() {
            assert!((r.value(k) + 0.6).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_shrink_with_refinement() {
        let cfg = RConfig::default();
        let idx = FracIndex::new(1.0, 0.5).unwrap();
        let coarse = residual_int_eq(idx, 1.0, &grid(128), &cfg)
            .unwrap()
            .max_abs();
        let fine = residual_int_eq(idx, 1.0, &grid(256), &cfg)
            .unwrap()
            .max_abs();
        assert!(coarse / fine > 2.5, "{coarse} {fine}");
        assert!(residual_int_eq(FracIndex::new(0.0, 0.5).unwrap(), 1.0, &grid(16), &cfg).is_err());
    }
}

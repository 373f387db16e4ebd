//! The auxiliary function R_{μ,ν}(a,t) = L⁻¹{s^{−μ} e^{−a s^ν}}(t).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use super::gamma::{erfc, rgamma};
use super::wright::{sum_with, Coef};
use super::{delta_mu, FracIndex, SeriesConfig};
use crate::error::{domain, Error, Result};
use crate::laplace::{invert_log, InversionConfig, CONTOUR_APEX};
use crate::quad::{integrate, integrate_to_infinity, integrate_to_infinity_capped, QuadConfig};

/// Upper bound on the contour node count after saddle-point adaptation.
const MAX_CONTOUR_NODES: usize = 1024;

/// Tolerances for every evaluation route of R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RConfig {
    pub series: SeriesConfig,
    pub inversion: InversionConfig,
    pub quad: QuadConfig,
}

impl Default for RConfig {
    fn default() -> Self {
        Self {
            series: SeriesConfig::default(),
            inversion: InversionConfig::default(),
            quad: QuadConfig {
                abs_tol: 1e-11,
                rel_tol: 1e-10,
                max_subdivisions: 4000,
            },
        }
    }
}

/// Which evaluation route produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RMethod {
    /// Wright-function series.
    Series,
    /// Numerical Laplace inversion.
    Laplace,
    /// Real-axis integral representation.
    Integral,
    /// Erfc/Gaussian closed forms at ν = 1/2.
    ClosedForm,
    /// The a = 0 limit δ_μ(t), or the shifted pulse at ν = 1.
    Pulse,
}

impl fmt::Display for RMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Series => "series",
            Self::Laplace => "laplace",
            Self::Integral => "integral",
            Self::ClosedForm => "closed-form",
            Self::Pulse => "pulse",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct REvaluation {
    pub value: f64,
    pub method: RMethod,
    /// The series was attempted but rejected in favour of Laplace inversion.
    pub failover: bool,
}

impl REvaluation {
    fn new(value: f64, method: RMethod) -> Self {
        Self {
            value,
            method,
            failover: false,
        }
    }
}

fn check_at(a: f64, t: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("R needs a finite a > 0 on this route, got {a}"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("R needs a finite t > 0, got {t}"));
    }
    Ok(())
}

fn require_diffusive(idx: &FracIndex, route: &str) -> Result<()> {
    if !idx.is_diffusive() {
        return domain(format!(
            "the {route} route needs nu <= 1/2, got {}",
            idx.nu()
        ));
    }
    Ok(())
}

/// Closed forms at ν = 1/2 for μ ∈ {0, 1/2, 1}.
pub fn r_closed_form_half(mu: f64, a: f64, t: f64) -> Result<f64> {
    if !(a >= 0.0) || !(t > 0.0) {
        return domain(format!(
            "closed form needs a >= 0 and t > 0, got a = {a}, t = {t}"
        ));
    }
    let gauss = (-a * a / (4.0 * t)).exp();
    if mu == 0.0 {
        Ok(a * gauss / (2.0 * (PI * t * t * t).sqrt()))
    } else if mu == 0.5 {
        Ok(gauss / (PI * t).sqrt())
    } else if mu == 1.0 {
        Ok(erfc(a / (2.0 * t.sqrt())))
    } else {
        domain(format!(
            "closed forms exist only for mu in {{0, 1/2, 1}}, got {mu}"
        ))
    }
}

fn has_closed_form(idx: &FracIndex) -> bool {
    idx.nu() == 0.5 && [0.0, 0.5, 1.0].contains(&idx.mu())
}

/// R at ν = 1: the shifted pulse δ_μ(t − a).
fn shifted_pulse(mu: f64, a: f64, t: f64) -> Result<f64> {
    let s = t - a;
    if s > 0.0 {
        return if mu == 0.0 { Ok(0.0) } else { delta_mu(mu, s) };
    }
    if s < 0.0 {
        return Ok(0.0);
    }
    if mu > 1.0 {
        Ok(0.0)
    } else if mu == 1.0 {
        Ok(1.0)
    } else {
        Err(Error::SymbolicOnly(format!(
            "R_{{{mu},1}} is singular at t = a"
        )))
    }
}

/// Laplace-inversion route; the only one valid for ν > 1/2.
///
/// The contour is widened so that it passes to the right of the saddle
/// point of e^{st − a s^ν}, which keeps the relative accuracy when R is
/// exponentially small.
pub fn r_laplace(idx: FracIndex, a: f64, t: f64, inv: &InversionConfig) -> Result<f64> {
    inv.validate()?;
    if !(a >= 0.0 && a.is_finite()) || !(t > 0.0 && t.is_finite()) {
        return domain(format!(
            "Laplace route needs a >= 0 and t > 0, got a = {a}, t = {t}"
        ));
    }
    let (mu, nu) = (idx.mu(), idx.nu());
    if nu == 1.0 {
        return shifted_pulse(mu, a, t);
    }
    let base = inv.contour_scale * inv.node_count as f64 / t;
    let saddle = (a * nu / t).powf(1.0 / (1.0 - nu));
    let lambda = base.max(saddle / CONTOUR_APEX);
    let mut nodes = inv
        .node_count
        .max((lambda * t).ceil() as usize)
        .min(MAX_CONTOUR_NODES);
    nodes += nodes % 2;
    let cfg = InversionConfig {
        node_count: nodes,
        contour_scale: lambda * t / nodes as f64,
        working_precision_guard: inv.working_precision_guard,
    };
    invert_log(|s: Complex64| -mu * s.ln() - a * s.powf(nu), t, &cfg)
}

fn series_value(
    idx: &FracIndex,
    a: f64,
    t: f64,
    cfg: &SeriesConfig,
    coefs: Option<&[Coef]>,
) -> Option<f64> {
    let z = a * t.powf(-idx.nu());
    if z > cfg.max_argument {
        return None;
    }
    let sum = match coefs {
        Some(c) => sum_with(-z, |j| c[j], cfg),
        None => sum_with(-z, |j| Coef::new(j, -idx.nu(), idx.mu()), cfg),
    }
    .ok()?;
    let value = t.powf(idx.mu() - 1.0) * sum.value;
    (sum.cancellation <= cfg.max_cancellation && value.is_finite()).then_some(value)
}

fn series_route(
    idx: &FracIndex,
    a: f64,
    t: f64,
    cfg: &RConfig,
    coefs: Option<&[Coef]>,
) -> Result<REvaluation> {
    match series_value(idx, a, t, &cfg.series, coefs) {
        Some(v) => Ok(REvaluation::new(v, RMethod::Series)),
        None => {
            let value = r_laplace(*idx, a, t, &cfg.inversion)?;
            Ok(REvaluation {
                value,
                method: RMethod::Laplace,
                failover: true,
            })
        }
    }
}

/// Series route t^{μ−1} W(−a t^{−ν}; −ν, μ), falling back to Laplace
/// inversion for large arguments or heavy cancellation.
pub fn r_series(idx: FracIndex, a: f64, t: f64, cfg: &RConfig) -> Result<REvaluation> {
    cfg.series.validate()?;
    require_diffusive(&idx, "series")?;
    check_at(a, t)?;
    series_route(&idx, a, t, cfg, None)
}

/// Φ(x)/μ − (1 − e^{−x})/x with Φ(x) = ₁F₁(1; 1+μ; −x), for μ > 0, x ≥ 0.
fn kummer_excess(mu: f64, x: f64) -> f64 {
    if mu == 1.0 {
        return 0.0;
    }
    if x <= 40.0 {
        let mut p = 1.0;
        let mut s = 1.0 / mu;
        let mut k = 0.0;
        loop {
            k += 1.0;
            p *= x / k;
            let term = p / (mu + k);
            s += term;
            if term < 1e-17 * s {
                break;
            }
        }
        let first = if x < 1e-8 {
            1.0 - 0.5 * x
        } else {
            -(-x).exp_m1() / x
        };
        (-x).exp() * s - first
    } else {
        // Asymptotic series Σ_{n≥1} (1−μ)_n x^{−n−1}.
        let mut term = 1.0 / x;
        let mut s = 0.0;
        let mut last = f64::INFINITY;
        for n in 1..200 {
            term *= (n as f64 - mu) / x;
            if term == 0.0 || term.abs() > last {
                break;
            }
            s += term;
            last = term.abs();
            if term.abs() < 1e-17 * s.abs() {
                break;
            }
        }
        s
    }
}

/// Real-axis integral route, for ν ≤ 1/2.
///
/// In the variable w = z^ν the μ = 0 representation is
/// (1/(πν)) ∫ w^{1/ν−1} e^{−t w^{1/ν}} e^{−a w cos πν} sin(a w sin πν) dw.
/// For μ > 0 the factor e^{−tz} becomes its μ-fold integral in t,
/// t^μ ₁F₁(1; 1+μ; −zt)/Γ(1+μ); its 1/z tail is split off and integrated
/// in closed form as δ_μ(t) R_{1,ν}(a,t).
pub fn r_real_integral(idx: FracIndex, a: f64, t: f64, quad: &QuadConfig) -> Result<f64> {
    require_diffusive(&idx, "real-axis integral")?;
    check_at(a, t)?;
    let (mu, nu) = (idx.mu(), idx.nu());
    let (c, s) = (a * (PI * nu).cos(), a * (PI * nu).sin());
    let p = 1.0 / nu;
    let scale = t.powf(-nu).min(2.0 / s).max(1e-3);
    let pref = 1.0 / (PI * nu);
    if mu == 0.0 {
        let f =
            |w: f64| Ok(pref * w.powf(p - 1.0) * (-t * w.powf(p) - c * w).exp() * (s * w).sin());
        return Ok(integrate_to_infinity(f, 0.0, scale, quad)?.value);
    }
    let step = |w: f64| Ok(pref * (-t * w.powf(p) - c * w).exp() * (s * w).sin() / w);
    let r1 = 1.0 - integrate_to_infinity(step, 0.0, scale, quad)?.value;
    let dm = delta_mu(mu, t)?;
    if mu == 1.0 {
        return Ok(r1);
    }
    let excess = |w: f64| {
        let z = w.powf(p);
        Ok(pref * w.powf(p - 1.0) * t * kummer_excess(mu, t * z) * (-c * w).exp() * (s * w).sin())
    };
    // Without exponential damping (ν = 1/2) the excess decays only
    // algebraically while oscillating; keep panels a few periods wide.
    let max_width = if c > 1e-3 * a {
        f64::INFINITY
    } else {
        16.0 * PI / s
    };
    let rest = integrate_to_infinity_capped(excess, 0.0, scale, max_width, quad)?.value;
    Ok(dm * (r1 + rest))
}

fn dispatch(
    idx: &FracIndex,
    a: f64,
    t: f64,
    cfg: &RConfig,
    coefs: Option<&[Coef]>,
) -> Result<REvaluation> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("R needs a finite t > 0, got {t}"));
    }
    if !(a >= 0.0) || a.is_nan() {
        return domain(format!("R needs a >= 0, got {a}"));
    }
    if a == f64::INFINITY {
        return Ok(REvaluation::new(0.0, RMethod::Pulse));
    }
    if a == 0.0 {
        return delta_mu(idx.mu(), t).map(|v| REvaluation::new(v, RMethod::Pulse));
    }
    if idx.nu() == 1.0 {
        return shifted_pulse(idx.mu(), a, t).map(|v| REvaluation::new(v, RMethod::Pulse));
    }
    if has_closed_form(idx) {
        return r_closed_form_half(idx.mu(), a, t)
            .map(|v| REvaluation::new(v, RMethod::ClosedForm));
    }
    if idx.is_diffusive() {
        series_route(idx, a, t, cfg, coefs)
    } else {
        r_laplace(*idx, a, t, &cfg.inversion).map(|v| REvaluation::new(v, RMethod::Laplace))
    }
}

/// Route dispatcher: pulse limit at a = 0, closed forms at ν = 1/2, series
/// with Laplace fallback for ν ≤ 1/2, Laplace otherwise.
pub fn r_eval_detailed(idx: FracIndex, a: f64, t: f64, cfg: &RConfig) -> Result<REvaluation> {
    dispatch(&idx, a, t, cfg, None)
}

pub fn r_eval(idx: FracIndex, a: f64, t: f64, cfg: &RConfig) -> Result<f64> {
    r_eval_detailed(idx, a, t, cfg).map(|e| e.value)
}

/// ∂R_{μ,ν}/∂a = −R_{μ−ν,ν}, valid for μ ≥ ν.
pub fn r_partial_a(idx: FracIndex, a: f64, t: f64, cfg: &RConfig) -> Result<f64> {
    if idx.mu() < idx.nu() {
        return domain(format!(
            "the a-derivative formula needs mu >= nu, got mu = {}, nu = {}",
            idx.mu(),
            idx.nu()
        ));
    }
    if !(a > 0.0) {
        return domain(format!("the a-derivative formula needs a > 0, got {a}"));
    }
    Ok(-r_eval(
        FracIndex::new(idx.mu() - idx.nu(), idx.nu())?,
        a,
        t,
        cfg,
    )?)
}

/// Both sides of an integral identity for R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IntegralCheck {
    pub fn abs_diff(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// lhs = R_{μ+ν,ν}(a,t), rhs = ∫_a^∞ R_{μ,ν}(z,t) dz.
pub fn r_tail_integral_check(
    idx: FracIndex,
    a: f64,
    t: f64,
    cfg: &RConfig,
) -> Result<IntegralCheck> {
    check_at(a, t)?;
    let f = RFunction::new(idx, *cfg)?;
    let lhs = r_eval(idx.shifted(idx.nu())?, a, t, cfg)?;
    let rhs = integrate_to_infinity(|z| f.eval(z, t), a, t.powf(idx.nu()), &cfg.quad)?.value;
    Ok(IntegralCheck { lhs, rhs })
}

/// lhs = ∫_{−∞}^{∞} ½ R_{μ,ν}(|z|,t) dz, rhs = δ_{μ+ν}(t).
pub fn r_line_integral_check(idx: FracIndex, t: f64, cfg: &RConfig) -> Result<IntegralCheck> {
    if !(idx.mu() + idx.nu() > 0.0) {
        return domain("the line integral needs mu + nu > 0");
    }
    if !(t > 0.0) {
        return domain(format!("the line integral needs t > 0, got {t}"));
    }
    let f = RFunction::new(idx, *cfg)?;
    let scale = t.powf(idx.nu());
    // Split at the scale so the first panel sees the a → 0 behaviour.
    let head = integrate(|z| f.eval(z, t), 0.0, scale, &cfg.quad)?.value;
    let tail = integrate_to_infinity(|z| f.eval(z, t), scale, scale, &cfg.quad)?.value;
    Ok(IntegralCheck {
        lhs: head + tail,
        rhs: delta_mu(idx.mu() + idx.nu(), t)?,
    })
}

/// R_{μ,ν} with the series coefficients precomputed, for repeated
/// evaluation at many (a, t).
#[derive(Debug, Clone)]
pub struct RFunction {
    idx: FracIndex,
    cfg: RConfig,
    coefs: Vec<Coef>,
    pulse_coefficient: f64,
}

impl RFunction {
    pub fn new(idx: FracIndex, cfg: RConfig) -> Result<Self> {
        cfg.series.validate()?;
        cfg.inversion.validate()?;
        let coefs = if idx.is_diffusive() && !has_closed_form(&idx) {
            (0..cfg.series.max_terms)
                .map(|j| Coef::new(j, -idx.nu(), idx.mu()))
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            idx,
            cfg,
            coefs,
            pulse_coefficient: rgamma(idx.mu()),
        })
    }

    pub fn index(&self) -> FracIndex {
        self.idx
    }

    pub fn eval_detailed(&self, a: f64, t: f64) -> Result<REvaluation> {
        if a == 0.0 && self.idx.mu() > 0.0 && t > 0.0 {
            return Ok(REvaluation::new(
                self.pulse_coefficient * t.powf(self.idx.mu() - 1.0),
                RMethod::Pulse,
            ));
        }
        let coefs = (!self.coefs.is_empty()).then_some(self.coefs.as_slice());
        dispatch(&self.idx, a, t, &self.cfg, coefs)
    }

    pub fn eval(&self, a: f64, t: f64) -> Result<f64> {
        self.eval_detailed(a, t).map(|e| e.value)
    }
}

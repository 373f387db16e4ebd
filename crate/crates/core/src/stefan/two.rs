//! The subcooled half-space: u = 0 on a moving boundary, u = −1 far away
//! and initially, and a unit source in the interface condition.
//!
//! The density and the boundary are marched in time as
//!   φ(τ) = c·s(τ) + ψ(τ),   η(τ) = 2λ₀τ^ν + ζ(τ),
//! where c·s and 2λ₀τ^ν carry the small-time similarity behaviour (s is
//! δ_{1−2ν} for Caputo at ν < ½ and a Dirac mass otherwise), ψ is piecewise
//! constant and ζ piecewise linear with ζ(0) = 0.

use std::sync::OnceLock;

use super::speed_factor;
use crate::error::{domain, Error, Result};
use crate::fracquad::{L1Stencil, Origin, SampledFn, TimeGrid};
use crate::ibvp::{DerivativeKind, LayerPotential};
use crate::par;
use crate::quad::{integrate, GaussLegendre, QuadConfig};
use crate::roots::find_root;
use crate::specfun::{delta_mu, gamma, RConfig};

/// Smallest grid the marching scheme accepts.
pub const MIN_STEPS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stefan2Config {
    pub r: RConfig,
    /// Newton stops once both scaled residuals fall below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step-length reduction factor of the backtracking line search.
    pub damping: f64,
}

impl Default for Stefan2Config {
    fn default() -> Self {
        Self {
            r: RConfig::default(),
            tolerance: 1e-10,
            max_iterations: 50,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Layer,
    Flux,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Leading {
    Dirac,
    /// s = δ_order with order ∈ (0, 1).
    Power(f64),
}

fn rule(n: usize) -> &'static GaussLegendre {
    static FAR: OnceLock<GaussLegendre> = OnceLock::new();
    static NEAR: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        6 => FAR.get_or_init(|| GaussLegendre::new(6)),
        _ => NEAR.get_or_init(|| GaussLegendre::new(8)),
    }
}

#[derive(Debug, Clone)]
struct Marcher {
    kind: DerivativeKind,
    nu: f64,
    r: f64,
    grid: TimeGrid,
    potential: LayerPotential,
    leading: Leading,
    amplitude: f64,
    lambda0: f64,
}

impl Marcher {
    fn exponent(&self, field: Field) -> f64 {
        match field {
            Field::Layer => 2.0 * self.nu,
            Field::Flux => self.nu,
        }
    }

    fn kernel(&self, field: Field, a: f64, sigma: f64) -> Result<f64> {
        match field {
            Field::Layer => self.potential.layer(a, sigma),
            Field::Flux => self.potential.flux(a, sigma),
        }
    }

    /// Right-hand side of the boundary condition.
    fn forcing(&self, t: f64) -> Result<f64> {
        match self.kind {
            DerivativeKind::Caputo => Ok(1.0),
            DerivativeKind::RiemannLiouville => delta_mu(2.0 * self.nu, t),
        }
    }

    fn similarity_eta(&self, tau: f64) -> f64 {
        2.0 * self.lambda0 * tau.powf(self.nu)
    }

    fn eta(&self, zeta: &[f64], tau: f64) -> f64 {
        let h = self.grid.step();
        let pos = tau / h;
        let k = (pos.floor() as usize).min(zeta.len().saturating_sub(2));
        let frac = pos - k as f64;
        self.similarity_eta(tau) + zeta[k] + (zeta[k + 1] - zeta[k]) * frac
    }

    fn leading_density(&self, tau: f64) -> f64 {
        match self.leading {
            Leading::Dirac => 0.0,
            Leading::Power(order) => tau.powf(order - 1.0) / gamma(order),
        }
    }

    /// Quadrature points (τ, t − τ, weight for ∫K, weight for ∫K·s) on one
    /// panel [lo, hi] ⊂ [0, t]. The gap t − τ is carried separately because
    /// it is far below the resolution of t near the touching end.
    fn panel_points(
        &self,
        field: Field,
        t: f64,
        lo: f64,
        hi: f64,
        out: &mut Vec<(f64, f64, f64, f64)>,
    ) {
        let touching = hi >= t;
        let singular_start = lo == 0.0 && matches!(self.leading, Leading::Power(_));
        if touching && singular_start {
            let mid = 0.5 * (lo + hi);
            self.panel_points(field, t, lo, mid, out);
            self.panel_points(field, t, mid, hi, out);
        } else if touching {
            // σ = w^{1/p} absorbs the σ^{p−1} behaviour at τ = t.
            let p = self.exponent(field);
            for (w, weight) in rule(8).points(0.0, (t - lo).powf(p)) {
                let sigma = w.powf(1.0 / p);
                let tau = t - sigma;
                let plain = weight * sigma / (p * w);
                out.push((tau, sigma, plain, plain * self.leading_density(tau)));
            }
        } else if let (true, Leading::Power(order)) = (singular_start, self.leading) {
            // τ = w^{1/order} turns δ_order(τ) dτ into dw/Γ(order + 1).
            let scale = 1.0 / gamma(order + 1.0);
            out.extend(rule(8).points(0.0, hi.powf(order)).map(|(w, weight)| {
                let tau = w.powf(1.0 / order);
                (tau, t - tau, 0.0, weight * scale)
            }));
            out.extend(
                rule(8)
                    .points(lo, hi)
                    .map(|(tau, weight)| (tau, t - tau, weight, 0.0)),
            );
        } else {
            out.extend(
                rule(6).points(lo, hi).map(|(tau, weight)| {
                    (tau, t - tau, weight, weight * self.leading_density(tau))
                }),
            );
        }
    }

    /// (∫ K·s, ∫ K) over one panel.
    fn panel(
        &self,
        field: Field,
        x: f64,
        t: f64,
        lo: f64,
        hi: f64,
        zeta: &[f64],
    ) -> Result<(f64, f64)> {
        let mut points = Vec::with_capacity(24);
        self.panel_points(field, t, lo, hi, &mut points);
        let (mut with_s, mut plain) = (0.0, 0.0);
        for (tau, sigma, w_plain, w_s) in points {
            let k = self.kernel(field, x - self.eta(zeta, tau), sigma)?;
            plain += k * w_plain;
            with_s += k * w_s;
        }
        Ok((with_s, plain))
    }
}

fn start_quad() -> QuadConfig {
    QuadConfig::with_tolerances(1e-12, 1e-9)
}

/// Value of a potential and the weight of the last density panel in it.
#[derive(Debug, Clone, Copy)]
struct PotentialValue {
    value: f64,
    last_weight: f64,
}

impl Marcher {
    /// ∫₀ᵗ K(x − η(τ), t − τ) φ(τ) dτ with `psi[k]` the density on panel k
    /// (index 0 unused) and `zeta` holding ζ at every node up to ⌈t/h⌉.
    fn potential(
        &self,
        field: Field,
        x: f64,
        t: f64,
        zeta: &[f64],
        psi: &[f64],
    ) -> Result<PotentialValue> {
        let h = self.grid.step();
        let panels = ((t / h) * (1.0 - 1e-14)).ceil().max(1.0) as usize;
        let parts = par::try_map_range(panels, |i| {
            let lo = i as f64 * h;
            let hi = if i + 1 == panels {
                t
            } else {
                (i + 1) as f64 * h
            };
            self.panel(field, x, t, lo, hi, zeta)
        })?;
        let mut value = match self.leading {
            Leading::Dirac => self.amplitude * self.kernel(field, x, t)?,
            Leading::Power(_) => 0.0,
        };
        for (k, (with_s, plain)) in parts.iter().enumerate() {
            value += self.amplitude * with_s + psi[k + 1] * plain;
        }
        Ok(PotentialValue {
            value,
            last_weight: parts[panels - 1].1,
        })
    }

    /// Potential of the leading term alone along η = 2λτ^ν, by adaptive
    /// quadrature.
    fn similarity_potential(&self, field: Field, lambda: f64, t: f64) -> Result<f64> {
        let nu = self.nu;
        let at = |tau: f64, sigma: f64| {
            self.kernel(field, 2.0 * lambda * (t.powf(nu) - tau.powf(nu)), sigma)
        };
        let Leading::Power(order) = self.leading else {
            return at(0.0, t);
        };
        let mid = 0.5 * t;
        let head = integrate(
            |w| {
                let tau = w.powf(1.0 / order);
                at(tau, t - tau)
            },
            0.0,
            mid.powf(order),
            &start_quad(),
        )?
        .value
            / gamma(order + 1.0);
        let p = self.exponent(field);
        let tail = integrate(
            |w| {
                if w <= 0.0 {
                    return Ok(0.0);
                }
                let sigma = w.powf(1.0 / p);
                Ok(at(t - sigma, sigma)? * sigma / (p * w) * self.leading_density(t - sigma))
            },
            0.0,
            mid.powf(p),
            &start_quad(),
        )?
        .value;
        Ok(head + tail)
    }

    /// Fixes (c, λ₀) from the two conditions at t₁ with the unit source
    /// dropped, which is its small-time balance.
    fn start(&mut self) -> Result<()> {
        let t1 = self.grid.node(1);
        let forcing = self.forcing(t1)?;
        let speed = self.r * speed_factor(self.nu) * t1.powf(-self.nu);
        let balance = |lambda: f64| -> Result<f64> {
            let layer = self.similarity_potential(Field::Layer, lambda, t1)?;
            let flux = self.similarity_potential(Field::Flux, lambda, t1)?;
            Ok(speed * lambda + forcing / layer * flux)
        };
        let mut lo = -0.25;
        while balance(lo)? > 0.0 {
            lo *= 2.0;
            if lo < -1e3 {
                return Err(Error::NoRoot { lo, hi: 0.0 });
            }
        }
        let lambda = find_root(balance, lo, 0.0, 1e-13)?;
        self.lambda0 = lambda;
        self.amplitude = forcing / self.similarity_potential(Field::Layer, lambda, t1)?;
        Ok(())
    }
}

/// Result of one converged step.
struct StepOutcome {
    residuals: [f64; 2],
    iterations: usize,
}

struct March<'a> {
    m: &'a Marcher,
    stencil: L1Stencil,
    zeta: Vec<f64>,
    psi: Vec<f64>,
}

impl March<'_> {
    /// Unscaled residuals of the boundary and interface conditions at node
    /// n, with the ψ-columns of the Jacobian.
    fn residuals(&mut self, n: usize, psi: f64, zeta: f64) -> Result<([f64; 2], [f64; 2])> {
        let m = self.m;
        let t = m.grid.node(n);
        self.zeta[n] = zeta;
        self.psi[n] = psi;
        let zeta = &self.zeta[..=n];
        let x = m.eta(zeta, t);
        let layer = m.potential(Field::Layer, x, t, zeta, &self.psi)?;
        let flux = m.potential(Field::Flux, x, t, zeta, &self.psi)?;
        let derivative =
            speed_factor(m.nu) * m.lambda0 * t.powf(-m.nu) + self.stencil.apply(zeta, n);
        let res = [
            layer.value - m.forcing(t)?,
            m.r * derivative - 1.0 + flux.value,
        ];
        Ok((res, [layer.last_weight, flux.last_weight]))
    }

    fn step(&mut self, n: usize, cfg: &Stefan2Config) -> Result<StepOutcome> {
        let m = self.m;
        let t = m.grid.node(n);
        let scale = [
            m.forcing(t)?.abs().max(f64::MIN_POSITIVE),
            1.0 + m.r * speed_factor(m.nu) * m.lambda0.abs() * t.powf(-m.nu),
        ];
        let size = |e: &[f64; 2]| (e[0] / scale[0]).abs().max((e[1] / scale[1]).abs());
        let mut psi = self.psi[n - 1];
        let mut zeta = if n >= 2 {
            2.0 * self.zeta[n - 1] - self.zeta[n - 2]
        } else {
            0.0
        };
        let (mut res, mut dpsi) = self.residuals(n, psi, zeta)?;
        for iteration in 0..=cfg.max_iterations {
            if size(&res) <= cfg.tolerance {
                self.residuals(n, psi, zeta)?;
                return Ok(StepOutcome {
                    residuals: [res[0].abs(), res[1].abs()],
                    iterations: iteration,
                });
            }
            if iteration == cfg.max_iterations {
                break;
            }
            let dz = 1e-7 * (1.0 + zeta.abs());
            let (shifted, _) = self.residuals(n, psi, zeta + dz)?;
            let dzeta = [(shifted[0] - res[0]) / dz, (shifted[1] - res[1]) / dz];
            let det = dpsi[0] * dzeta[1] - dzeta[0] * dpsi[1];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let step_psi = -(res[0] * dzeta[1] - dzeta[0] * res[1]) / det;
            let step_zeta = -(dpsi[0] * res[1] - res[0] * dpsi[1]) / det;
            let mut length = 1.0;
            loop {
                let (trial, trial_dpsi) =
                    self.residuals(n, psi + length * step_psi, zeta + length * step_zeta)?;
                if size(&trial) < size(&res) || length < 1e-3 {
                    psi += length * step_psi;
                    zeta += length * step_zeta;
                    res = trial;
                    dpsi = trial_dpsi;
                    break;
                }
                length *= cfg.damping;
            }
        }
        Err(Error::NewtonFailure {
            step: n,
            t,
            residuals: res,
        })
    }
}

/// Trajectory of the marching solver.
#[derive(Debug, Clone)]
pub struct Stefan2State {
    pub kind: DerivativeKind,
    pub nu: f64,
    pub r: f64,
    pub grid: TimeGrid,
    /// Weight c of the leading density term.
    pub amplitude: f64,
    /// Small-time similarity constant: η ≈ 2λ₀t^ν.
    pub lambda0: f64,
    pub eta: SampledFn,
    /// Regular part of φ⁻ at the nodes; a Dirac mass of weight `amplitude`
    /// at the origin is not included.
    pub phi_minus: SampledFn,
    pub residual_bc: Vec<f64>,
    pub residual_stefan: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Whether η is non-decreasing on the grid.
    pub monotone: bool,
    marcher: Marcher,
    zeta: Vec<f64>,
    psi: Vec<f64>,
}

pub fn stefan2_solve(
    kind: DerivativeKind,
    nu: f64,
    r: f64,
    grid: TimeGrid,
    cfg: &Stefan2Config,
) -> Result<Stefan2State> {
    super::check_nu(nu)?;
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("r must be positive, got {r}"));
    }
    if grid.n_steps() < MIN_STEPS {
        return domain(format!(
            "the marching scheme needs at least {MIN_STEPS} steps, got {}",
            grid.n_steps()
        ));
    }
    let order = 1.0 - 2.0 * nu;
    let leading = if kind == DerivativeKind::Caputo && order > 0.0 {
        Leading::Power(order)
    } else {
        Leading::Dirac
    };
    let mut marcher = Marcher {
        kind,
        nu,
        r,
        grid,
        potential: LayerPotential::new(nu, 1.0, &cfg.r)?,
        leading,
        amplitude: 0.0,
        lambda0: 0.0,
    };
    marcher.start()?;
    let len = grid.len();
    let mut march = March {
        m: &marcher,
        stencil: L1Stencil::new(2.0 * nu, &grid)?,
        zeta: vec![0.0; len],
        psi: vec![0.0; len],
    };
    let mut residual_bc = vec![0.0; len];
    let mut residual_stefan = vec![0.0; len];
    let mut iterations = vec![0; len];
    for n in 1..len {
        let out = march.step(n, cfg)?;
        [residual_bc[n], residual_stefan[n]] = out.residuals;
        iterations[n] = out.iterations;
    }
    let (zeta, psi) = (march.zeta, march.psi);
    let eta_values: Vec<f64> = grid.nodes().map(|t| marcher.eta(&zeta, t)).collect();
    let monotone = eta_values
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-12 * (1.0 + w[0].abs()));
    let phi_values: Vec<f64> = grid
        .nodes()
        .enumerate()
        .map(|(k, t)| {
            if k == 0 {
                f64::NAN
            } else {
                marcher.amplitude * marcher.leading_density(t) + psi[k]
            }
        })
        .collect();
    let origin = match leading {
        Leading::Power(order) => Origin::PowerLaw {
            exponent: order - 1.0,
        },
        Leading::Dirac => Origin::Unset,
    };
    Ok(Stefan2State {
        kind,
        nu,
        r,
        grid,
        amplitude: marcher.amplitude,
        lambda0: marcher.lambda0,
        eta: SampledFn::new(grid, eta_values)?,
        phi_minus: SampledFn::with_origin(grid, phi_values, origin)?,
        residual_bc,
        residual_stefan,
        iterations,
        monotone,
        marcher,
        zeta,
        psi,
    })
}

impl Stefan2State {
    /// The boundary position at any t in the grid span.
    pub fn eta_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.marcher.eta(&self.zeta, t))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t <= self.grid.t_end() * (1.0 + 1e-12)) {
            return domain(format!("t = {t} lies outside (0, {}]", self.grid.t_end()));
        }
        Ok(())
    }

    /// u(x, t) for x ≥ η(t).
    pub fn eval_u(&self, x: f64, t: f64) -> Result<f64> {
        let eta = self.eta_at(t)?;
        if x < eta - 1e-12 * (1.0 + eta.abs()) {
            return domain(format!("x = {x} lies left of the boundary η({t}) = {eta}"));
        }
        let base = match self.kind {
            DerivativeKind::Caputo => -1.0,
            DerivativeKind::RiemannLiouville => -delta_mu(2.0 * self.nu, t)?,
        };
        Ok(base
            + self
                .marcher
                .potential(Field::Layer, x, t, &self.zeta, &self.psi)?
                .value)
    }

    /// Largest per-step residual over both conditions.
    pub fn max_residual(&self) -> f64 {
        self.residual_bc
            .iter()
            .chain(&self.residual_stefan)
            .fold(0.0, |a, &b| a.max(b))
    }
}

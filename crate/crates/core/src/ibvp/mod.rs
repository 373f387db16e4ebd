//! Initial-boundary value problems for the time-fractional diffusion
//! equation on a (possibly moving, possibly unbounded) interval, solved by
//! embedding into the whole line with unknown boundary densities φ±.

mod data;

use std::sync::OnceLock;

pub use data::{BoundaryPath, InitialData, PathShape, RobinBC, ScalarFn, TimeData};

use crate::error::{domain, Error, Result};
use crate::fracquad::{Origin, SampledFn, TimeGrid};
use crate::par;
use crate::pulse::PulseSeries;
use crate::quad::{integrate, integrate_to_infinity, GaussLegendre, QuadConfig};
use crate::specfun::{delta_mu, gamma, FracIndex, RConfig, RFunction};
use crate::volterra::{
    abel_invert_pulses, solve_first_kind, solve_scalar, KernelEntry, KernelMatrix,
};

/// Smallest grid the solver accepts.
pub const MIN_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeKind {
    Caputo,
    RiemannLiouville,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    /// Sign of the x-derivative of the single layer sitting on this side.
    fn flux_sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IbvpProblem {
    pub kind: DerivativeKind,
    pub nu: f64,
    pub kappa: f64,
    pub left: RobinBC,
    pub right: RobinBC,
    pub left_path: BoundaryPath,
    pub right_path: BoundaryPath,
    /// The initial profile, already extended to the whole line.
    pub initial: InitialData,
}

impl IbvpProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 0.5) {
            return domain(format!("nu must lie in (0, 1/2], got {}", self.nu));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return domain(format!("kappa must be positive, got {}", self.kappa));
        }
        for bc in [&self.left, &self.right] {
            if !(bc.coeff_u.abs() + bc.coeff_ux.abs() > 0.0) {
                return domain("a boundary condition needs a nonzero coefficient");
            }
        }
        if matches!(self.left_path, BoundaryPath::PlusInfinity)
            || matches!(self.right_path, BoundaryPath::MinusInfinity)
        {
            return domain("the left path cannot be +inf and the right path cannot be -inf");
        }
        Ok(())
    }

    fn bc(&self, side: Side) -> &RobinBC {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    fn path(&self, side: Side) -> &BoundaryPath {
        match side {
            Side::Left => &self.left_path,
            Side::Right => &self.right_path,
        }
    }

    /// Order of the initial-data kernel in u.
    fn initial_order(&self) -> f64 {
        match self.kind {
            DerivativeKind::Caputo => 1.0 - self.nu,
            DerivativeKind::RiemannLiouville => self.nu,
        }
    }

    /// Order of the initial-data kernel in u_x.
    fn initial_flux_order(&self) -> f64 {
        match self.kind {
            DerivativeKind::Caputo => 1.0 - 2.0 * self.nu,
            DerivativeKind::RiemannLiouville => 0.0,
        }
    }

    fn check_ordered(&self, t: f64) -> Result<()> {
        let (lo, hi) = (self.left_path.eval(t), self.right_path.eval(t));
        if !(lo < hi) {
            return domain(format!("boundary paths cross at t = {t}: {lo} >= {hi}"));
        }
        Ok(())
    }
}

/// Single-layer and flux kernels of a density sitting on a boundary.
#[derive(Debug, Clone)]
pub(crate) struct LayerPotential {
    pub(crate) nu: f64,
    pub(crate) sqrt_kappa: f64,
    pub(crate) cfg: RConfig,
    layer: RFunction,
    layer_mass: RFunction,
    flux: RFunction,
    flux_mass: RFunction,
}

fn rf(mu: f64, nu: f64, cfg: &RConfig) -> Result<RFunction> {
    RFunction::new(FracIndex::new(mu, nu)?, *cfg)
}

/// R(a, σ) with R(∞, σ) = 0 and R(a, 0) = 0 for the orders used here.
fn r_at(f: &RFunction, a: f64, sigma: f64) -> Result<f64> {
    if a == f64::INFINITY || sigma <= 0.0 {
        return Ok(0.0);
    }
    f.eval(a, sigma)
}

impl LayerPotential {
    pub(crate) fn new(nu: f64, kappa: f64, cfg: &RConfig) -> Result<Self> {
        Ok(Self {
            nu,
            sqrt_kappa: kappa.sqrt(),
            cfg: *cfg,
            layer: rf(2.0 * nu, nu, cfg)?,
            layer_mass: rf(2.0 * nu + 1.0, nu, cfg)?,
            flux: rf(nu, nu, cfg)?,
            flux_mass: rf(nu + 1.0, nu, cfg)?,
        })
    }

    /// The single-layer kernel in u. For a < 0 (the point has passed a
    /// receding boundary) the half-line integral splits at the point.
    pub(crate) fn layer(&self, a: f64, sigma: f64) -> Result<f64> {
        if a >= 0.0 {
            Ok(0.5 * r_at(&self.layer, a, sigma)?)
        } else {
            Ok(delta_mu(2.0 * self.nu, sigma)? - 0.5 * r_at(&self.layer, -a, sigma)?)
        }
    }

    /// ∫ layer(a, σ) dσ over [lo, hi] for fixed a.
    fn layer_panel(&self, a: f64, lo: f64, hi: f64) -> Result<f64> {
        let mass = |b: f64| -> Result<f64> {
            Ok(r_at(&self.layer_mass, b, hi)? - r_at(&self.layer_mass, b, lo)?)
        };
        if a >= 0.0 {
            Ok(0.5 * mass(a)?)
        } else {
            let order = 2.0 * self.nu + 1.0;
            Ok(delta_mu(order, hi)? - delta_mu(order, lo.max(0.0))? - 0.5 * mass(-a)?)
        }
    }

    /// Magnitude of the flux kernel, ½ R_{ν,ν}(|a|, σ)/√κ.
    pub(crate) fn flux(&self, a: f64, sigma: f64) -> Result<f64> {
        Ok(0.5 * r_at(&self.flux, a.abs(), sigma)? / self.sqrt_kappa)
    }

    fn flux_panel(&self, a: f64, lo: f64, hi: f64) -> Result<f64> {
        let b = a.abs();
        Ok(0.5 * (r_at(&self.flux_mass, b, hi)? - r_at(&self.flux_mass, b, lo)?) / self.sqrt_kappa)
    }
}

/// All R functions a problem needs, with precomputed coefficients.
#[derive(Debug, Clone)]
struct Potentials {
    layers: LayerPotential,
    nu: f64,
    sqrt_kappa: f64,
    initial_mass: RFunction,
    initial_flux_mass: RFunction,
    initial: RFunction,
    initial_flux: RFunction,
}

impl Potentials {
    fn new(problem: &IbvpProblem, cfg: &RConfig) -> Result<Self> {
        let nu = problem.nu;
        let (mi, mj) = (problem.initial_order(), problem.initial_flux_order());
        Ok(Self {
            layers: LayerPotential::new(nu, problem.kappa, cfg)?,
            nu,
            sqrt_kappa: problem.kappa.sqrt(),
            initial: rf(mi, nu, cfg)?,
            initial_mass: rf(mi + nu, nu, cfg)?,
            initial_flux: rf(mj, nu, cfg)?,
            initial_flux_mass: rf(mj + nu, nu, cfg)?,
        })
    }

    /// Initial-data contributions (u, u_x) at (x, t).
    fn initial_terms(&self, f: &InitialData, x: f64, t: f64) -> Result<(f64, f64)> {
        let sk = self.sqrt_kappa;
        match f {
            InitialData::Constant(c) => {
                Ok((c * delta_mu(self.initial.index().mu() + self.nu, t)?, 0.0))
            }
            InitialData::PiecewiseConstant { breaks, values } => {
                let mut u = 0.0;
                let mut ux = 0.0;
                let mut lo = f64::NEG_INFINITY;
                for (k, v) in values.iter().enumerate() {
                    let hi = breaks.get(k).copied().unwrap_or(f64::INFINITY);
                    if *v != 0.0 {
                        // Pieces left of x pull u_x down, pieces right of it push up.
                        for (a, b, sign) in [(lo, hi.min(x), -1.0), (lo.max(x), hi, 1.0)] {
                            if a < b {
                                let (near, far) = if sign > 0.0 {
                                    (a - x, b - x)
                                } else {
                                    (x - b, x - a)
                                };
                                let (zn, zf) = (near / sk, far / sk);
                                u += v
                                    * 0.5
                                    * (r_at(&self.initial_mass, zn, t)?
                                        - r_at(&self.initial_mass, zf, t)?);
                                ux += sign * v * 0.5 / sk
                                    * (r_at(&self.initial_flux_mass, zn, t)?
                                        - r_at(&self.initial_flux_mass, zf, t)?);
                            }
                        }
                    }
                    lo = hi;
                }
                Ok((u, ux))
            }
            _ => {
                let quad = QuadConfig::with_tolerances(1e-12, 1e-10);
                let scale = t.powf(self.nu);
                let mut cuts: Vec<f64> = f
                    .breakpoints()
                    .iter()
                    .map(|b| (b - x).abs() / sk)
                    .filter(|z| *z > 0.0)
                    .collect();
                cuts.push(scale);
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let part = |kernel: &RFunction, odd: bool| -> Result<f64> {
                    let g = |z: f64| -> Result<f64> {
                        let (l, r) = (f.eval(x - sk * z), f.eval(x + sk * z));
                        Ok(kernel.eval(z, t)? * if odd { r - l } else { r + l })
                    };
                    let mut total = 0.0;
                    let mut prev = 0.0;
                    for c in &cuts {
                        total += integrate(g, prev, *c, &quad)?.value;
                        prev = *c;
                    }
                    Ok(total + integrate_to_infinity(g, prev, scale, &quad)?.value)
                };
                Ok((
                    0.5 * part(&self.initial, false)?,
                    0.5 / sk * part(&self.initial_flux, true)?,
                ))
            }
        }
    }
}

/// Right-hand side of one boundary equation.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Symbolic(PulseSeries),
    Sampled(SampledFn),
}

impl Forcing {
    fn sampled(&self, grid: &TimeGrid) -> Result<SampledFn> {
        match self {
            Self::Sampled(s) => Ok(s.clone()),
            Self::Symbolic(p) => {
                if p.dirac_weight() != 0.0 {
                    return Err(Error::Unrepresentable(
                        "a Dirac delta in boundary data cannot be sampled".into(),
                    ));
                }
                let values = grid
                    .nodes()
                    .map(|t| {
                        if t > 0.0 {
                            p.eval_regular(t)
                        } else {
                            Ok(f64::NAN)
                        }
                    })
                    .collect::<Result<_>>()?;
                SampledFn::with_origin(*grid, values, Origin::Unset)
            }
        }
    }
}

/// A boundary density φ, either as pulses or as panel values.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Symbolic(PulseSeries),
    /// Piecewise constant: value k holds on (t_{k−1}, t_k].
    Sampled(SampledFn),
}

impl Density {
    pub fn zero() -> Self {
        Self::Symbolic(PulseSeries::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Symbolic(p) if p.is_zero())
    }
}

/// How each side's density was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideMethod {
    /// No equation: both ends at infinity.
    Absent,
    ClosedForm,
    Scalar,
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Use pulse algebra when data and geometry allow it.
    pub symbolic: bool,
    pub r: RConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            symbolic: true,
            r: RConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IbvpSolution {
    pub problem: IbvpProblem,
    pub grid: TimeGrid,
    pub phi_minus: Density,
    pub phi_plus: Density,
    pub methods: [SideMethod; 2],
    /// Per-node residuals of the discrete Volterra solve (empty if none ran).
    pub residual_norms: Vec<f64>,
    potentials: Potentials,
}

struct Context<'p> {
    problem: &'p IbvpProblem,
    pot: Potentials,
}

impl<'p> Context<'p> {
    /// Argument of the density on `side` seen from x at time τ.
    fn arg(&self, side: Side, x: f64, tau: f64) -> f64 {
        let eta = self.problem.path(side).eval(tau);
        if !eta.is_finite() {
            return f64::INFINITY;
        }
        let d = match side {
            Side::Left => x - eta,
            Side::Right => eta - x,
        };
        d / self.pot.sqrt_kappa
    }

    /// K for the equation on `row` against the density on `density`.
    fn kernel(&self, row: Side, density: Side, t: f64, tau: f64) -> Result<f64> {
        let bc = self.problem.bc(row);
        let a = if row == density {
            let path = self.problem.path(row);
            if path.is_finite() {
                let d = path.eval(t) - path.eval(tau);
                (if row == Side::Left { d } else { -d }) / self.pot.sqrt_kappa
            } else {
                0.0
            }
        } else {
            let a = self.arg(density, self.problem.path(row).eval(t), tau);
            if a < 0.0 {
                return domain(format!(
                    "boundary paths cross between t = {tau} and t = {t}"
                ));
            }
            a
        };
        let sigma = t - tau;
        let mut k = 0.0;
        if bc.coeff_u != 0.0 {
            k += bc.coeff_u * self.pot.layers.layer(a, sigma)?;
        }
        if bc.coeff_ux != 0.0 {
            k += bc.coeff_ux * density.flux_sign() * self.pot.layers.flux(a, sigma)?;
        }
        Ok(k)
    }

    fn entry(&self, row: Side, density: Side) -> KernelEntry<'_> {
        if !self.problem.path(density).is_finite() && row != density {
            return KernelEntry::Zero;
        }
        if row != density && !self.problem.path(row).is_finite() {
            return KernelEntry::Zero;
        }
        let f = move |t: f64, tau: f64| self.kernel(row, density, t, tau);
        if row == density {
            let nu = self.problem.nu;
            let exponent = if self.problem.bc(row).coeff_ux != 0.0 {
                nu - 1.0
            } else {
                2.0 * nu - 1.0
            };
            KernelEntry::singular(exponent, f)
        } else {
            KernelEntry::bounded(f)
        }
    }

    fn forcing(&self, side: Side, grid: &TimeGrid, symbolic: bool) -> Result<Forcing> {
        let p = self.problem;
        let bc = p.bc(side);
        let path = p.path(side);
        if !path.is_finite() {
            // R(∞, t) = 0 removes the initial-data terms.
            return Ok(match &bc.data {
                TimeData::Pulses(g) if symbolic => Forcing::Symbolic(g.clone()),
                data => Forcing::Sampled(sample(grid, |t| data.eval(t))?),
            });
        }
        if let (true, TimeData::Pulses(g), InitialData::Constant(c)) =
            (symbolic, &bc.data, &p.initial)
        {
            let order = p.initial_order() + p.nu;
            return Ok(Forcing::Symbolic(
                g.sum(&PulseSeries::single(-bc.coeff_u * c, order)?),
            ));
        }
        let values = par::try_map_range(grid.len(), |n| {
            if n == 0 {
                return Ok(f64::NAN);
            }
            let t = grid.node(n);
            let (u, ux) = self.pot.initial_terms(&p.initial, path.eval(t), t)?;
            Ok::<_, Error>(bc.data.eval(t)? - bc.coeff_u * u - bc.coeff_ux * ux)
        })?;
        Ok(Forcing::Sampled(SampledFn::with_origin(
            *grid,
            values,
            Origin::Unset,
        )?))
    }

    fn closed_form_allowed(&self, side: Side) -> bool {
        let path = self.problem.path(side);
        self.problem.bc(side).coeff_ux == 0.0 && (path.is_constant() || !path.is_finite())
    }

    fn solve_side(
        &self,
        side: Side,
        grid: &TimeGrid,
        cfg: &SolveConfig,
    ) -> Result<(Density, SideMethod, Vec<f64>)> {
        let h = self.forcing(side, grid, cfg.symbolic)?;
        if let (Forcing::Symbolic(g), true) = (&h, self.closed_form_allowed(side)) {
            // ½ D^{−2ν} φ = g/coeff_u.
            let phi = abel_invert_pulses(
                &g.scaled(2.0 / self.problem.bc(side).coeff_u),
                2.0 * self.problem.nu,
            )?;
            return Ok((Density::Symbolic(phi), SideMethod::ClosedForm, Vec::new()));
        }
        let (phi, res) = solve_scalar(&self.entry(side, side), &h.sampled(grid)?, grid)?;
        Ok((Density::Sampled(phi), SideMethod::Scalar, res))
    }
}

fn sample(grid: &TimeGrid, f: impl Fn(f64) -> Result<f64>) -> Result<SampledFn> {
    let values = grid
        .nodes()
        .map(|t| if t > 0.0 { f(t) } else { Ok(f64::NAN) })
        .collect::<Result<_>>()?;
    SampledFn::with_origin(*grid, values, Origin::Unset)
}

/// Computes h⁻ and h⁺ for the problem.
pub fn compute_h(
    problem: &IbvpProblem,
    grid: &TimeGrid,
    cfg: &SolveConfig,
) -> Result<(Forcing, Forcing)> {
    problem.validate()?;
    let ctx = Context {
        problem,
        pot: Potentials::new(problem, &cfg.r)?,
    };
    Ok((
        ctx.forcing(Side::Left, grid, cfg.symbolic)?,
        ctx.forcing(Side::Right, grid, cfg.symbolic)?,
    ))
}

/// The 2×2 kernel at (t, τ), rows indexed by boundary equation.
pub fn kernel_matrix(
    problem: &IbvpProblem,
    t: f64,
    tau: f64,
    cfg: &RConfig,
) -> Result<[[f64; 2]; 2]> {
    problem.validate()?;
    if !(tau >= 0.0 && tau < t) {
        return domain(format!(
            "kernel needs 0 <= tau < t, got tau = {tau}, t = {t}"
        ));
    }
    let ctx = Context {
        problem,
        pot: Potentials::new(problem, cfg)?,
    };
    let mut k = [[0.0; 2]; 2];
    for row in [Side::Left, Side::Right] {
        for col in [Side::Left, Side::Right] {
            let finite = problem.path(row).is_finite() && problem.path(col).is_finite();
            if finite || row == col {
                k[row.index()][col.index()] = ctx.kernel(row, col, t, tau)?;
            }
        }
    }
    Ok(k)
}

pub fn solve(problem: &IbvpProblem, grid: &TimeGrid, cfg: &SolveConfig) -> Result<IbvpSolution> {
    problem.validate()?;
    if grid.n_steps() < MIN_STEPS {
        return domain(format!(
            "the grid needs at least {MIN_STEPS} steps, got {}",
            grid.n_steps()
        ));
    }
    for t in grid.nodes().skip(1) {
        problem.check_ordered(t)?;
    }
    let ctx = Context {
        problem,
        pot: Potentials::new(problem, &cfg.r)?,
    };
    let finite = [
        problem.left_path.is_finite(),
        problem.right_path.is_finite(),
    ];
    let (phi_minus, phi_plus, methods, residual_norms) = match finite {
        [false, false] => (
            Density::zero(),
            Density::zero(),
            [SideMethod::Absent; 2],
            Vec::new(),
        ),
        [true, true] => {
            let h_minus = ctx.forcing(Side::Left, grid, false)?.sampled(grid)?;
            let h_plus = ctx.forcing(Side::Right, grid, false)?.sampled(grid)?;
            let k = KernelMatrix::new(
                ctx.entry(Side::Left, Side::Left),
                ctx.entry(Side::Left, Side::Right),
                ctx.entry(Side::Right, Side::Left),
                ctx.entry(Side::Right, Side::Right),
            );
            let s = solve_first_kind(&k, &h_minus, &h_plus, grid)?;
            (
                Density::Sampled(s.phi_minus),
                Density::Sampled(s.phi_plus),
                [SideMethod::Coupled; 2],
                s.residual_norms,
            )
        }
        _ => {
            let (pm, mm, rm) = ctx.solve_side(Side::Left, grid, cfg)?;
            let (pp, mp, rp) = ctx.solve_side(Side::Right, grid, cfg)?;
            let res = if rm.is_empty() {
                rp
            } else if rp.is_empty() {
                rm
            } else {
                rm.iter().zip(&rp).map(|(a, b)| a.max(*b)).collect()
            };
            (pm, pp, [mm, mp], res)
        }
    };
    Ok(IbvpSolution {
        problem: problem.clone(),
        grid: *grid,
        phi_minus,
        phi_plus,
        methods,
        residual_norms,
        potentials: ctx.pot,
    })
}

fn gl5() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(5))
}

pub(crate) fn near_quad() -> QuadConfig {
    QuadConfig::with_tolerances(1e-13, 1e-10)
}

/// ∫ f(τ) dτ over [t − width, t] for f ~ (t − τ)^{q−1}, after σ = s^{1/q}.
fn integrate_touching(f: impl Fn(f64) -> Result<f64>, t: f64, width: f64, q: f64) -> Result<f64> {
    let g = |s: f64| -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        let sigma = s.powf(1.0 / q);
        Ok(f(t - sigma)? * sigma.powf(1.0 - q) / q)
    };
    Ok(integrate(g, 0.0, width.powf(q), &near_quad())?.value)
}

impl IbvpSolution {
    fn context(&self) -> Context<'_> {
        Context {
            problem: &self.problem,
            pot: self.potentials.clone(),
        }
    }

    pub fn density(&self, side: Side) -> &Density {
        match side {
            Side::Left => &self.phi_minus,
            Side::Right => &self.phi_plus,
        }
    }

    fn check_point(&self, x: f64, t: f64) -> Result<()> {
        if !(t > 0.0) {
            return domain(format!("evaluation needs t > 0, got {t}"));
        }
        let sampled = matches!(self.phi_minus, Density::Sampled(_))
            || matches!(self.phi_plus, Density::Sampled(_));
        if sampled && t > self.grid.t_end() * (1.0 + 1e-12) {
            return domain(format!("t = {t} lies beyond the solved interval"));
        }
        let (lo, hi) = (
            self.problem.left_path.eval(t),
            self.problem.right_path.eval(t),
        );
        let slack = 1e-12 * (1.0 + x.abs());
        if !(x >= lo - slack && x <= hi + slack) {
            return domain(format!("x = {x} lies outside [{lo}, {hi}] at t = {t}"));
        }
        Ok(())
    }

    /// Contribution of one side's density to u (or u_x when `flux`).
    fn history(&self, ctx: &Context, side: Side, x: f64, t: f64, flux: bool) -> Result<f64> {
        let path = self.problem.path(side);
        if !path.is_finite() {
            return Ok(0.0);
        }
        let pot = &ctx.pot;
        let nu = self.problem.nu;
        let sign = side.flux_sign();
        let kernel = |tau: f64| -> Result<f64> {
            let a = ctx.arg(side, x, tau);
            if flux {
                Ok(sign * pot.layers.flux(a, t - tau)?)
            } else {
                pot.layers.layer(a, t - tau)
            }
        };
        let q = if flux { nu } else { 2.0 * nu };
        let constant = path.is_constant();
        let fixed_a = ctx.arg(side, x, 0.0).max(0.0);
        match self.density(side) {
            Density::Symbolic(p) => {
                if constant {
                    let (lambda, scale) = if flux {
                        (nu, sign * 0.5 / pot.sqrt_kappa)
                    } else {
                        (2.0 * nu, 0.5)
                    };
                    return Ok(scale * p.convolve_r(lambda, nu, fixed_a, t, &pot.layers.cfg)?);
                }
                let mut total = 0.0;
                for pulse in p.terms() {
                    let c = pulse.coefficient;
                    if pulse.order == 0.0 {
                        total += c * kernel(0.0)?;
                        continue;
                    }
                    let mu = pulse.order;
                    let head = integrate(
                        |w: f64| kernel(w.powf(1.0 / mu)),
                        0.0,
                        (0.5 * t).powf(mu),
                        &near_quad(),
                    )?
                    .value
                        / gamma(mu + 1.0);
                    let tail = integrate_touching(
                        |tau| Ok(kernel(tau)? * delta_mu(mu, tau)?),
                        t,
                        0.5 * t,
                        q,
                    )?;
                    total += c * (head + tail);
                }
                Ok(total)
            }
            Density::Sampled(phi) => {
                let grid = phi.grid();
                let panels = ((t / grid.step()).ceil() as usize).clamp(1, grid.n_steps());
                let terms = par::try_map_range(panels, |i| {
                    let j = i + 1;
                    let lo = grid.node(j - 1);
                    let hi = grid.node(j).min(t);
                    if !(hi > lo) {
                        return Ok(0.0);
                    }
                    let w = if constant {
                        let (s_lo, s_hi) = (t - hi, t - lo);
                        if flux {
                            sign * pot.layers.flux_panel(fixed_a, s_lo, s_hi)?
                        } else {
                            pot.layers.layer_panel(fixed_a, s_lo, s_hi)?
                        }
                    } else if hi < t {
                        gl5().integrate(&kernel, lo, hi)?
                    } else {
                        integrate_touching(kernel, t, t - lo, q)?
                    };
                    Ok::<_, Error>(w * phi.value(j))
                })?;
                Ok(terms.iter().sum())
            }
        }
    }

    pub fn eval_u(&self, x: f64, t: f64) -> Result<f64> {
        self.check_point(x, t)?;
        let ctx = self.context();
        let (u0, _) = ctx.pot.initial_terms(&self.problem.initial, x, t)?;
        Ok(u0
            + self.history(&ctx, Side::Left, x, t, false)?
            + self.history(&ctx, Side::Right, x, t, false)?)
    }

    pub fn eval_ux(&self, x: f64, t: f64) -> Result<f64> {
        self.check_point(x, t)?;
        let ctx = self.context();
        let (_, ux0) = ctx.pot.initial_terms(&self.problem.initial, x, t)?;
        Ok(ux0
            + self.history(&ctx, Side::Left, x, t, true)?
            + self.history(&ctx, Side::Right, x, t, true)?)
    }

    /// a u + b u_x − g on each finite boundary at time t.
    pub fn bc_residuals(&self, t: f64) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        for side in [Side::Left, Side::Right] {
            let path = self.problem.path(side);
            if !path.is_finite() {
                continue;
            }
            let bc = self.problem.bc(side);
            let x = path.eval(t);
            let mut lhs = 0.0;
            if bc.coeff_u != 0.0 {
                lhs += bc.coeff_u * self.eval_u(x, t)?;
            }
            if bc.coeff_ux != 0.0 {
                lhs += bc.coeff_ux * self.eval_ux(x, t)?;
            }
            out[side.index()] = lhs - bc.data.eval(t)?;
        }
        Ok(out)
    }
}

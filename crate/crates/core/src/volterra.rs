//! First-kind Volterra systems ∫_0^t K(t,τ) φ(τ) dτ = h(t) for one or two
//! densities, by product integration with piecewise-constant densities
//! collocated at the grid nodes.

use crate::error::{domain, Error, Result};
use crate::fracquad::{rl_derivative, Origin, SampledFn, TimeGrid};
use crate::par;
use crate::pulse::PulseSeries;

/// Largest tolerated 1-norm condition number of a diagonal block.
pub const MAX_CONDITION: f64 = 1e12;

pub type KernelFn<'a> = Box<dyn Fn(f64, f64) -> Result<f64> + Send + Sync + 'a>;

/// One kernel entry K(t, τ).
pub enum KernelEntry<'a> {
    Zero,
    /// w δ(t − τ), contributing w φ(t).
    Dirac(f64),
    /// A bounded kernel.
    Bounded(KernelFn<'a>),
    /// K(t,τ) = K̃(t,τ) (t − τ)^exponent with K̃ bounded; `kernel`
    /// evaluates K itself.
    Singular {
        exponent: f64,
        kernel: KernelFn<'a>,
    },
}

impl<'a> KernelEntry<'a> {
    pub fn bounded(f: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'a) -> Self {
        Self::Bounded(Box::new(f))
    }

    pub fn singular(exponent: f64, f: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'a) -> Self {
        Self::Singular {
            exponent,
            kernel: Box::new(f),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Self::Singular { exponent, .. } = self {
            if !(*exponent > -1.0) {
                return domain(format!(
                    "kernel singularity exponent must exceed -1, got {exponent}"
                ));
            }
        }
        Ok(())
    }

    /// Quadrature weight times kernel for panel (t_{j−1}, t_j] at node t_n.
    fn weight(&self, grid: &TimeGrid, n: usize, j: usize) -> Result<f64> {
        let h = grid.step();
        let t = grid.node(n);
        let mid = grid.node(j) - 0.5 * h;
        match self {
            Self::Zero => Ok(0.0),
            Self::Dirac(w) => Ok(if j == n { *w } else { 0.0 }),
            Self::Bounded(k) => Ok(h * k(t, mid)?),
            Self::Singular { exponent, kernel } => {
                let e1 = exponent + 1.0;
                let back = (n - j) as f64;
                let moment = h.powf(e1) * ((back + 1.0).powf(e1) - back.powf(e1)) / e1;
                Ok(moment * kernel(t, mid)? * (t - mid).powf(-exponent))
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

/// The 2×2 kernel of the boundary-density system.
pub struct KernelMatrix<'a> {
    pub entries: [[KernelEntry<'a>; 2]; 2],
}

impl<'a> KernelMatrix<'a> {
    pub fn new(
        k11: KernelEntry<'a>,
        k12: KernelEntry<'a>,
        k21: KernelEntry<'a>,
        k22: KernelEntry<'a>,
    ) -> Self {
        Self {
            entries: [[k11, k12], [k21, k22]],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub grid: TimeGrid,
    pub phi_minus: SampledFn,
    pub phi_plus: SampledFn,
    /// Per node, the largest row residual of the solved diagonal block.
    pub residual_norms: Vec<f64>,
}

fn extrapolate_origin(values: &mut [f64]) {
    values[0] = if values.len() > 2 {
        2.0 * values[1] - values[2]
    } else {
        values[1]
    };
}

/// Weighted history Σ_{j<n} w_{nj} φ_j for one entry.
fn history(entry: &KernelEntry, grid: &TimeGrid, n: usize, phi: &[f64]) -> Result<f64> {
    if entry.is_zero() || matches!(entry, KernelEntry::Dirac(_)) {
        return Ok(0.0);
    }
    let terms = par::try_map_range(n - 1, |i| {
        Ok::<_, Error>(entry.weight(grid, n, i + 1)? * phi[i + 1])
    })?;
    Ok(terms.iter().sum())
}

fn ill_posed(node: usize, t: f64, condition: f64) -> Error {
    Error::IllPosed { node, t, condition }
}

/// Solves the coupled pair of first-kind equations for (φ⁻, φ⁺).
pub fn solve_first_kind(
    kernel: &KernelMatrix,
    h_minus: &SampledFn,
    h_plus: &SampledFn,
    grid: &TimeGrid,
) -> Result<VolterraSolution> {
    for row in &kernel.entries {
        for e in row {
            e.validate()?;
        }
    }
    if h_minus.grid() != grid || h_plus.grid() != grid {
        return domain("right-hand sides must be sampled on the solver grid");
    }
    let len = grid.len();
    let mut phi = [vec![0.0; len], vec![0.0; len]];
    let mut residual_norms = vec![0.0; len];
    let rhs_data = [h_minus, h_plus];
    for n in 1..len {
        let mut a = [[0.0; 2]; 2];
        let mut rhs = [0.0; 2];
        for i in 0..2 {
            rhs[i] = rhs_data[i].value(n);
            for k in 0..2 {
                let e = &kernel.entries[i][k];
                a[i][k] = e.weight(grid, n, n)?;
                rhs[i] -= history(e, grid, n, &phi[k])?;
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let norm = (a[0][0].abs() + a[1][0].abs()).max(a[0][1].abs() + a[1][1].abs());
        let inv_norm =
            (a[1][1].abs() + a[1][0].abs()).max(a[0][1].abs() + a[0][0].abs()) / det.abs();
        let condition = norm * inv_norm;
        if !(condition <= MAX_CONDITION) {
            return Err(ill_posed(n, grid.node(n), condition));
        }
        let x0 = (rhs[0] * a[1][1] - a[0][1] * rhs[1]) / det;
        let x1 = (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / det;
        phi[0][n] = x0;
        phi[1][n] = x1;
        residual_norms[n] = (a[0][0] * x0 + a[0][1] * x1 - rhs[0])
            .abs()
            .max((a[1][0] * x0 + a[1][1] * x1 - rhs[1]).abs());
    }
    let [mut pm, mut pp] = phi;
    extrapolate_origin(&mut pm);
    extrapolate_origin(&mut pp);
    Ok(VolterraSolution {
        grid: *grid,
        phi_minus: SampledFn::new(*grid, pm)?,
        phi_plus: SampledFn::new(*grid, pp)?,
        residual_norms,
    })
}

/// Solves a single first-kind equation ∫ K φ = h.
pub fn solve_scalar(
    kernel: &KernelEntry,
    h: &SampledFn,
    grid: &TimeGrid,
) -> Result<(SampledFn, Vec<f64>)> {
    kernel.validate()?;
    if h.grid() != grid {
        return domain("right-hand side must be sampled on the solver grid");
    }
    let len = grid.len();
    let mut phi = vec![0.0; len];
    let mut residual_norms = vec![0.0; len];
    let mut scale: f64 = 0.0;
    for n in 1..len {
        let diag = kernel.weight(grid, n, n)?;
        let rhs = h.value(n) - history(kernel, grid, n, &phi)?;
        scale = scale.max(diag.abs());
        if !(diag.abs() * MAX_CONDITION > scale) || diag == 0.0 {
            return Err(ill_posed(n, grid.node(n), scale / diag.abs()));
        }
        phi[n] = rhs / diag;
        residual_norms[n] = (diag * phi[n] - rhs).abs();
    }
    extrapolate_origin(&mut phi);
    Ok((SampledFn::new(*grid, phi)?, residual_norms))
}

/// Re-applies the kernel to piecewise-constant densities with each panel
/// split into `sub` pieces, returning the two left-hand sides at the nodes.
/// Comparing with h measures the backward error of a solve.
pub fn reconvolve(
    kernel: &KernelMatrix,
    phi_minus: &SampledFn,
    phi_plus: &SampledFn,
    sub: usize,
) -> Result<[Vec<f64>; 2]> {
    let grid = *phi_minus.grid();
    let fine = TimeGrid::new(grid.t_end(), grid.n_steps() * sub)?;
    let phis = [phi_minus.values(), phi_plus.values()];
    let mut out = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for (i, row) in kernel.entries.iter().enumerate() {
        let sums = par::try_map_range(grid.len(), |n| {
            let mut s = 0.0;
            for (k, e) in row.iter().enumerate() {
                for jf in 1..=n * sub {
                    let coarse = (jf - 1) / sub + 1;
                    let w = match e {
                        KernelEntry::Dirac(w) => {
                            if jf == n * sub {
                                *w
                            } else {
                                0.0
                            }
                        }
                        _ => e.weight(&fine, n * sub, jf)?,
                    };
                    s += w * phis[k][coarse];
                }
            }
            Ok::<_, Error>(s)
        })?;
        out[i] = sums;
    }
    Ok(out)
}

/// Solves D^{−order} φ = g for symbolic pulse data.
pub fn abel_invert_pulses(g: &PulseSeries, order: f64) -> Result<PulseSeries> {
    if !(order > 0.0 && order <= 1.0) {
        return domain(format!("Abel order must lie in (0, 1], got {order}"));
    }
    g.differentiate(order)
}

/// Solves D^{−order} φ = g numerically, φ = D^{order} g.
pub fn abel_invert(g: &SampledFn, order: f64) -> Result<SampledFn> {
    if !(order > 0.0 && order <= 1.0) {
        return domain(format!("Abel order must lie in (0, 1], got {order}"));
    }
    if order < 1.0 {
        return rl_derivative(g, order);
    }
    if g.origin() != Origin::Finite || g.value(0) != 0.0 {
        return Err(Error::Unrepresentable(
            "a jump at t = 0 inverts to a Dirac delta".into(),
        ));
    }
    let h = g.grid().step();
    let v = g.values();
    let n = v.len() - 1;
    let d = (0..=n)
        .map(|k| match k {
            0 => f64::NAN,
            k if k == n => (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h),
            k => (v[k + 1] - v[k - 1]) / (2.0 * h),
        })
        .collect();
    SampledFn::with_origin(*g.grid(), d, Origin::Unset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma, rgamma};

    #[test]
    fn constant_kernel() {
        let g = TimeGrid::new(1.0, 32).unwrap();
        let h = SampledFn::from_fn(g, |t| t);
        let k = KernelMatrix::new(
            KernelEntry::bounded(|_, _| Ok(1.0)),
            KernelEntry::Zero,
            KernelEntry::Zero,
            KernelEntry::bounded(|_, _| Ok(1.0)),
        );
        let s = solve_first_kind(&k, &h, &h, &g).unwrap();
        for n in 0..g.len() {
            assert!((s.phi_minus.value(n) - 1.0).abs() < 1e-12);
            assert!((s.phi_plus.value(n) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn abel_case_matches_closed_form() {
        let nu = 0.25;
        let g = TimeGrid::new(1.0, 256).unwrap();
        let h = SampledFn::from_fn(g, |t| t);
        let zero = SampledFn::from_fn(g, |_| 0.0);
        let half_pulse = 0.5 * rgamma(2.0 * nu);
        let k = KernelMatrix::new(
            KernelEntry::singular(2.0 * nu - 1.0, move |t, tau| {
                Ok(half_pulse * (t - tau).powf(2.0 * nu - 1.0))
            }),
            KernelEntry::Zero,
            KernelEntry::Zero,
            KernelEntry::Dirac(1.0),
        );
        let s = solve_first_kind(&k, &h, &zero, &g).unwrap();
        let exact = |t: f64| 2.0 * t.sqrt() / gamma(1.5);
        let err = (g.len() / 10..g.len())
            .map(|n| (s.phi_minus.value(n) - exact(g.node(n))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-2, "{err}");
        assert!(s.phi_plus.max_abs() == 0.0);
    }

    #[test]
    fn manufactured_pair_converges() {
        let run = |n: usize| {
            let g = TimeGrid::new(1.0, n).unwrap();
            let k = || {
                KernelMatrix::new(
                    KernelEntry::bounded(|t, tau| Ok(2.0 + t - tau)),
                    KernelEntry::bounded(|t, tau| Ok(0.3 * (t * tau).cos())),
                    KernelEntry::bounded(|_, tau| Ok(0.5 * tau)),
                    KernelEntry::bounded(|t, tau| Ok(1.0 + (t - tau).powi(2))),
                )
            };
            // φ⁻ = τ, φ⁺ = 1 pushed through the kernel by fine quadrature.
            let kk = k();
            let fine = |t: f64, row: usize| {
                let m = 4000;
                let h = t / m as f64;
                (0..m)
                    .map(|i| {
                        let tau = (i as f64 + 0.5) * h;
                        let [a, b] = &kk.entries[row];
                        let ka = match a {
                            KernelEntry::Bounded(f) => f(t, tau).unwrap(),
                            _ => 0.0,
                        };
                        let kb = match b {
                            KernelEntry::Bounded(f) => f(t, tau).unwrap(),
                            _ => 0.0,
                        };
                        h * (ka * tau + kb)
                    })
                    .sum::<f64>()
            };
            let hm = SampledFn::from_fn(g, |t| fine(t, 0));
            let hp = SampledFn::from_fn(g, |t| fine(t, 1));
            let s = solve_first_kind(&k(), &hm, &hp, &g).unwrap();
            (1..g.len())
                .map(|i| {
                    (s.phi_minus.value(i) - g.node(i))
                        .abs()
                        .max((s.phi_plus.value(i) - 1.0).abs())
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (run(32), run(64));
        assert!(e1 < 0.1 && e1 / e2 > 1.6, "{e1} {e2}");
    }

    #[test]
    fn singular_block_is_reported() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        let h = SampledFn::from_fn(g, |t| t);
        let k = KernelMatrix::new(
            KernelEntry::bounded(|_, _| Ok(1.0)),
            KernelEntry::bounded(|_, _| Ok(1.0)),
            KernelEntry::bounded(|_, _| Ok(1.0)),
            KernelEntry::bounded(|_, _| Ok(1.0)),
        );
        assert!(matches!(
            solve_first_kind(&k, &h, &h, &g),
            Err(Error::IllPosed { node: 1, .. })
        ));
        let bad = KernelMatrix::new(
            KernelEntry::singular(-1.0, |_, _| Ok(1.0)),
            KernelEntry::Zero,
            KernelEntry::Zero,
            KernelEntry::Dirac(1.0),
        );
        assert!(matches!(
            solve_first_kind(&bad, &h, &h, &g),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn abel_inversions() {
        let nu = 0.3;
        let g = TimeGrid::new(1.0, 256).unwrap();
        let data = SampledFn::from_fn(g, |t| t);
        let phi = abel_invert(&data, 2.0 * nu).unwrap();
        let exact = |t: f64| t.powf(1.0 - 2.0 * nu) / gamma(2.0 - 2.0 * nu);
        let err = (8..g.len())
            .map(|n| (phi.value(n) - exact(g.node(n))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
        let c = PulseSeries::single(2.0 * 1.3, 1.0).unwrap();
        let p = abel_invert_pulses(&c, 2.0 * nu).unwrap();
        assert!((p.terms()[0].order - (1.0 - 2.0 * nu)).abs() < 1e-15);
    }
}

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::pulse::PulseSeries;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Time-dependent boundary data g(t).
#[derive(Clone)]
pub enum TimeData {
    /// Σ c_k δ_{μ_k}(t); a constant c is c δ_1.
    Pulses(PulseSeries),
    Custom(ScalarFn),
}

impl TimeData {
    pub fn constant(c: f64) -> Self {
        Self::Pulses(PulseSeries::single(c, 1.0).expect("order 1 is valid"))
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Self::Pulses(p) => p.eval(t),
            Self::Custom(f) => Ok(f(t)),
        }
    }
}

impl fmt::Debug for TimeData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pulses(p) => f.debug_tuple("Pulses").field(p).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// a u + b u_x = g on one boundary.
#[derive(Debug, Clone)]
pub struct RobinBC {
    pub coeff_u: f64,
    pub coeff_ux: f64,
    pub data: TimeData,
}

impl RobinBC {
    pub fn new(coeff_u: f64, coeff_ux: f64, data: TimeData) -> Result<Self> {
        if !(coeff_u.abs() + coeff_ux.abs() > 0.0) {
            return domain("a boundary condition needs a nonzero coefficient");
        }
        Ok(Self {
            coeff_u,
            coeff_ux,
            data,
        })
    }

    pub fn dirichlet(data: TimeData) -> Self {
        Self {
            coeff_u: 1.0,
            coeff_ux: 0.0,
            data,
        }
    }
}

#[derive(Clone)]
pub enum PathShape {
    Constant(f64),
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// coefficient · t^exponent with exponent > 0.
    Power {
        coefficient: f64,
        exponent: f64,
    },
    Custom(ScalarFn),
}

impl fmt::Debug for PathShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Linear { intercept, slope } => write!(f, "Linear({intercept} + {slope} t)"),
            Self::Power {
                coefficient,
                exponent,
            } => write!(f, "Power({coefficient} t^{exponent})"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A boundary curve η(t), possibly at infinity.
#[derive(Debug, Clone)]
pub enum BoundaryPath {
    MinusInfinity,
    PlusInfinity,
    Finite(PathShape),
}

impl BoundaryPath {
    pub fn constant(c: f64) -> Self {
        Self::Finite(PathShape::Constant(c))
    }

    pub fn power(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return domain(format!("path exponent must be positive, got {exponent}"));
        }
        Ok(Self::Finite(PathShape::Power {
            coefficient,
            exponent,
        }))
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Finite(PathShape::Custom(Arc::new(f)))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::MinusInfinity => f64::NEG_INFINITY,
            Self::PlusInfinity => f64::INFINITY,
            Self::Finite(PathShape::Constant(c)) => *c,
            Self::Finite(PathShape::Linear { intercept, slope }) => intercept + slope * t,
            Self::Finite(PathShape::Power {
                coefficient,
                exponent,
            }) => coefficient * t.powf(*exponent),
            Self::Finite(PathShape::Custom(f)) => f(t),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(
            self,
            Self::Finite(PathShape::Constant(_))
                | Self::Finite(PathShape::Linear { slope: 0.0, .. })
        )
    }
}

/// The extended initial profile f_ext on the whole line.
#[derive(Clone)]
pub enum InitialData {
    Constant(f64),
    /// values[k] on (breaks[k−1], breaks[k]) with breaks[−1] = −∞ and
    /// breaks[len] = +∞.
    PiecewiseConstant {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// Linear interpolation of samples, constant beyond the end points.
    Sampled {
        xs: Vec<f64>,
        values: Vec<f64>,
    },
    Custom(ScalarFn),
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::PiecewiseConstant { breaks, values } => f
                .debug_struct("PiecewiseConstant")
                .field("breaks", breaks)
                .field("values", values)
                .finish(),
            Self::Sampled { xs, .. } => write!(f, "Sampled({} points)", xs.len()),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl InitialData {
    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return domain("piecewise-constant data needs one more value than breaks");
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
            return domain("breaks must be finite and strictly increasing");
        }
        Ok(Self::PiecewiseConstant { breaks, values })
    }

    pub fn sampled(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() || xs.is_empty() {
            return domain("sampled data needs matching, non-empty abscissae and values");
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("sample abscissae must be strictly increasing");
        }
        Ok(Self::Sampled { xs, values })
    }

    /// Extends `f` from [lo, hi] by its end values.
    pub fn clamped(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64) -> Self {
        Self::Custom(Arc::new(move |x| f(x.clamp(lo, hi))))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::PiecewiseConstant { breaks, values } => {
                values[breaks.partition_point(|b| *b <= x)]
            }
            Self::Sampled { xs, values } => {
                let k = xs.partition_point(|v| *v <= x);
                if k == 0 {
                    values[0]
                } else if k == xs.len() {
                    values[k - 1]
                } else {
                    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    values[k - 1] + w * (values[k] - values[k - 1])
                }
            }
            Self::Custom(f) => f(x),
        }
    }

    /// Points where the profile has a kink or jump.
    pub(crate) fn breakpoints(&self) -> &[f64] {
        match self {
            Self::PiecewiseConstant { breaks, .. } => breaks,
            Self::Sampled { xs, .. } => xs,
            _ => &[],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_profiles() {
        let p = InitialData::piecewise_constant(vec![0.0, 1.0], vec![2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.eval(-5.0), 2.0);
        assert_eq!(p.eval(0.5), 3.0);
        assert_eq!(p.eval(1.0), 4.0);
        let s = InitialData::sampled(vec![0.0, 2.0], vec![0.0, 4.0]).unwrap();
        assert_eq!(s.eval(1.0), 2.0);
        assert_eq!(s.eval(9.0), 4.0);
        let c = InitialData::clamped(|x| x * x, 0.0, 2.0);
        assert_eq!(c.eval(-3.0), 0.0);
        assert_eq!(c.eval(3.0), 4.0);
        assert!(InitialData::piecewise_constant(vec![1.0, 0.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn paths() {
        assert_eq!(BoundaryPath::power(2.0, 0.5).unwrap().eval(4.0), 4.0);
        assert!(BoundaryPath::constant(1.0).is_constant());
        assert!(!BoundaryPath::PlusInfinity.is_finite());
        assert!(RobinBC::new(0.0, 0.0, TimeData::constant(1.0)).is_err());
    }
}

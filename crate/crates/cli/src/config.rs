//! JSON problem descriptions and the small path/data expression grammar.

use std::str::FromStr;

use fracdiff::ibvp::{
    BoundaryPath, DerivativeKind, IbvpProblem, InitialData, PathShape, RobinBC, TimeData,
};
use fracdiff::pulse::PulseSeries;
use fracdiff::specfun::gamma;
use serde::Deserialize;

use crate::CliError;

/// `c`, `c1+c2*t`, `c*t^p` or `±infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expr {
    Constant(f64),
    Linear { intercept: f64, slope: f64 },
    Power { coefficient: f64, exponent: f64 },
    PlusInfinity,
    MinusInfinity,
}

fn number(s: &str, whole: &str) -> Result<f64, CliError> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s
            .parse()
            .map_err(|_| CliError::Config(format!("cannot read '{s}' in expression '{whole}'"))),
    }
}

/// Position of the sign that starts the second term of `c1+c2*t`.
fn split_sign(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
}

impl FromStr for Expr {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let s = s.to_ascii_lowercase();
        if s.is_empty() {
            return Err(CliError::Config("empty expression".into()));
        }
        match s.as_str() {
            "infinity" | "+infinity" | "inf" | "+inf" => return Ok(Self::PlusInfinity),
            "-infinity" | "-inf" => return Ok(Self::MinusInfinity),
            _ => {}
        }
        if let Some((head, exponent)) = s.split_once("t^") {
            let coefficient = head.strip_suffix('*').unwrap_or(head);
            return Ok(Self::Power {
                coefficient: number(coefficient, text)?,
                exponent: number(exponent, text)?,
            });
        }
        if let Some(head) = s.strip_suffix('t') {
            let head = head.strip_suffix('*').unwrap_or(head);
            let (intercept, slope) = match split_sign(head) {
                Some(i) => (number(&head[..i], text)?, number(&head[i..], text)?),
                None => (0.0, number(head, text)?),
            };
            return Ok(Self::Linear { intercept, slope });
        }
        Ok(Self::Constant(number(&s, text)?))
    }
}

impl Expr {
    pub fn path(self) -> Result<BoundaryPath, CliError> {
        Ok(match self {
            Self::Constant(c) => BoundaryPath::constant(c),
            Self::Linear { intercept, slope } => {
                BoundaryPath::Finite(PathShape::Linear { intercept, slope })
            }
            Self::Power {
                coefficient,
                exponent,
            } => BoundaryPath::power(coefficient, exponent)?,
            Self::PlusInfinity => BoundaryPath::PlusInfinity,
            Self::MinusInfinity => BoundaryPath::MinusInfinity,
        })
    }

    /// Boundary data as pulses: c t^p = c Γ(1+p) δ_{1+p}(t).
    pub fn data(self) -> Result<TimeData, CliError> {
        let pulses = match self {
            Self::Constant(c) => PulseSeries::single(c, 1.0)?,
            Self::Linear { intercept, slope } => {
                PulseSeries::single(intercept, 1.0)?.plus(slope, 2.0)?
            }
            Self::Power {
                coefficient,
                exponent,
            } => {
                if !(exponent > -1.0) {
                    return Err(CliError::Config(format!(
                        "boundary data t^{exponent} is not locally integrable"
                    )));
                }
                PulseSeries::single(coefficient * gamma(1.0 + exponent), 1.0 + exponent)?
            }
            Self::PlusInfinity | Self::MinusInfinity => {
                return Err(CliError::Config("boundary data must be finite".into()))
            }
        };
        Ok(TimeData::Pulses(pulses))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Caputo,
    #[serde(alias = "riemann-liouville")]
    #[value(alias = "riemann-liouville")]
    Rl,
}

impl From<Kind> for DerivativeKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Caputo => DerivativeKind::Caputo,
            Kind::Rl => DerivativeKind::RiemannLiouville,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(default = "one")]
    pub u: f64,
    #[serde(default)]
    pub ux: f64,
    pub g: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideConfig {
    pub path: String,
    pub bc: Option<BcConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum InitialConfig {
    Constant(f64),
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
    Sampled { x: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_end: f64,
    pub steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbvpConfig {
    pub kind: Kind,
    pub nu: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    pub left: SideConfig,
    pub right: SideConfig,
    pub initial: InitialConfig,
    pub grid: GridConfig,
    pub output: OutputConfig,
    #[serde(default = "yes")]
    pub symbolic: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn side(cfg: &SideConfig, name: &str) -> Result<(BoundaryPath, RobinBC), CliError> {
    let path = cfg.path.parse::<Expr>()?.path()?;
    let bc = match (&cfg.bc, path.is_finite()) {
        (Some(bc), _) => RobinBC::new(bc.u, bc.ux, bc.g.parse::<Expr>()?.data()?)?,
        (None, false) => RobinBC::dirichlet(TimeData::constant(0.0)),
        (None, true) => {
            return Err(CliError::Config(format!(
                "the {name} boundary is finite and needs a 'bc'"
            )))
        }
    };
    Ok((path, bc))
}

impl IbvpConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn problem(&self) -> Result<IbvpProblem, CliError> {
        let (left_path, left) = side(&self.left, "left")?;
        let (right_path, right) = side(&self.right, "right")?;
        let initial = match &self.initial {
            InitialConfig::Constant(c) => InitialData::Constant(*c),
            InitialConfig::Piecewise { breaks, values } => {
                InitialData::piecewise_constant(breaks.clone(), values.clone())?
            }
            InitialConfig::Sampled { x, values } => {
                InitialData::sampled(x.clone(), values.clone())?
            }
        };
        let problem = IbvpProblem {
            kind: self.kind.into(),
            nu: self.nu,
            kappa: self.kappa,
            left,
            right,
            left_path,
            right_path,
            initial,
        };
        problem.validate()?;
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(s: &str) -> Expr {
        s.parse().unwrap()
    }

    #[test]
    fn grammar() {
        assert_eq!(expr("0"), Expr::Constant(0.0));
        assert_eq!(expr(" -2.5 "), Expr::Constant(-2.5));
        assert_eq!(expr("+infinity"), Expr::PlusInfinity);
        assert_eq!(expr("-Infinity"), Expr::MinusInfinity);
        assert_eq!(
            expr("1+0.5*t"),
            Expr::Linear {
                intercept: 1.0,
                slope: 0.5
            }
        );
        assert_eq!(
            expr("1e-3-2*t"),
            Expr::Linear {
                intercept: 1e-3,
                slope: -2.0
            }
        );
        assert_eq!(
            expr("t"),
            Expr::Linear {
                intercept: 0.0,
                slope: 1.0
            }
        );
        assert_eq!(
            expr("1.24*t^0.5"),
            Expr::Power {
                coefficient: 1.24,
                exponent: 0.5
            }
        );
        assert_eq!(
            expr("-t^0.25"),
            Expr::Power {
                coefficient: -1.0,
                exponent: 0.25
            }
        );
        assert!("2*x".parse::<Expr>().is_err());
        assert!("".parse::<Expr>().is_err());
    }

    #[test]
    fn power_data_matches_its_samples() {
        let g = expr("3*t^0.4").data().unwrap();
        let want = 3.0 * 2f64.powf(0.4);
        assert!((g.eval(2.0).unwrap() - want).abs() < 1e-12 * want);
        let g = expr("1-2*t").data().unwrap();
        assert!((g.eval(0.25).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"kind":"caputo","nu":0.5,"left":{"path":"0","bc":{"g":"1"}},
            "right":{"path":"+infinity"},"initial":{"constant":0},
            "grid":{"t_end":1,"steps":16},"output":{"x":[1],"t":[1]},"colour":"red"}"#;
        let err = IbvpConfig::parse(text).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        assert!(IbvpConfig::parse(&text.replace(r#","colour":"red""#, "")).is_ok());
    }

    #[test]
    fn finite_side_needs_a_condition() {
        let text = r#"{"kind":"rl","nu":0.5,"left":{"path":"0"},
            "right":{"path":"+infinity"},"initial":{"constant":0},
            "grid":{"t_end":1,"steps":16},"output":{"x":[1],"t":[1]}}"#;
        let cfg = IbvpConfig::parse(text).unwrap();
        assert!(matches!(cfg.problem(), Err(CliError::Config(_))));
    }
}

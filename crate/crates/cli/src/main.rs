//! `fracdiff` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fracdiff::fracquad::TimeGrid;
use fracdiff::ibvp::{self, Density, IbvpSolution, SolveConfig};
use fracdiff::specfun::{
    r_eval_detailed, r_laplace, r_real_integral, r_series, FracIndex, RConfig, REvaluation, RMethod,
};
use fracdiff::stefan::{stefan1_solve, stefan2_solve, Stefan1Config, Stefan2Config};
use fracdiff::verify::{Suite, Verifier};
use serde_json::json;

use config::{IbvpConfig, Kind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fracdiff::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use fracdiff::Error as E;
        match self {
            Self::Verify(_) => 1,
            Self::Config(_) | Self::Io(_) => 2,
            Self::Core(e) => match e {
                E::Domain(_) | E::SymbolicOnly(_) | E::Unrepresentable(_) => 2,
                E::IllPosed { .. } => 4,
                E::AnsatzExcluded { .. } => 5,
                E::SeriesNonConvergence { .. }
                | E::SeriesCancellation { .. }
                | E::Inversion { .. }
                | E::Quadrature { .. }
                | E::NoRoot { .. }
                | E::AmbiguousRoot(_)
                | E::NewtonFailure { .. } => 3,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "fracdiff",
    version,
    about = "Time-fractional diffusion toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate R_{mu,nu}(a, t) over the product of the given lists.
    EvalR(EvalRArgs),
    /// Solve an initial-boundary value problem described by a JSON file.
    SolveIbvp(IbvpArgs),
    /// Solve one of the two moving-boundary problems.
    SolveStefan(StefanArgs),
    /// Run a self-check suite and print a TAP report.
    Verify {
        /// specfun, fracquad, volterra, ibvp, stefan or all
        suite: String,
    },
    /// Emit R_{nu,nu}(a, t) and R_{0,nu}(a, t) profiles for plotting.
    Profiles(ProfilesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Series,
    Laplace,
    Integral,
}

#[derive(clap::Args)]
struct EvalRArgs {
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    mu: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    nu: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    a: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    t: Vec<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct IbvpArgs {
    config: PathBuf,
    /// Directory for u.csv and densities.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    One,
    Two,
}

#[derive(clap::Args)]
struct StefanArgs {
    #[arg(value_enum)]
    variant: Variant,
    #[arg(long)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, value_enum, default_value = "caputo")]
    kind: Kind,
    #[arg(long, default_value_t = 128)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Samples per axis of the u-grid written by `one`.
    #[arg(long, default_value_t = 11)]
    points: usize,
    /// `one`: u-grid CSV; `two`: JSON summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ProfilesArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.5")]
    nu: Vec<f64>,
    #[arg(long, default_value_t = 2.5)]
    a: f64,
    #[arg(long, default_value_t = 5.0)]
    t_end: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

/// Shortest round-trip form, switching to exponent notation outside
/// [1e-5, 1e16).
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = self.0;
        let mag = v.abs();
        if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&mag) {
            write!(f, "{v}")
        } else {
            write!(f, "{v:e}")
        }
    }
}

struct Csv<W: Write>(W);

impl<W: Write> Csv<W> {
    fn header(&mut self, cols: &[&str]) -> io::Result<()> {
        writeln!(self.0, "{}", cols.join(","))
    }

    fn row(&mut self, fields: &[f64]) -> io::Result<()> {
        self.row_with(fields, None)
    }

    fn row_with(&mut self, fields: &[f64], label: Option<&str>) -> io::Result<()> {
        let mut line: Vec<String> = fields.iter().map(|&v| Num(v).to_string()).collect();
        line.extend(label.map(str::to_owned));
        writeln!(self.0, "{}", line.join(","))
    }

    fn finish(mut self) -> io::Result<()> {
        self.0.flush()
    }
}

fn sink(path: Option<&Path>) -> io::Result<Csv<Box<dyn Write>>> {
    let w: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    Ok(Csv(w))
}

fn eval_one(method: Method, idx: FracIndex, a: f64, t: f64, cfg: &RConfig) -> Result<REvaluation> {
    let with = |method| {
        move |value| REvaluation {
            value,
            method,
            failover: false,
        }
    };
    Ok(match method {
        Method::Auto => r_eval_detailed(idx, a, t, cfg)?,
        Method::Series => r_series(idx, a, t, cfg)?,
        Method::Laplace => r_laplace(idx, a, t, &cfg.inversion).map(with(RMethod::Laplace))?,
        Method::Integral => r_real_integral(idx, a, t, &cfg.quad).map(with(RMethod::Integral))?,
    })
}

fn eval_r(args: &EvalRArgs) -> Result<()> {
    let cfg = RConfig::default();
    let mut rows = Vec::new();
    for &mu in &args.mu {
        for &nu in &args.nu {
            let idx = FracIndex::new(mu, nu)?;
            for &a in &args.a {
                for &t in &args.t {
                    rows.push((idx, a, t));
                }
            }
        }
    }
    let values = fracdiff::par::try_map_range(rows.len(), |i| {
        let (idx, a, t) = rows[i];
        eval_one(args.method, idx, a, t, &cfg)
    })?;
    let mut out = sink(args.output.as_deref())?;
    out.header(&["mu", "nu", "a", "t", "value", "method_used"])?;
    for ((idx, a, t), e) in rows.iter().zip(&values) {
        out.row_with(
            &[idx.mu(), idx.nu(), *a, *t, e.value],
            Some(&e.method.to_string()),
        )?;
    }
    Ok(out.finish()?)
}

/// Density samples at the grid nodes; a Dirac part is reported separately.
fn density_json(d: &Density, grid: &TimeGrid) -> Result<serde_json::Value> {
    Ok(match d {
        Density::Sampled(s) => json!({ "values": s.values() }),
        Density::Symbolic(p) => {
            let values = grid
                .nodes()
                .map(|t| {
                    if t > 0.0 {
                        p.eval_regular(t)
                    } else {
                        Ok(f64::NAN)
                    }
                })
                .collect::<fracdiff::Result<Vec<f64>>>()?;
            let pulses: Vec<_> = p
                .terms()
                .iter()
                .map(|q| json!({ "coefficient": q.coefficient, "order": q.order }))
                .collect();
            json!({ "values": values, "dirac": p.dirac_weight(), "pulses": pulses })
        }
    })
}

fn solve_ibvp(args: &IbvpArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let cfg = IbvpConfig::parse(&text)?;
    let problem = cfg.problem()?;
    let grid = TimeGrid::new(cfg.grid.t_end, cfg.grid.steps)?;
    let solve_cfg = SolveConfig {
        symbolic: cfg.symbolic,
        ..SolveConfig::default()
    };
    let sol = ibvp::solve(&problem, &grid, &solve_cfg)?;

    let points: Vec<(f64, f64)> = cfg
        .output
        .t
        .iter()
        .flat_map(|&t| cfg.output.x.iter().map(move |&x| (x, t)))
        .collect();
    let field = fracdiff::par::try_map_range(points.len(), |i| {
        let (x, t) = points[i];
        Ok::<_, fracdiff::Error>((sol.eval_u(x, t)?, sol.eval_ux(x, t)?))
    })?;
    fs::create_dir_all(&args.out_dir)?;
    let mut csv = sink(Some(&args.out_dir.join("u.csv")))?;
    csv.header(&["x", "t", "u", "ux"])?;
    for ((x, t), (u, ux)) in points.iter().zip(&field) {
        csv.row(&[*x, *t, *u, *ux])?;
    }
    csv.finish()?;

    let densities = json!({
        "t": grid.nodes().collect::<Vec<_>>(),
        "phi_minus": density_json(&sol.phi_minus, &grid)?,
        "phi_plus": density_json(&sol.phi_plus, &grid)?,
    });
    fs::write(
        args.out_dir.join("densities.json"),
        serde_json::to_string_pretty(&densities).expect("JSON values serialize"),
    )?;

    println!("{}", bc_report(&sol, &cfg.output.t)?);
    Ok(())
}

fn bc_report(sol: &IbvpSolution, times: &[f64]) -> Result<String> {
    let rows = times
        .iter()
        .map(|&t| {
            let [left, right] = sol.bc_residuals(t)?;
            Ok(json!({ "t": t, "left": left, "right": right }))
        })
        .collect::<Result<Vec<_>>>()?;
    let max = rows
        .iter()
        .flat_map(|r| [r["left"].as_f64(), r["right"].as_f64()])
        .flatten()
        .fold(0.0, |m: f64, v| m.max(v.abs()));
    let report = json!({
        "methods": sol.methods.iter().map(|m| format!("{m:?}")).collect::<Vec<_>>(),
        "bc_residuals": rows,
        "max_bc_residual": max,
    });
    Ok(serde_json::to_string_pretty(&report).expect("JSON values serialize"))
}

fn stefan_one(args: &StefanArgs) -> Result<()> {
    let sol = stefan1_solve(args.kind.into(), args.nu, args.r, &Stefan1Config::default())?;
    let summary = json!({
        "alpha": sol.alpha,
        "u0": sol.u0,
        "nu": sol.nu,
        "r": sol.r,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("JSON values serialize")
    );
    if let Some(path) = &args.out {
        let n = args.points.max(2);
        let x_max = 2.0 * sol.eta(args.t_end);
        let mut csv = sink(Some(path))?;
        csv.header(&["x", "t", "u"])?;
        for i in 1..=n {
            let t = args.t_end * i as f64 / n as f64;
            for j in 0..n {
                let x = x_max * j as f64 / (n - 1) as f64;
                csv.row(&[x, t, sol.eval_u(x, t)?])?;
            }
        }
        csv.finish()?;
    }
    Ok(())
}

fn stefan_two(args: &StefanArgs) -> Result<()> {
    let grid = TimeGrid::new(args.t_end, args.steps)?;
    let state = stefan2_solve(
        args.kind.into(),
        args.nu,
        args.r,
        grid,
        &Stefan2Config::default(),
    )?;
    let mut csv = sink(None)?;
    csv.header(&["t", "eta", "phi_minus", "residual_bc", "residual_stefan"])?;
    for (k, t) in grid.nodes().enumerate() {
        let res = |v: &[f64]| v.get(k).copied().unwrap_or(0.0);
        csv.row(&[
            t,
            state.eta.value(k),
            state.phi_minus.value(k),
            res(&state.residual_bc),
            res(&state.residual_stefan),
        ])?;
    }
    csv.finish()?;
    if let Some(path) = &args.out {
        let summary = json!({
            "nu": state.nu,
            "r": state.r,
            "kind": format!("{:?}", state.kind),
            "steps": grid.n_steps(),
            "t_end": grid.t_end(),
            "lambda0": state.lambda0,
            "amplitude": state.amplitude,
            "monotone": state.monotone,
            "max_residual": state.max_residual(),
            "max_iterations": state.iterations.iter().max(),
        });
        fs::write(
            path,
            serde_json::to_string_pretty(&summary).expect("JSON values serialize"),
        )?;
    }
    Ok(())
}

fn verify(suite: &str) -> Result<()> {
    let suite: Suite = suite.parse()?;
    let report = Verifier::default().run(suite);
    print!("{}", report.to_tap());
    match report.first_failure() {
        Some(c) => Err(CliError::Verify(format!("{}: {}", c.suite, c.name))),
        None => Ok(()),
    }
}

fn profiles(args: &ProfilesArgs) -> Result<()> {
    if args.points == 0 || !(args.t_end > 0.0) {
        return Err(CliError::Config(
            "profiles need points > 0 and t-end > 0".into(),
        ));
    }
    let cfg = RConfig::default();
    let mut rows = Vec::new();
    for &nu in &args.nu {
        for mu in [nu, 0.0] {
            let idx = FracIndex::new(mu, nu)?;
            rows.extend(
                (1..=args.points).map(|k| (idx, args.t_end * k as f64 / args.points as f64)),
            );
        }
    }
    let values = fracdiff::par::try_map_range(rows.len(), |i| {
        let (idx, t) = rows[i];
        fracdiff::specfun::r_eval(idx, args.a, t, &cfg)
    })?;
    let mut csv = sink(None)?;
    csv.header(&["nu", "mu", "a", "t", "value"])?;
    for ((idx, t), v) in rows.iter().zip(&values) {
        csv.row(&[idx.nu(), idx.mu(), args.a, *t, *v])?;
    }
    Ok(csv.finish()?)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FRACDIFF_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "FRACDIFF_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::EvalR(args) => eval_r(&args),
        Command::SolveIbvp(args) => solve_ibvp(&args),
        Command::SolveStefan(args) => match args.variant {
            Variant::One => stefan_one(&args),
            Variant::Two => stefan_two(&args),
        },
        Command::Verify { suite } => verify(&suite),
        Command::Profiles(args) => profiles(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracdiff: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.0,
            1.0,
            -2.5,
            0.1,
            1e-5,
            3.2e-15,
            6.02e23,
            f64::MIN_POSITIVE,
            1.0 / 3.0,
        ] {
            let s = Num(v).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(Num(5.1e-15).to_string(), "5.1e-15");
        assert_eq!(Num(0.25).to_string(), "0.25");
        assert_eq!(Num(f64::NAN).to_string(), "NaN");
    }

    #[test]
    fn exit_codes() {
        use fracdiff::Error as E;
        let code = |e: E| CliError::from(e).exit_code();
        assert_eq!(code(E::Domain("x".into())), 2);
        assert_eq!(
            code(E::Quadrature {
                error: 1.0,
                tolerance: 0.1
            }),
            3
        );
        assert_eq!(
            code(E::IllPosed {
                node: 1,
                t: 0.1,
                condition: 1e20
            }),
            4
        );
        assert_eq!(code(E::AnsatzExcluded { nu: 0.3 }), 5);
        assert_eq!(CliError::Verify("x".into()).exit_code(), 1);
    }
}

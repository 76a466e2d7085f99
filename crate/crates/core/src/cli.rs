//! Command-line front end.
//!
//! Exit codes: 0 success, 1 an inequality check failed, 2 usage or input
//! error, 3 numerical non-convergence.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::commutation::{eliminate_all, eliminate_all_block};
use crate::continuum::{constant_sweep, ContinuumProblem, Potential};
use crate::eigen::{spectrum, SolverOptions, DEFAULT_TOL, MAX_PADDING};
use crate::error::Error;
use crate::functional::{comparison_ratios, g_gamma, DEFAULT_QUAD_TOL};
use crate::operator::Operator;
use crate::verify::{check_with_spectrum, fuzz, InequalityName, RandomOperatorSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

/// Environment variable capping the worker threads (0 = automatic).
pub const THREADS_ENV: &str = "JACOBI_LT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "jacobi-lt", version, about = "Spectral inequalities for Jacobi operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues outside [-2, 2] as JSON.
    Spectrum(SpectrumArgs),
    /// Remove all eigenvalues by commutation and report the identity ledger.
    Commute(CommuteArgs),
    /// Check named inequalities on an operator or a random corpus.
    Verify(VerifyArgs),
    /// Tabulate G_gamma and the comparison ratios as CSV.
    Gfun(GfunArgs),
    /// Lattice approximation of a continuum potential as CSV.
    Continuum(ContinuumArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Eigenvalue stabilization tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Largest padding tried before giving up with non-convergence.
    #[arg(long, default_value_t = MAX_PADDING)]
    pub max_truncation: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_padding: self.max_truncation,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CommuteArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Operator JSON file.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub input: Option<PathBuf>,
    /// Fuzz over random operators instead of reading one.
    #[arg(long)]
    pub random: bool,
    /// Comma-separated inequality names; defaults to all that apply.
    #[arg(long, value_delimiter = ',')]
    pub names: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub window_half_width: usize,
    #[arg(long, default_value_t = 1.0)]
    pub potential_scale: f64,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 1)]
    pub block_dim: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Spacing {
    /// Logarithmic in `lambda - 2`.
    Log,
    Linear,
}

#[derive(Debug, Args)]
pub struct GfunArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2.001)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    pub quad_tol: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PotentialFamily {
    PoschlTeller,
    SquareWell,
    Gaussian,
    Tabulated,
}

#[derive(Debug, Args)]
pub struct ContinuumArgs {
    #[arg(long, value_enum)]
    pub potential: PotentialFamily,
    /// Family parameter as `name=value` (s; depth, width; depth, sigma).
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// File of whitespace- or comma-separated samples for `tabulated`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Half-width of the sampled interval; defaults to where |V| < 1e-12.
    #[arg(long)]
    pub domain: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.5")]
    pub gamma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub c: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    pub k: Vec<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Failure of a subcommand with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code_for(&e),
            message: e.to_string(),
        }
    }
}

/// Exit code for a library error: numerical failures map to 3, invalid
/// input to 2.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. }
        | Error::ChainStalled { .. }
        | Error::IdentityViolation { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::RecursionOverflow { .. }
        | Error::PositivityViolation { .. }
        | Error::NoEigenvalue => EXIT_NO_CONVERGENCE,
        _ => EXIT_USAGE,
    }
}

/// Output of a successful subcommand: text plus whether every check passed.
struct Outcome {
    text: String,
    passed: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    configure_threads();
    let (result, output) = match &cli.command {
        Command::Spectrum(a) => (run_spectrum(a), &a.output),
        Command::Commute(a) => (run_commute(a), &a.output),
        Command::Verify(a) => (run_verify(a), &a.output),
        Command::Gfun(a) => (run_gfun(a), &a.output),
        Command::Continuum(a) => (run_continuum(a, err), &a.output),
    };
    match result {
        Ok(outcome) => {
            let written = match output {
                Some(path) => std::fs::write(path, &outcome.text).map_err(|e| e.to_string()),
                None => out.write_all(outcome.text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return EXIT_USAGE;
            }
            if outcome.passed {
                EXIT_OK
            } else {
                let _ = writeln!(err, "error: at least one inequality check failed");
                EXIT_CHECK_FAILED
            }
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn configure_threads() {
    let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if n > 0 {
        // Fails only if the pool already exists (repeated runs in one process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn read_operator(path: &PathBuf) -> Result<Operator, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(Operator::from_json(&text)?)
}

/// Pretty JSON with sorted keys.
fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

fn run_spectrum(a: &SpectrumArgs) -> Result<Outcome, Failure> {
    let op = read_operator(&a.input)?;
    let spec = spectrum(&op, &a.solver.options())?;
    Ok(Outcome {
        text: to_json(&spec),
        passed: true,
    })
}

fn run_commute(a: &CommuteArgs) -> Result<Outcome, Failure> {
    let (text, slack) = match read_operator(&a.input)? {
        Operator::Scalar(op) => {
            let chain = eliminate_all(&op, a.tol)?;
            (to_json(&chain), chain.certified_slack)
        }
        Operator::Block(op) => {
            let chain = eliminate_all_block(&op, a.tol)?;
            (to_json(&chain), chain.certified_slack)
        }
    };
    Ok(Outcome {
        text,
        passed: slack >= 0.0,
    })
}

fn parse_names(names: &[String]) -> Result<Vec<InequalityName>, Failure> {
    names
        .iter()
        .map(|n| n.trim().parse::<InequalityName>().map_err(|e| Failure::usage(e.to_string())))
        .collect()
}

fn default_names(block_dim: usize, free: bool) -> Vec<InequalityName> {
    InequalityName::ALL
        .into_iter()
        .filter(|n| n.applies_to_block_dim(block_dim))
        .filter(|n| !(block_dim == 1 && *n == InequalityName::FinalMatrix))
        .filter(|n| free || !n.needs_free_offdiagonal())
        .collect()
}

fn run_verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let opts = a.solver.options();
    let names = parse_names(&a.names)?;
    if a.random {
        let spec = RandomOperatorSpec {
            block_dim: a.block_dim,
            offdiag_jitter: a.jitter,
            potential_scale: a.potential_scale,
            seed: a.seed,
            window_half_width: a.window_half_width,
        };
        let names = if names.is_empty() { default_names(a.block_dim, a.jitter == 0.0) } else { names };
        let summary = fuzz(&spec, &names, Some(a.gamma), a.trials, &opts)?;
        if !summary.failures.is_empty() && summary.only_solver_errors() {
            let first = &summary.failures[0];
            return Err(Failure {
                code: EXIT_NO_CONVERGENCE,
                message: format!(
                    "{} trial checks could not be evaluated; first (trial {}): {}",
                    summary.failures.len(),
                    first.trial,
                    first.error.as_deref().unwrap_or_default()
                ),
            });
        }
        return Ok(Outcome {
            passed: summary.passed(),
            text: to_json(&summary),
        });
    }
    let op = read_operator(a.input.as_ref().expect("clap enforces --input"))?;
    let names = if names.is_empty() { default_names(op.block_dim(), op.has_free_offdiagonal()) } else { names };
    let spec = spectrum(&op, &opts)?;
    let reports = names
        .iter()
        .map(|&n| check_with_spectrum(&op, n, Some(a.gamma), spec.clone(), opts.tol))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(Outcome {
        passed: reports.iter().all(|r| r.passed),
        text: to_json(&reports),
    })
}

/// `x` with 12 significant digits, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // Rounding may carry into a new leading digit; the value stays exact.
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        format!("{mantissa}e{e}")
    }
}

fn run_gfun(a: &GfunArgs) -> Result<Outcome, Failure> {
    if !(a.lambda_min > 2.0) || !(a.lambda_max >= a.lambda_min) || a.points == 0 {
        return Err(Failure::usage("need 2 < lambda-min <= lambda-max and at least one point"));
    }
    let grid: Vec<f64> = (0..a.points)
        .map(|i| {
            if a.points == 1 {
                return a.lambda_min;
            }
            let t = i as f64 / (a.points - 1) as f64;
            match a.spacing {
                Spacing::Linear => a.lambda_min + t * (a.lambda_max - a.lambda_min),
                Spacing::Log => {
                    let (lo, hi) = ((a.lambda_min - 2.0).ln(), (a.lambda_max - 2.0).ln());
                    2.0 + (lo + t * (hi - lo)).exp()
                }
            }
        })
        .collect();
    let with_ratios = a.gamma == 1.0;
    let mut text = String::from("lambda,gamma,G,R1,R2\n");
    for lambda in grid {
        let g = g_gamma(a.gamma, lambda, a.quad_tol)?;
        let (r1, r2) = if with_ratios {
            let (r1, r2) = comparison_ratios(lambda, a.quad_tol)?;
            (format_sig(r1), format_sig(r2))
        } else {
            (String::new(), String::new())
        };
        text.push_str(&format!("{},{},{},{r1},{r2}\n", format_sig(lambda), format_sig(a.gamma), format_sig(g)));
    }
    Ok(Outcome { text, passed: true })
}

fn read_table(path: &PathBuf) -> Result<Vec<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| Failure::usage(format!("bad sample `{s}`: {e}"))))
        .collect()
}

fn build_potential(a: &ContinuumArgs) -> Result<Potential, Failure> {
    let get = |name: &str| -> Result<f64, Failure> {
        a.params
            .iter()
            .rev()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Failure::usage(format!("missing --param {name}=...")))
    };
    let known: &[&str] = match a.potential {
        PotentialFamily::PoschlTeller => &["s"],
        PotentialFamily::SquareWell => &["depth", "width"],
        PotentialFamily::Gaussian => &["depth", "sigma"],
        PotentialFamily::Tabulated => &[],
    };
    if let Some((k, _)) = a.params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        return Err(Failure::usage(format!("unknown parameter `{k}` for this potential")));
    }
    let p = match a.potential {
        PotentialFamily::PoschlTeller => Potential::PoschlTeller { s: get("s")? },
        PotentialFamily::SquareWell => Potential::SquareWell {
            depth: get("depth")?,
            width: get("width")?,
        },
        PotentialFamily::Gaussian => Potential::Gaussian {
            depth: get("depth")?,
            sigma: get("sigma")?,
        },
        PotentialFamily::Tabulated => {
            let table = a.table.as_ref().ok_or_else(|| Failure::usage("tabulated potential needs --table"))?;
            let half_width = a.domain.ok_or_else(|| Failure::usage("tabulated potential needs --domain"))?;
            Potential::Tabulated {
                half_width,
                samples: read_table(table)?,
            }
        }
    };
    p.validate()?;
    Ok(p)
}

fn run_continuum(a: &ContinuumArgs, err: &mut dyn Write) -> Result<Outcome, Failure> {
    let potential = build_potential(a)?;
    let opts = a.solver.options();
    let mut text = String::from("gamma,c,k,lhs,rhs,ratio,bound,margin\n");
    for &c in &a.c {
        let mut problem = ContinuumProblem::new(potential.clone(), a.gamma.first().copied().unwrap_or(1.5), c);
        if let Some(x) = a.domain {
            problem = problem.with_domain(x);
        }
        let sweep = constant_sweep(&problem, &a.gamma, &a.k, &opts)?;
        for s in &sweep.skipped {
            let _ = writeln!(err, "warning: skipped gamma={} c={} k={}: {}", s.gamma, s.c, s.k, s.reason);
        }
        for r in &sweep.rows {
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                format_sig(r.gamma),
                format_sig(r.c),
                r.k,
                format_sig(r.lhs),
                format_sig(r.rhs),
                format_sig(r.ratio),
                format_sig(r.bound),
                format_sig(r.margin)
            ));
        }
    }
    Ok(Outcome { text, passed: true })
}

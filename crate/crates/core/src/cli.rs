//! Command-line front end.
//!
//! Every command prints one pretty-printed JSON [`RunReport`] on stdout.
//! Exit codes: 0 property holds (or command succeeded), 1 violation found,
//! 2 internal error or inconsistent chain, 64 usage error, 65 invalid input
//! (function, matrix, state, or a domain error during evaluation).

use std::ffi::OsString;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Tolerances, TrialBudget};
use crate::error::Error;
use crate::monotone::{self, CheckSettings};
use crate::psineq::{self, PsCheckConfig};
use crate::scalarfn::{DomainInterval, ScalarFunction};
use crate::symmat::{self, State, SymMatrix};
use crate::verdict::{Status, Verdict};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "opmono", version, about = "Falsification toolkit for operator monotone functions and trace inequalities")]
pub struct Cli {
    /// Worker threads for trial execution (never changes results).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub jobs: Option<u64>,
    /// Require --seed for randomized commands.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Eigenvalue clamp applied before matrix functions (-inf disables).
    #[arg(long, global = true, default_value_t = Tolerances::DEFAULT.clamp, value_parser = parse_clamp)]
    pub clamp: f64,
    /// Relative PSD tolerance.
    #[arg(long = "psd-tol", global = true, default_value_t = Tolerances::DEFAULT.psd_rel, value_parser = parse_tol)]
    pub psd_tol: f64,
    /// Absolute tolerance for trace-inequality margins.
    #[arg(long = "ps-tol", global = true, default_value_t = Tolerances::DEFAULT.ps_abs, value_parser = parse_tol)]
    pub ps_tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Master seed; drawn from entropy and echoed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// Function expression in the variable t.
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=symmat::MAX_DIM as u64))]
    pub order: u64,
    /// Open domain interval lo:hi (lo = 0 means 1e-6).
    #[arg(long, value_parser = parse_domain)]
    pub domain: Option<DomainInterval>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Falsify n-monotonicity (Loewner matrices and ordered pairs).
    CheckMonotone(OrderArgs),
    /// Falsify n-concavity.
    CheckConcave(OrderArgs),
    /// Falsify the contraction inequality f(C*AC) >= C*f(A)C.
    CheckHp(OrderArgs),
    /// Run the four-leg implication chain and flag contradictions.
    Chain(OrderArgs),
    /// Falsify the Powers-Stormer inequality for f.
    CheckPs {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=symmat::MAX_DIM as u64))]
        dim: u64,
        /// "trace" or a JSON file holding a state or a density matrix.
        #[arg(long, default_value = "trace")]
        state: String,
        #[arg(long = "ordered-only")]
        ordered_only: bool,
        /// Use the singular t^2 counterexample pair at trial 0.
        #[arg(long)]
        fixtures: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Estimate the infimum condition characterizing the trace.
    TraceCondition {
        #[arg(long)]
        g: String,
        #[arg(long, default_value = "1e-3:1e3", value_parser = parse_domain)]
        range: DomainInterval,
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Search for a state separating A from f(A)^1/2 g(B) f(A)^1/2.
    FindCounterexample {
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=symmat::MAX_DIM as u64))]
        dim: u64,
        #[arg(long, value_parser = parse_domain)]
        domain: Option<DomainInterval>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Frechet derivative of f at a matrix in a direction.
    Frechet {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        direction: String,
    },
    /// Reproduce the worked examples.
    Fixtures,
}

fn parse_clamp(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_nan() || v == f64::INFINITY {
        return Err("clamp must be a number or -inf".into());
    }
    Ok(v)
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err("tolerance must be finite and nonnegative".into());
    }
    Ok(v)
}

fn parse_domain(s: &str) -> Result<DomainInterval, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("upper bound: {e}"))?;
    let lo = if lo == 0.0 { DomainInterval::DEFAULT.lo } else { lo };
    DomainInterval::new(lo, hi).map_err(|e| e.to_string())
}

/// Values the run depended on; re-running with them reproduces the report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainInterval>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub options: serde_json::Map<String, Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub version: String,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    pub timing_seconds: f64,
}

/// Captured result of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::InvalidDimension(_) => EXIT_USAGE,
            Error::NoConvergence { .. } => EXIT_ERROR,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn verdict_code(v: &Verdict) -> i32 {
    match v.status {
        Status::HoldsWithinBudget => EXIT_HOLDS,
        Status::Violated => EXIT_VIOLATED,
        Status::DomainError => EXIT_DATA,
    }
}

struct Context {
    tol: Tolerances,
    strict: bool,
    stderr: String,
}

impl Context {
    fn budget(&mut self, args: &BudgetArgs) -> Result<TrialBudget, Failure> {
        if args.trials == 0 {
            return Err(usage("--trials must be positive"));
        }
        let seed = match args.seed {
            Some(s) => s,
            None if self.strict => return Err(usage("--strict requires --seed")),
            None => {
                let s = rand::rng().random();
                self.stderr.push_str(&format!("note: no --seed given, using seed {s}\n"));
                s
            }
        };
        Ok(TrialBudget::new(args.trials, seed))
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            function: None,
            dim: None,
            trials: None,
            seed: None,
            domain: None,
            tolerances: self.tol,
            options: serde_json::Map::new(),
        }
    }

    fn read_matrix(&mut self, path: &str) -> Result<SymMatrix, Failure> {
        let text = read_file(path)?;
        let (m, asym) = SymMatrix::from_json_str(&text)?;
        if asym > symmat::ASYMMETRY_WARN {
            self.stderr
                .push_str(&format!("warning: {path} is asymmetric by {asym:e}; using its symmetric part\n"));
        }
        Ok(m)
    }

    fn read_state(&mut self, source: &str) -> Result<State, Failure> {
        if source == "trace" {
            return Ok(State::CanonicalTrace);
        }
        let text = read_file(source)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Failure::from(Error::InvalidState(e.to_string())))?;
        if value.get("kind").is_some() {
            let state: State =
                serde_json::from_value(value).map_err(|e| Failure::from(Error::InvalidState(e.to_string())))?;
            // re-validate, deserialization bypasses the constructors
            return Ok(match state {
                State::CanonicalTrace => State::CanonicalTrace,
                State::Density { weight } => State::density(weight)?,
                State::Functional { weight } => State::functional(weight)?,
            });
        }
        Ok(State::density(self.read_matrix(source)?)?)
    }
}

fn read_file(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("cannot read {path}: {e}"),
    })
}

fn parse_fn(src: &str) -> Result<ScalarFunction, Failure> {
    Ok(ScalarFunction::parse(src)?)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn settings(budget: TrialBudget, domain: Option<DomainInterval>, tol: Tolerances) -> CheckSettings {
    CheckSettings {
        budget,
        domain: domain.unwrap_or_default(),
        tol,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::CheckMonotone(_) => "check-monotone",
        Command::CheckConcave(_) => "check-concave",
        Command::CheckHp(_) => "check-hp",
        Command::Chain(_) => "chain",
        Command::CheckPs { .. } => "check-ps",
        Command::TraceCondition { .. } => "trace-condition",
        Command::FindCounterexample { .. } => "find-counterexample",
        Command::Frechet { .. } => "frechet",
        Command::Fixtures => "fixtures",
    }
}

fn dispatch(command: &Command, ctx: &mut Context) -> Result<(ConfigEcho, Option<Verdict>, Option<Value>, i32), Failure> {
    let tol = ctx.tol;
    let mut echo = ctx.echo();
    match command {
        Command::CheckMonotone(a) | Command::CheckConcave(a) | Command::CheckHp(a) | Command::Chain(a) => {
            let f = parse_fn(&a.function)?;
            let budget = ctx.budget(&a.budget)?;
            let s = settings(budget, a.domain, tol);
            echo.function = Some(a.function.clone());
            echo.dim = Some(a.order);
            echo.trials = Some(budget.trials);
            echo.seed = Some(budget.seed);
            echo.domain = Some(s.domain);
            let n = a.order as usize;
            let verdict = match command {
                Command::CheckMonotone(_) => monotone::check_n_monotone(&f, n, &s)?,
                Command::CheckConcave(_) => monotone::check_n_concave(&f, n, &s)?,
                Command::CheckHp(_) => monotone::check_hansen_pedersen(&f, n, &s)?,
                _ => {
                    let report = monotone::chain_consistency(&f, n, &s)?;
                    let code = if !report.inconsistencies.is_empty() {
                        EXIT_ERROR
                    } else if report.legs.iter().any(|l| l.verdict.status == Status::DomainError) {
                        EXIT_DATA
                    } else if report.all_hold() {
                        EXIT_HOLDS
                    } else {
                        EXIT_VIOLATED
                    };
                    return Ok((echo, None, Some(to_value(&report)), code));
                }
            };
            let code = verdict_code(&verdict);
            Ok((echo, Some(verdict), None, code))
        }
        Command::CheckPs {
            function,
            dim,
            state,
            ordered_only,
            fixtures,
            budget,
        } => {
            let f = parse_fn(function)?;
            let st = ctx.read_state(state)?;
            let budget = ctx.budget(budget)?;
            echo.function = Some(function.clone());
            echo.dim = Some(*dim);
            echo.trials = Some(budget.trials);
            echo.seed = Some(budget.seed);
            echo.options.insert("state".into(), to_value(&st));
            echo.options.insert("ordered_only".into(), Value::Bool(*ordered_only));
            echo.options.insert("fixtures".into(), Value::Bool(*fixtures));
            let verdict = psineq::check_ps(&PsCheckConfig {
                f,
                dim: *dim as usize,
                budget,
                state: st,
                ordered_only: *ordered_only,
                inject_fixture: *fixtures,
                tol,
            })?;
            let code = verdict_code(&verdict);
            Ok((echo, Some(verdict), None, code))
        }
        Command::TraceCondition { g, range, grid } => {
            let gf = parse_fn(g)?;
            echo.function = Some(g.clone());
            echo.domain = Some(*range);
            echo.options.insert("grid".into(), to_value(grid));
            let est = psineq::trace_condition_inf(&gf, range, *grid)?;
            Ok((echo, None, Some(to_value(&est)), EXIT_HOLDS))
        }
        Command::FindCounterexample { g, dim, domain, budget } => {
            let gf = parse_fn(g)?;
            let budget = ctx.budget(budget)?;
            let s = settings(budget, *domain, tol);
            echo.function = Some(g.clone());
            echo.dim = Some(*dim);
            echo.trials = Some(budget.trials);
            echo.seed = Some(budget.seed);
            echo.domain = Some(s.domain);
            let verdict = psineq::counterexample_search(&gf, *dim as usize, &s)?;
            let code = verdict_code(&verdict);
            Ok((echo, Some(verdict), None, code))
        }
        Command::Frechet {
            function,
            matrix,
            direction,
        } => {
            let f = parse_fn(function)?;
            let a = ctx.read_matrix(matrix)?;
            let c = ctx.read_matrix(direction)?;
            echo.function = Some(function.clone());
            echo.dim = Some(a.dim() as u64);
            echo.options.insert("matrix".into(), Value::String(matrix.clone()));
            echo.options.insert("direction".into(), Value::String(direction.clone()));
            let d = monotone::frechet_derivative(&f, &a, &c)?;
            Ok((echo, None, Some(serde_json::json!({ "derivative": d })), EXIT_HOLDS))
        }
        Command::Fixtures => {
            let report = psineq::reproduce_fixtures(&tol)?;
            let code = if report.all_reproduced { EXIT_HOLDS } else { EXIT_VIOLATED };
            Ok((echo, None, Some(to_value(&report)), code))
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_HOLDS };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() { (String::new(), text) } else { (text, String::new()) };
            return CliOutcome {
                exit_code: code,
                stdout,
                stderr,
            };
        }
    };
    run_cli(&cli)
}

pub fn run_cli(cli: &Cli) -> CliOutcome {
    let mut ctx = Context {
        tol: Tolerances {
            clamp: cli.clamp,
            psd_rel: cli.psd_tol,
            ps_abs: cli.ps_tol,
        },
        strict: cli.strict,
        stderr: String::new(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        builder = builder.num_threads(j as usize);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            return CliOutcome {
                exit_code: EXIT_ERROR,
                stdout: String::new(),
                stderr: format!("error: cannot start worker pool: {e}\n"),
            }
        }
    };
    let start = Instant::now();
    let outcome = pool.install(|| dispatch(&cli.command, &mut ctx));
    match outcome {
        Ok((config, verdict, result, exit_code)) => {
            let report = RunReport {
                schema: SCHEMA_VERSION,
                command: command_name(&cli.command).to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config,
                verdict,
                result,
                timing_seconds: start.elapsed().as_secs_f64(),
            };
            let mut stdout = serde_json::to_string_pretty(&report).expect("report serializes");
            stdout.push('\n');
            CliOutcome {
                exit_code,
                stdout,
                stderr: ctx.stderr,
            }
        }
        Err(f) => {
            ctx.stderr.push_str(&format!("error: {}\n", f.message));
            CliOutcome {
                exit_code: f.code,
                stdout: String::new(),
                stderr: ctx.stderr,
            }
        }
    }
}

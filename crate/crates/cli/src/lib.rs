//! `sot` command-line front end. Every command reads JSON, writes JSON, and
//! reports through its exit code: 0 success, 1 self-test failure or an
//! unfinished search, 2 infeasible (the output carries the certificate),
//! 3 input error.

mod commands;
mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use sot_core::monge::DEFAULT_NODE_BUDGET;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Environment variable that overrides `--mode`.
pub const MODE_ENV: &str = "SOT_MODE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Rational arithmetic; results print as "p/q" strings.
    Exact,
    /// Double precision with relative tolerance 1e-9.
    Float,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sot", version, about = "Exact simultaneous optimal transport solver and certifier")]
pub struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Mode::Exact)]
    pub mode: Mode,

    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal kernel and its cost.
    Solve { instance: PathBuf },
    /// Decide whether a transport exists, with a witness or a Farkas ray.
    Feasible { instance: PathBuf },
    /// Dual potentials and the duality gap.
    Dual { instance: PathBuf },
    /// Wages and skill prices from a production-maximizing matching.
    Equilibrium {
        instance: PathBuf,
        #[arg(long)]
        production: PathBuf,
    },
    /// Slice-by-slice solution of a two-way instance.
    Decompose { instance: PathBuf },
    /// Wasserstein distance between measure tuples in one class.
    Wasserstein {
        instance: PathBuf,
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Martingale transport between profile laws versus the kernel problem.
    Parity { instance: PathBuf },
    /// Scalarized and positive-part lower bounds.
    Bounds {
        instance: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Cheapest transport map and its gap to the kernel optimum.
    Monge {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        nodes: u64,
    },
    /// Quota-constrained resettlement placement.
    Refugee {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        nodes: u64,
    },
    /// Necessary condition for Gaussian Markov transports.
    Markov {
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        variances: Vec<String>,
    },
    /// Run the bundled golden cases.
    Selftest {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Brute-force oracles and instance generation.
    #[command(subcommand)]
    Dev(DevCommand),
}

#[derive(Debug, Subcommand)]
pub enum DevCommand {
    /// Minimize the kernel LP over all of its vertices.
    VertexEnumerate { instance: PathBuf },
    /// Transportation simplex on a one-component instance.
    ClassicOt { instance: PathBuf },
    /// Try every map.
    MongeEnumerate { instance: PathBuf },
    /// Print a seeded random instance.
    RandomInstance {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = InstanceKind::Feasible)]
        kind: InstanceKind,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InstanceKind {
    /// Target is the image of the source under a random kernel.
    Feasible,
    /// Independent source and target.
    Independent,
    /// Same profile law on both sides, on the real line.
    Twoway,
    /// Distinct profiles at every point.
    Injective,
    /// Resettlement instance with `n` families, `m` affiliates and `d` quotas.
    Refugee,
}

/// Result of one command: a JSON body and the exit code to report.
#[derive(Debug)]
pub(crate) struct Reply {
    pub body: Value,
    pub code: i32,
}

impl Reply {
    pub fn ok(body: Value) -> Self {
        Self { body, code: EXIT_OK }
    }

    pub fn infeasible(body: Value) -> Self {
        Self { body, code: EXIT_INFEASIBLE }
    }
}

/// A failure that produces no JSON body.
#[derive(Debug)]
pub(crate) struct Failure {
    pub message: String,
    pub code: i32,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: EXIT_INPUT }
    }
}

impl From<sot_core::Error> for Failure {
    fn from(e: sot_core::Error) -> Self {
        let code = match e {
            sot_core::Error::Infeasible => EXIT_INFEASIBLE,
            sot_core::Error::BudgetExceeded(_) => EXIT_FAILED,
            _ => EXIT_INPUT,
        };
        Self { message: e.to_string(), code }
    }
}

fn resolve_mode(flag: Mode, env: Option<&str>) -> Result<Mode, Failure> {
    match env.map(str::trim) {
        None | Some("") => Ok(flag),
        Some(v) => Mode::from_str(v, true)
            .map_err(|_| Failure::input(format!("{MODE_ENV}={v:?} is not exact or float"))),
    }
}

/// Runs one invocation with `SOT_MODE` read from the process environment.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var(MODE_ENV).ok();
    run_with_env(args, env.as_deref(), stdout, stderr)
}

/// Runs one invocation with an explicit `SOT_MODE` value.
pub fn run_with_env<I, T>(args: I, mode_env: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return EXIT_INPUT;
        }
    };
    let mode = match resolve_mode(cli.mode, mode_env) {
        Ok(mode) => mode,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    if let Command::Selftest { dir } = &cli.command {
        return selftest::run(dir.as_deref(), stdout, stderr);
    }
    match commands::execute(&cli.command, mode) {
        Ok(reply) => emit(reply, &cli, mode, stdout, stderr),
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Solve { .. } => "solve",
        Command::Feasible { .. } => "feasible",
        Command::Dual { .. } => "dual",
        Command::Equilibrium { .. } => "equilibrium",
        Command::Decompose { .. } => "decompose",
        Command::Wasserstein { .. } => "wasserstein",
        Command::Parity { .. } => "parity",
        Command::Bounds { .. } => "bounds",
        Command::Monge { .. } => "monge",
        Command::Refugee { .. } => "refugee",
        Command::Markov { .. } => "markov",
        Command::Selftest { .. } => "selftest",
        Command::Dev(DevCommand::VertexEnumerate { .. }) => "dev vertex-enumerate",
        Command::Dev(DevCommand::ClassicOt { .. }) => "dev classic-ot",
        Command::Dev(DevCommand::MongeEnumerate { .. }) => "dev monge-enumerate",
        Command::Dev(DevCommand::RandomInstance { .. }) => "dev random-instance",
    }
}

fn emit(reply: Reply, cli: &Cli, mode: Mode, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mut body = reply.body;
    if let Value::Object(map) = &mut body {
        map.entry("schema").or_insert_with(|| sot_core::io::SCHEMA.into());
        if !matches!(cli.command, Command::Dev(DevCommand::RandomInstance { .. })) {
            map.insert("command".into(), command_name(&cli.command).into());
            map.insert("mode".into(), mode.name().into());
        }
    }
    let text = serde_json::to_string_pretty(&body).expect("JSON values always serialize") + "\n";
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => reply.code,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}

//! Command-line front end: scenario runs, constraint and gas tables, and
//! trace analysis.

mod audit;
mod gas;
mod runner;
mod scenario;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::fieldhash::HashKind;
use crate::privacy::{analyze_trace, parse_trace};
use crate::zkrelation::{count_constraints, CircuitCostModel};

pub use audit::{AuditFailure, AuditResult, AUDITS};
pub use gas::{GasEstimate, GasModel};
pub use runner::{run_scenario, ActionResult, ActionStatus, RunReport, Simulation};
pub use scenario::{
    ActionSpec, ActorSpec, ConfigError, Fees, FeesSection, Op, OrderingName, ParamsSection, Role,
    Scenario,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const DEFAULT_DEPTHS: [u32; 5] = [10, 15, 20, 25, 30];
pub const DEFAULT_WINDOWS: [u64; 6] = [5000, 10000, 15000, 20000, 25000, 30000];

#[derive(Debug, Parser)]
#[command(
    name = "amr",
    version,
    about = "Anonymous mixer with rewards: simulator and cost reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a scenario file and print its summary.
    Run {
        scenario: PathBuf,
        /// Write the event log (JSON lines) here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Constraint counts of the withdraw circuit.
    Constraints {
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Gas estimates for deposit, withdraw and redeem.
    GasReport {
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        with_lending: bool,
    },
    /// Rolling deposit averages and the deposit/withdraw gap of a trace.
    AnalyzeTrace {
        trace: PathBuf,
        /// Comma-separated window spans in blocks.
        #[arg(long, value_delimiter = ',')]
        windows: Vec<u64>,
    },
    /// Print the round-constant file.
    Constants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KindArg {
    Mimc,
    Poseidon,
}

impl From<KindArg> for HashKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Mimc => HashKind::Mimc,
            KindArg::Poseidon => HashKind::Poseidon,
        }
    }
}

fn kinds(k: Option<KindArg>) -> Vec<HashKind> {
    k.map_or_else(|| HashKind::all().to_vec(), |k| vec![k.into()])
}

fn depths(d: Option<u32>) -> Vec<u32> {
    d.map_or_else(|| DEFAULT_DEPTHS.to_vec(), |d| vec![d])
}

pub fn constraints_table(kinds: &[HashKind], depths: &[u32]) -> Result<String, ConfigError> {
    let model = CircuitCostModel::default();
    let mut out = String::from("kind\tdepth\tconstraints\n");
    for &kind in kinds {
        for &depth in depths {
            let n = count_constraints(kind, depth, &model).map_err(|e| ConfigError::Invalid {
                field: "depth".into(),
                message: e.to_string(),
            })?;
            out.push_str(&format!("{kind}\t{depth}\t{n}\n"));
        }
    }
    Ok(out)
}

pub fn gas_table(
    model: &GasModel,
    kinds: &[HashKind],
    depths: &[u32],
    with_lending: bool,
) -> String {
    let mut out = String::from("kind\tdepth\tlending\tdeposit\twithdraw\tredeem\n");
    for &kind in kinds {
        for &depth in depths {
            let e = model.estimate(kind, depth, with_lending);
            out.push_str(&format!(
                "{kind}\t{depth}\t{}\t{}\t{}\t{}\n",
                e.with_lending, e.deposit, e.withdraw, e.redeem
            ));
        }
    }
    out
}

pub fn analyze_trace_text(text: &str, windows: &[u64]) -> Result<String, ConfigError> {
    let records = parse_trace(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let spans = if windows.is_empty() {
        DEFAULT_WINDOWS.to_vec()
    } else {
        windows.to_vec()
    };
    let report = analyze_trace(&records, &spans).map_err(|e| ConfigError::Parse(e.to_string()))?;
    Ok(report.to_jsonl())
}

fn read(path: &PathBuf) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write(path: &PathBuf, text: &str) -> Result<(), ConfigError> {
    std::fs::write(path, text).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Runs a parsed command, writing normal output to `out`. Returns the
/// process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, ConfigError> {
    let emit = |out: &mut dyn Write, s: &str| {
        out.write_all(s.as_bytes()).map_err(|e| ConfigError::Io {
            path: "<stdout>".into(),
            message: e.to_string(),
        })
    };
    match cli.command {
        Command::Run {
            scenario,
            log,
            summary,
        } => {
            let report = run_scenario(Scenario::load(&scenario)?)?;
            if let Some(p) = log {
                write(&p, &report.event_log)?;
            }
            match summary {
                Some(p) => write(&p, &report.summary_json())?,
                None => emit(out, &report.summary_json())?,
            }
            Ok(report.exit_code())
        }
        Command::Constraints { kind, depth } => {
            emit(out, &constraints_table(&kinds(kind), &depths(depth))?)?;
            Ok(EXIT_OK)
        }
        Command::GasReport {
            kind,
            depth,
            with_lending,
        } => {
            emit(
                out,
                &gas_table(
                    &GasModel::default(),
                    &kinds(kind),
                    &depths(depth),
                    with_lending,
                ),
            )?;
            Ok(EXIT_OK)
        }
        Command::AnalyzeTrace { trace, windows } => {
            emit(out, &analyze_trace_text(&read(&trace)?, &windows)?)?;
            Ok(EXIT_OK)
        }
        Command::Constants => {
            emit(out, &crate::fieldhash::params::render_constants_file())?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args`, executes, and maps errors to the exit-code contract.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

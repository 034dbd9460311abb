//! `eirc`: command-line driver for the eirkit toolkit.
//!
//! Subcommands: `gen`, `verify`, `fmt`, `expand`, `simulate`, `stats`.
//! Machine-readable output goes to stdout, diagnostics to stderr. Exit
//! codes: 0 success, 1 usage error, 2 parse/verify failure, 3 runtime
//! expansion error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use eirkit::emit::{
    circuit_filename, compute_stats, emit_jsonl, emit_qasm2, jsonl_header, EmitConfig, EmitFormat,
    JSONL_FILENAME,
};
use eirkit::expand::{expand_stream, plan, ExpansionPlan, PlanError};
use eirkit::ir::Program;
use eirkit::sim::{run_analytic, run_sampled, OutcomeDistribution};
use eirkit::verify::{verify, Severity};
use eirkit::workloads::{self, WorkloadKind, WorkloadSpec};
use eirkit::{derive_stream, parse_module, print_module};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "eirc",
    version,
    about = "Parse, verify, expand, emit, and simulate Ensemble-IR programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// Master seed for deterministic expansion.
    #[arg(long, env = "EIRC_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one of the bundled example ensembles.
    Gen {
        /// Workload name: ghz, ghz_rc, wirecut_qaoa, rx_sweep.
        workload: String,
        /// Number of ensemble iterations.
        #[arg(long, default_value_t = 100)]
        iterations: u64,
        /// Qubit count (ghz only).
        #[arg(long)]
        qubits: Option<u32>,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Parse and verify a program, reporting diagnostics.
    Verify { file: PathBuf },
    /// Print the canonical form of a program.
    Fmt {
        file: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Expand an ensemble into flat circuits.
    Expand {
        file: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Output format.
        #[arg(long, default_value = "qasm2", value_parser = ["qasm2", "jsonl"])]
        format: String,
        /// Expand only this iteration index.
        #[arg(long)]
        iteration: Option<u64>,
        /// Output directory (stream to stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Expand one iteration and simulate it.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Iteration to simulate.
        #[arg(long, default_value_t = 0)]
        iteration: u64,
        /// Number of measurement shots (sampled mode).
        #[arg(long, conflicts_with = "analytic")]
        shots: Option<u64>,
        /// Exact distribution instead of sampling (the default).
        #[arg(long)]
        analytic: bool,
    },
    /// Expansion size statistics as a JSON object.
    Stats {
        file: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
}

struct Failure {
    code: u8,
    message: Option<String>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: Some(message.into()) }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INVALID, message: Some(message.into()) }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure { code: EXIT_RUNTIME, message: Some(message.into()) }
    }

    fn silent(code: u8) -> Self {
        Failure { code, message: None }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if let Some(message) = failure.message {
                eprintln!("eirc: {message}");
            }
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { workload, iterations, qubits, out } => {
            let kind = WorkloadKind::from_name(&workload).ok_or_else(|| {
                Failure::usage(format!(
                    "unknown workload `{workload}` (expected one of: {})",
                    workloads::WORKLOAD_NAMES.join(", ")
                ))
            })?;
            let spec = WorkloadSpec { kind, n_qubits: qubits, iterations };
            let text = workloads::build(&spec).map_err(|e| Failure::usage(e.to_string()))?;
            write_output(out.as_deref(), &text)
        }
        Command::Verify { file } => {
            let program = load_program(&file)?;
            report_diagnostics(&file, &program)
        }
        Command::Fmt { file, out } => {
            let program = load_program(&file)?;
            write_output(out.as_deref(), &print_module(&program))
        }
        Command::Expand { file, seed, format, iteration, out } => {
            let program = load_program(&file)?;
            let format = EmitFormat::from_name(&format).expect("validated by clap");
            let plan = make_plan(&file, &program, seed.seed, iteration)?;
            expand_command(&plan, format, seed.seed, out.as_deref())
        }
        Command::Simulate { file, seed, iteration, shots, analytic } => {
            let program = load_program(&file)?;
            let plan = make_plan(&file, &program, seed.seed, Some(iteration))?;
            simulate_command(&plan, iteration, seed.seed, shots, analytic)
        }
        Command::Stats { file, seed } => {
            let program = load_program(&file)?;
            let plan = make_plan(&file, &program, seed.seed, None)?;
            let stats = compute_stats(&plan).map_err(|e| Failure::runtime(e.to_string()))?;
            println!("{}", stats.to_json());
            Ok(())
        }
    }
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_module(&text).map_err(|e| {
        eprintln!("{}:{e}", path.display());
        Failure::silent(EXIT_INVALID)
    })
}

/// Prints every diagnostic; fails when any is an error.
fn report_diagnostics(path: &Path, program: &Program) -> Result<(), Failure> {
    let diagnostics = verify(program);
    for diag in &diagnostics {
        eprintln!("{}:{diag}", path.display());
    }
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        Err(Failure::silent(EXIT_INVALID))
    } else {
        Ok(())
    }
}

fn make_plan<'p>(
    path: &Path,
    program: &'p Program,
    seed: u64,
    iteration: Option<u64>,
) -> Result<ExpansionPlan<'p>, Failure> {
    let filter = iteration.map(|i| vec![i]);
    plan(program, seed, filter).map_err(|e| match e {
        PlanError::Invalid { diagnostics, .. } => {
            for diag in &diagnostics {
                eprintln!("{}:{diag}", path.display());
            }
            Failure::silent(EXIT_INVALID)
        }
        PlanError::FilterOutOfRange(i) => {
            Failure::usage(format!("--iteration {i} is outside the ensemble's index set"))
        }
        other => Failure::invalid(other.to_string()),
    })
}

fn expand_command(
    plan: &ExpansionPlan,
    format: EmitFormat,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let config = EmitConfig::new(format, seed);
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    let io_fail = |e: std::io::Error| Failure::usage(format!("write failed: {e}"));
    match (format, out) {
        (EmitFormat::Qasm2, Some(dir)) => {
            for circuit in expand_stream(plan) {
                let circuit = circuit.map_err(|e| Failure::runtime(e.to_string()))?;
                let text =
                    emit_qasm2(&circuit, &config).map_err(|e| Failure::runtime(e.to_string()))?;
                fs::write(dir.join(circuit_filename(circuit.iteration_index)), text)
                    .map_err(io_fail)?;
            }
        }
        (EmitFormat::Jsonl, Some(dir)) => {
            let mut file = fs::File::create(dir.join(JSONL_FILENAME)).map_err(io_fail)?;
            file.write_all(jsonl_header(seed).as_bytes()).map_err(io_fail)?;
            for circuit in expand_stream(plan) {
                let circuit = circuit.map_err(|e| Failure::runtime(e.to_string()))?;
                file.write_all(emit_jsonl(&circuit, &config).as_bytes()).map_err(io_fail)?;
            }
        }
        (EmitFormat::Qasm2, None) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for circuit in expand_stream(plan) {
                let circuit = circuit.map_err(|e| Failure::runtime(e.to_string()))?;
                let text =
                    emit_qasm2(&circuit, &config).map_err(|e| Failure::runtime(e.to_string()))?;
                lock.write_all(text.as_bytes()).map_err(io_fail)?;
            }
        }
        (EmitFormat::Jsonl, None) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(jsonl_header(seed).as_bytes()).map_err(io_fail)?;
            for circuit in expand_stream(plan) {
                let circuit = circuit.map_err(|e| Failure::runtime(e.to_string()))?;
                lock.write_all(emit_jsonl(&circuit, &config).as_bytes()).map_err(io_fail)?;
            }
        }
    }
    Ok(())
}

fn simulate_command(
    plan: &ExpansionPlan,
    iteration: u64,
    seed: u64,
    shots: Option<u64>,
    _analytic: bool,
) -> Result<(), Failure> {
    let circuit = eirkit::expand::expand_iteration(plan, iteration)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let result = match shots {
        Some(0) => return Err(Failure::usage("--shots must be at least 1")),
        Some(shots) => run_sampled(&circuit, shots, derive_stream(seed, iteration)),
        None => run_analytic(&circuit),
    };
    let dist = result.map_err(|e| Failure::runtime(format!("iteration {iteration}: {e}")))?;
    let json = match dist {
        OutcomeDistribution::Analytic { probabilities } => serde_json::json!({
            "schema": 1,
            "seed": seed,
            "iteration": iteration,
            "mode": "analytic",
            "probabilities": probabilities,
        }),
        OutcomeDistribution::Sampled { counts, shots } => serde_json::json!({
            "schema": 1,
            "seed": seed,
            "iteration": iteration,
            "mode": "sampled",
            "shots": shots,
            "counts": counts,
        }),
    };
    println!("{json}");
    Ok(())
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

use clap::{Parser, Subcommand, ValueEnum};
use holocalc::curve_invariants::k_bound;
use holocalc::orbit_spectrum::{discretized_spectrum, AsymptoticOperator};
use holocalc::scenario::{self, emit, load_scenario, Format, LoadError, LoadOptions};
use holocalc::Half;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_QUERY: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "holocalc",
    version,
    about = "Index, winding and intersection calculator for punctured holomorphic curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario file without running its queries.
    Check { scenario: PathBuf },
    /// Run every query of a scenario and print the report.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
        /// Fourier truncation; overrides the environment and the file.
        #[arg(long)]
        truncation: Option<usize>,
        /// Evaluate queries concurrently (output order is unchanged).
        #[arg(long)]
        parallel: bool,
    },
    /// Discretized spectrum of one asymptotic operator, as JSON.
    Spectrum {
        /// JSON file holding the sample rows `[s11, s12, s22]`.
        #[arg(long, conflicts_with = "scalar", required_unless_present = "scalar")]
        operator: Option<PathBuf>,
        /// Use the constant operator S = θ·1 instead of a file.
        #[arg(long, allow_negative_numbers = true)]
        scalar: Option<f64>,
        #[arg(long, default_value_t = 64)]
        truncation: usize,
    },
    /// Closed-form reference values.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
    /// List the query kinds a scenario may use.
    Queries,
}

#[derive(Subcommand)]
enum Oracle {
    /// K(c, G), the minimum of k + ℓ over k ≤ G with 2k + ℓ > 2c.
    Kbound {
        /// Half-integer c, written as n or n/2.
        #[arg(long, allow_negative_numbers = true)]
        c: Half,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        boundary: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { scenario } => {
            match load_scenario(&scenario, LoadOptions { truncation: None, use_env: true }) {
                Ok(s) => {
                    println!(
                        "ok: {} orbits, {} curves, {} covers, {} queries",
                        s.catalog.orbits().count(),
                        s.curves.len(),
                        s.covers.len(),
                        s.queries.len()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => load_failure(&e),
            }
        }
        Command::Run { scenario, format, truncation, parallel } => {
            let s = match load_scenario(&scenario, LoadOptions { truncation, use_env: true }) {
                Ok(s) => s,
                Err(e) => return load_failure(&e),
            };
            let report = scenario::run(&s, parallel);
            let fmt = match format {
                OutFormat::Text => Format::Text,
                OutFormat::Json => Format::Json,
            };
            print!("{}", emit(&report, fmt));
            if report.exit_code() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_QUERY)
            }
        }
        Command::Spectrum { operator, scalar, truncation } => {
            let op = match (operator, scalar) {
                (_, Some(theta)) => AsymptoticOperator::scalar(theta),
                (Some(path), None) => {
                    let text = match std::fs::read_to_string(&path) {
                        Ok(t) => t,
                        Err(e) => {
                            eprintln!("error: {}: {e}", path.display());
                            return ExitCode::from(EXIT_IO);
                        }
                    };
                    match serde_json::from_str(&text) {
                        Ok(op) => op,
                        Err(e) => {
                            eprintln!("error: {}: {e}", path.display());
                            return ExitCode::from(EXIT_VALIDATION);
                        }
                    }
                }
                (None, None) => unreachable!("clap requires one of --operator and --scalar"),
            };
            match discretized_spectrum(&op, truncation) {
                Ok(d) => {
                    println!("{}", serde_json::to_string_pretty(&d).expect("spectra serialize"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_QUERY })
                }
            }
        }
        Command::Oracle { which: Oracle::Kbound { c, g, boundary } } => {
            println!("{}", k_bound(c, g, boundary));
            ExitCode::SUCCESS
        }
        Command::Queries => {
            for op in scenario::REGISTRY {
                println!("{:<24} {:<20} {}", op.name, op.module, op.basis);
            }
            ExitCode::SUCCESS
        }
    }
}

fn load_failure(e: &LoadError) -> ExitCode {
    eprintln!("{e}");
    match e {
        LoadError::Io(_) => ExitCode::from(EXIT_IO),
        LoadError::Invalid(_) => ExitCode::from(EXIT_VALIDATION),
    }
}

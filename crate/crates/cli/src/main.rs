//! Command-line front end: parse a problem file, dispatch to the
//! feasibility and criterion operations, and emit a machine-readable
//! verdict report (or a human-readable summary).
//!
//! Exit codes: 0 affirmative (CP / Exists / Holds / Valid / Positive),
//! 1 negative with an embedded certificate, 2 marginal or undecided,
//! 3 input error, 4 numeric failure.

mod dispatch;
mod schema;

use clap::{Parser, Subcommand};
use cpmap::report::{EXIT_INPUT_ERROR, EXIT_NUMERIC_FAILURE};

#[derive(Parser)]
#[command(
    name = "cpmap",
    about = "Decide completely positive / channel / probabilistic extendability of partially \
             specified linear maps, with certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a JSON file and print a report.
    Run {
        /// Path to the problem file (see `cpmap schema`).
        file: std::path::PathBuf,
        /// Override feas_tol and gap_tol together.
        #[arg(long)]
        tol: Option<f64>,
        /// Override the primal/dual feasibility tolerance.
        #[arg(long)]
        feas_tol: Option<f64>,
        /// Override the duality-gap tolerance.
        #[arg(long)]
        gap_tol: Option<f64>,
        /// Override the PSD tolerance.
        #[arg(long)]
        psd_tol: Option<f64>,
        /// Override the strict-feasibility margin tolerance.
        #[arg(long)]
        margin_tol: Option<f64>,
        /// Weight of the trace-preservation penalty (channel mode).
        #[arg(long)]
        w: Option<f64>,
        /// Random seed (counterexample search).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of trials (counterexample search).
        #[arg(long)]
        trials: Option<usize>,
        /// Output format.
        #[arg(long, default_value = "json", value_parser = ["json", "summary"])]
        format: String,
        /// Omit the timestamp field (reports become byte-identical across
        /// runs).
        #[arg(long)]
        no_timestamp: bool,
    },
    /// List or emit the shipped fixtures.
    Fixtures {
        #[command(subcommand)]
        which: FixturesCommand,
    },
    /// Print the problem-file JSON schema.
    Schema,
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// List all fixture names.
    List,
    /// Emit one fixture as JSON.
    Emit { name: String },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            file,
            tol,
            feas_tol,
            gap_tol,
            psd_tol,
            margin_tol,
            w,
            seed,
            trials,
            format,
            no_timestamp,
        } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", file.display());
                    std::process::exit(EXIT_INPUT_ERROR);
                }
            };
            let mut problem = match schema::parse_problem_file(&text) {
                Ok(p) => p,
                Err(schema::ParseError(msg)) => {
                    eprintln!("error: {msg}");
                    std::process::exit(EXIT_INPUT_ERROR);
                }
            };
            if let Some(t) = tol {
                problem.tolerances.feas_tol = t;
                problem.tolerances.gap_tol = t;
            }
            if let Some(t) = feas_tol {
                problem.tolerances.feas_tol = t;
            }
            if let Some(t) = gap_tol {
                problem.tolerances.gap_tol = t;
            }
            if let Some(t) = psd_tol {
                problem.tolerances.psd_tol = t;
            }
            if let Some(t) = margin_tol {
                problem.tolerances.margin_tol = t;
            }
            if let Some(w) = w {
                problem.weight_w = w;
            }
            if let Some(s) = seed {
                problem.seed = s;
            }
            if let Some(t) = trials {
                problem.trials = t;
            }
            match dispatch::run(&problem) {
                Ok(report) => {
                    let report = if no_timestamp { report } else { report.stamped() };
                    match format.as_str() {
                        "summary" => println!("{}", dispatch::summarize(&report)),
                        _ => println!("{}", report.to_json()),
                    }
                    report.exit_code
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    match e {
                        cpmap::Error::NumericFailure(_) | cpmap::Error::EigFailure => {
                            EXIT_NUMERIC_FAILURE
                        }
                        _ => EXIT_INPUT_ERROR,
                    }
                }
            }
        }
        Command::Fixtures { which } => match which {
            FixturesCommand::List => {
                for name in cpmap::fixtures::fixture_names() {
                    println!("{name}");
                }
                0
            }
            FixturesCommand::Emit { name } => match cpmap::fixtures::emit(&name) {
                Ok(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("fixture JSON"));
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INPUT_ERROR
                }
            },
        },
        Command::Schema => {
            println!(
                "{}",
                serde_json::to_string_pretty(&schema::schema_document()).expect("schema JSON")
            );
            0
        }
    };
    std::process::exit(code);
}

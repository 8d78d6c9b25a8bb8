use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use starkq::pipeline::{self, run, Bundle, Config, Summary, VerificationReport};

const EXIT_OK: u8 = 0;
const EXIT_FALSE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "starkq",
    version,
    about = "Exact verification of Stark, Popescu and Burns conjectures over Q"
)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = pipeline::PRECISION_ENV, default_value_t = pipeline::DEFAULT_PRECISION)]
    precision: u32,
    /// Do not rerun at doubled precision after a tolerance failure.
    #[arg(long, global = true)]
    no_escalate: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on one bundle.
    Verify {
        bundle: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run every bundle in a directory and print the summary table.
    Batch {
        dir: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Directory for per-bundle reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in fixture bundle (sqrt3, sqrt10, sqrt42).
    Fixture { name: String },
    /// Tabulate reports by Galois type, class number and lowest Burns statement.
    Summarize {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Fill a bundle's L-value table from a known exact beta e'.
    DeriveLvalues {
        bundle: PathBuf,
        /// Coefficients in group order, e.g. "43,-19,-24/1393".
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, default_value_t = 80)]
        digits: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn verdict_code(r: &VerificationReport) -> u8 {
    if r.all_verdicts_true() {
        EXIT_OK
    } else {
        EXIT_FALSE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = Config {
        precision: cli.precision,
        escalate: !cli.no_escalate,
    };
    match cli.command {
        Command::Verify { bundle, report } => {
            let r = match Bundle::from_path(&bundle).and_then(|b| pipeline::run_pipeline(&b, &cfg)) {
                Ok(r) => r,
                Err(e) => return input_error(e),
            };
            let json = r.to_json();
            match report {
                Some(path) => {
                    if let Err(e) = pipeline::write_atomic(&path, &json) {
                        return input_error(format!("{}: {e}", path.display()));
                    }
                    for (name, v) in r.verdicts() {
                        eprintln!("{name}: {v}");
                    }
                }
                None => println!("{json}"),
            }
            ExitCode::from(verdict_code(&r))
        }
        Command::Batch { dir, jobs, out } => {
            if let Some(o) = &out {
                if let Err(e) = std::fs::create_dir_all(o) {
                    return input_error(format!("{}: {e}", o.display()));
                }
            }
            let outcome = match pipeline::batch(&dir, &cfg, jobs, out.as_deref()) {
                Ok(o) => o,
                Err(e) => return input_error(format!("{}: {e}", dir.display())),
            };
            print!("{}", outcome.summary.render());
            if outcome.any_error() {
                ExitCode::from(EXIT_INPUT)
            } else if outcome.any_false() {
                ExitCode::from(EXIT_FALSE)
            } else {
                ExitCode::from(EXIT_OK)
            }
        }
        Command::Fixture { name } => match pipeline::fixture(&name) {
            Some(text) => {
                print!("{text}");
                ExitCode::from(EXIT_OK)
            }
            None => {
                let names: Vec<&str> = pipeline::FIXTURES.iter().map(|(n, _)| *n).collect();
                input_error(format!("unknown fixture `{name}` (available: {})", names.join(", ")))
            }
        },
        Command::Summarize { reports } => {
            let mut parsed = Vec::new();
            let mut failures = Vec::new();
            for p in &reports {
                match std::fs::read_to_string(p)
                    .map_err(|e| e.to_string())
                    .and_then(|t| VerificationReport::from_json(&t).map_err(|e| e.to_string()))
                {
                    Ok(r) => parsed.push(r),
                    Err(e) => failures.push((p.display().to_string(), e)),
                }
            }
            let mut summary = Summary::from_reports(&parsed);
            let failed = !failures.is_empty();
            summary.failures = failures;
            print!("{}", summary.render());
            ExitCode::from(if failed { EXIT_INPUT } else { EXIT_OK })
        }
        Command::DeriveLvalues {
            bundle,
            beta,
            digits,
            out,
        } => {
            let mut b = match Bundle::from_path(&bundle) {
                Ok(b) => b,
                Err(e) => return input_error(e),
            };
            let beta = match run::parse_group_ring(&beta) {
                Ok(x) => x,
                Err(e) => return input_error(format!("--beta: {e}")),
            };
            let source = format!("derive-lvalues from beta e' = {}", beta_string(&beta));
            match run::derive_lvalue_table(&b, &beta, cfg.precision, digits, &source) {
                Ok(table) => b.l_values = Some(table),
                Err(e) => return input_error(e),
            }
            let json = b.to_json() + "\n";
            match out {
                Some(p) => match pipeline::write_atomic(&p, &json) {
                    Ok(()) => ExitCode::from(EXIT_OK),
                    Err(e) => input_error(format!("{}: {e}", p.display())),
                },
                None => {
                    print!("{json}");
                    ExitCode::from(EXIT_OK)
                }
            }
        }
    }
}

fn beta_string(b: &starkq::groupalg::QElem) -> String {
    let parts: Vec<String> = b.coeffs.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

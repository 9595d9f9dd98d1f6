use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holonoid_cli::{gallery, load_scenario, run_scenario, validate, Overrides, RunOptions};

#[derive(Parser)]
#[command(name = "holonoid", version, about = "Holonomy groupoids of singular subalgebroids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or gallery:NAME) and write its report.
    Run {
        scenario: String,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for CSV tables.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Record per-task wall-clock times.
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Check a scenario without running its tasks.
    Validate {
        scenario: String,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// List the built-in scenarios.
    GalleryList,
    /// Write a built-in scenario to a file or stdout.
    GalleryExport {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_phi: Option<f64>,
    #[arg(long)]
    tol_residual: Option<f64>,
    #[arg(long)]
    rk_step: Option<f64>,
    #[arg(long)]
    degree_bound: Option<u32>,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Overrides {
            seed: a.seed,
            tol_phi: a.tol_phi,
            tol_residual: a.tol_residual,
            rk_step: a.rk_step,
            degree_bound: a.degree_bound,
        }
    }
}

const VALIDATION: u8 = 2;

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            out,
            csv,
            timings,
            overrides,
        } => {
            let opts = RunOptions {
                overrides: overrides.into(),
                timings,
            };
            let report = match load_scenario(&scenario).and_then(|s| run_scenario(&s, &opts)) {
                Ok(r) => r,
                Err(d) => {
                    eprintln!("error: {d}");
                    return ExitCode::from(VALIDATION);
                }
            };
            if let Err(e) = write_out(out.as_ref(), &report.to_json()) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            if let Some(dir) = csv {
                if let Err(e) = report.write_tables(&dir) {
                    eprintln!("error: {}: {e}", dir.display());
                    return ExitCode::FAILURE;
                }
            }
            for t in report.tasks.iter().filter(|t| !t.passed) {
                for a in t.assertions.iter().filter(|a| !a.passed) {
                    eprintln!(
                        "FAIL {}: {} {} {} (actual {})",
                        t.id,
                        a.metric,
                        serde_json::to_string(&a.op).unwrap_or_default().trim_matches('"'),
                        a.expected,
                        a.actual.as_ref().map_or("missing".into(), |v| v.to_string())
                    );
                }
                if let Some(e) = &t.error {
                    eprintln!("  error: {e}");
                }
            }
            let s = report.summary;
            eprintln!(
                "{}: {} tasks, {} errors, {}/{} assertions passed",
                report.scenario,
                s.tasks,
                s.errors,
                s.assertions - s.failed_assertions,
                s.assertions
            );
            if s.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Validate { scenario, overrides } => {
            let diagnostics = match load_scenario(&scenario) {
                Ok(s) => validate(&s, &overrides.into()),
                Err(d) => vec![d],
            };
            for d in &diagnostics {
                eprintln!("error: {d}");
            }
            if diagnostics.is_empty() {
                eprintln!("{scenario}: ok");
                ExitCode::SUCCESS
            } else {
                ExitCode::from(VALIDATION)
            }
        }
        Command::GalleryList => {
            for n in gallery::names() {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Command::GalleryExport { name, out } => match gallery::text(&name) {
            Ok(t) => match write_out(out.as_ref(), t) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            },
            Err(d) => {
                eprintln!("error: {d}");
                ExitCode::from(VALIDATION)
            }
        },
    }
}

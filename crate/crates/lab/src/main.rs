use std::path::PathBuf;
use std::process::ExitCode;

use bethe_lab::{load_config, output::to_json_bytes, run, LabError, OutputFormat, RunOptions};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bethe-lab", version, about = "Spectral experiments on the binary half-tree")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config, printing the effective settings.
    Validate { config: PathBuf },
}

fn report_error(err: &LabError) -> ExitCode {
    let body = match err {
        LabError::Config(errors) => json!({ "error": "config", "details": errors }),
        LabError::Io { .. } => json!({ "error": "io", "message": err.to_string() }),
        _ => json!({ "error": "numeric", "message": err.to_string() }),
    };
    eprintln!("{body}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => load_config(&config).and_then(|cfg| {
            let bytes = to_json_bytes(&cfg)?;
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(ExitCode::SUCCESS)
        }),
        Command::Run {
            config,
            out,
            format,
            threads,
        } => load_config(&config).and_then(|cfg| {
            let manifest = run(
                &cfg,
                &RunOptions {
                    out_dir: out,
                    format,
                    threads,
                },
            )?;
            println!(
                "{}",
                json!({
                    "experiments": manifest.experiments,
                    "residual_summary": manifest.residual_summary,
                    "wall_clock_seconds": manifest.wall_clock_seconds,
                })
            );
            Ok(if manifest.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }),
    };
    result.unwrap_or_else(|e| report_error(&e))
}

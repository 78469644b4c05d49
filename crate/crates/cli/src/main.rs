//! `symkit`: check, render, graph, evaluate and report on `.sym` models.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "symkit", version, about = "Goal-driven security metrics toolchain")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format: text, json, dot or svg depending on the command.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Write the payload to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress summaries and progress notes.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate models.
    Check {
        #[arg(required = true)]
        models: Vec<PathBuf>,
    },
    /// Print natural-language formulations of objectives and goals.
    Render {
        model: PathBuf,
        #[arg(long)]
        id: Option<String>,
    },
    /// Emit the traceability graph.
    Graph { model: PathBuf },
    /// Evaluate metrics for one period and route their actions.
    Eval {
        model: PathBuf,
        #[arg(long = "measurements", required = true)]
        measurements: Vec<PathBuf>,
        #[arg(long, default_value = "all")]
        metric: String,
        #[arg(long)]
        period: String,
    },
    /// Evaluate a range of periods and produce a report.
    Report {
        model: PathBuf,
        #[arg(long = "measurements", required = true)]
        measurements: Vec<PathBuf>,
        #[arg(long, default_value = "all")]
        metric: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Diff two model versions and show what each change affects.
    Impact {
        old: PathBuf,
        new: PathBuf,
        /// Same as `--format json`.
        #[arg(long)]
        json: bool,
    },
    /// Rewrite a model in canonical form.
    Fmt { model: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(commands::run(cli))
}

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gentropy::acceptance::DEFAULT_SEED;
use gentropy::Error;
use serde::Serialize;

/// Generalized entropies of concave functions on symbolic systems.
#[derive(Debug, Parser)]
#[command(name = "gentropy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ratio limits against η, U(2) and elasticity of g.
    Classify {
        #[arg(long)]
        g: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Entropy trace H(g, P_n)/n of a system.
    Trace {
        #[arg(long)]
        g: String,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bounds h(g1) between C_i·h(g2) and C^s·h(g2).
    Sandwich {
        #[arg(long)]
        g1: String,
        #[arg(long)]
        g2: String,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Standard-example block counts with h(g) = γ.
    Construct {
        #[arg(long)]
        g: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=8))]
        stages: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tower lower-bound schedule reaching entropy M.
    Towers {
        #[arg(long)]
        g: String,
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=10))]
        stages: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args, Serialize)]
struct SystemArgs {
    /// `bernoulli:p,…`, `uniform:k`, `sturmian:β` or `stdexample`.
    #[arg(long)]
    system: String,
    /// Trace length; the standard example uses its saturation lengths.
    #[arg(long = "n", default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..=1_000_000))]
    n_max: u64,
    /// Target rate of the standard example.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    /// Stages of the standard example.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=8))]
    #[serde(skip_serializing_if = "Option::is_none")]
    stages: Option<u64>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Artifact path; the format defaults to the extension.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

impl OutputArgs {
    fn format(&self) -> Format {
        self.format.unwrap_or(match &self.output {
            Some(p) if p.extension().is_some_and(|e| e == "csv") => Format::Csv,
            _ => Format::Json,
        })
    }
}

/// Failures mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownFamily(_)
            | Error::InvalidParams { .. }
            | Error::Parse { .. }
            | Error::InvalidSystem(_)
            | Error::InfeasibleTargets { .. }
            | Error::Precondition(_)
            | Error::Unsupported(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}

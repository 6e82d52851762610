use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use terrace_cli::{execute, parse_config_with, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Equilibria,
    Front,
    SpeedRegion,
    WeightCheck,
    Numrange,
    Simulate,
    Figure,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Equilibria => Command::Equilibria,
            Sub::Front => Command::Front,
            Sub::SpeedRegion => Command::SpeedRegion,
            Sub::WeightCheck => Command::WeightCheck,
            Sub::Numrange => Command::Numrange,
            Sub::Simulate => Command::Simulate,
            Sub::Figure => Command::Figure,
        }
    }
}

/// Two-front superposition laboratory.
#[derive(Debug, Parser)]
#[command(name = "terrace", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// Configuration file (`key = value` lines with `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for sampled checks; overrides `seed` in the file.
    #[arg(long)]
    seed: Option<u64>,
    /// fig1, fig2-left, fig2-right, compliant or violating.
    #[arg(long)]
    preset: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = Command::from(cli.command);
    let text = match &cli.config {
        None => String::new(),
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
    };
    let cfg = parse_config_with(&text, Some(command), cli.preset.as_deref()).map(|mut c| {
        if let Some(seed) = cli.seed {
            c.seed = seed;
            c.entries.insert("seed".into(), seed.to_string());
        }
        c
    });
    let code = execute(cfg, command.name(), &cli.out);
    ExitCode::from(code as u8)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mckit_cli::{catalog, load, run};

#[derive(Parser)]
#[command(name = "mckit", version, about = "Molecular communication channel models and simulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or built-in scenario name) and write CSV.
    Run {
        config: String,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override a value, e.g. `--set params.diffusion=1e-9` or `--set params.curves.0.label=a`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List built-in scenarios.
    List,
    /// Print the parsed scenario back as canonical JSON.
    EchoConfig {
        config: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output, seed, overrides } => run(&config, &output, seed, &overrides).map(|out| {
            for note in out.notes {
                eprintln!("{note}");
            }
        }),
        Command::List => {
            for e in catalog::catalog() {
                println!("{:<24} {}", e.name, e.description);
            }
            Ok(())
        }
        Command::EchoConfig { config, overrides } => load(&config, None, &overrides).map(|s| println!("{}", s.to_json_pretty())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

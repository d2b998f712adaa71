use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use htscatter::config::LoadedConfig;
use htscatter::drivers::{run_basis, run_emit_circuit, run_hamiltonian, run_resources, run_scatter, RunOptions};
use htscatter::RunError;

#[derive(Parser)]
#[command(name = "htscatter", version, about = "Hamiltonian-truncation scattering simulator")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides outputs.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single-threaded, no wall-clock time in the manifest.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Verb {
    /// Enumerate the truncated basis.
    Basis(Common),
    /// Assemble and export the Hamiltonian.
    Hamiltonian(Common),
    /// Run the scattering recipe and export time series.
    Scatter(Common),
    /// Qubit and sparsity tables.
    Resources(Common),
    /// Emit state-preparation, ramp and time-step circuits.
    EmitCircuit(Common),
    /// Parse and validate a configuration.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(verb: Verb) -> Result<String, RunError> {
    let (common, driver): (Common, fn(&LoadedConfig, &RunOptions) -> _) = match verb {
        Verb::ValidateConfig { config } => {
            LoadedConfig::from_path(&config)?;
            return Ok(format!("{}: valid", config.display()));
        }
        Verb::Basis(c) => (c, run_basis),
        Verb::Hamiltonian(c) => (c, run_hamiltonian),
        Verb::Scatter(c) => (c, run_scatter),
        Verb::Resources(c) => (c, run_resources),
        Verb::EmitCircuit(c) => (c, run_emit_circuit),
    };
    let loaded = LoadedConfig::from_path(&common.config)?;
    let options = RunOptions {
        out: common.out,
        deterministic: common.deterministic,
        threads: common.threads,
    };
    let manifest = driver(&loaded, &options)?;
    Ok(format!("{}: wrote {} files", manifest.verb, manifest.files.len() + 1))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

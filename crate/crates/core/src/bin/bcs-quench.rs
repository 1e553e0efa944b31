use std::path::PathBuf;
use std::process::ExitCode;

use bcs_quench::config::{schema_json, Mode, RunConfig};
use bcs_quench::run::{run, RunOptions};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(version, about = "Quench dynamics of cavity-mediated BCS-type spin models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single quench with optional time-triggered stages.
    Quench(Flags),
    /// Quench with a stage triggered at the first minimum of |Delta|.
    Staged(Flags),
    /// Idealized grid scan over (chi N/E_W, delta_s/E_W).
    Scan2d(Flags),
    /// Lax roots and analytic phase labels.
    Lax(Flags),
    /// Exact two-spin trace next to its numerical integration.
    Twospin(Flags),
    /// Metrics and spectrum of a saved trajectory CSV.
    Analyze(Flags),
    /// Print the JSON schema of the config file.
    Schema,
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Zero all dissipation and motion.
    #[arg(long)]
    ideal: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, flags) = match cli.command {
        Command::Quench(f) => (Mode::Quench, f),
        Command::Staged(f) => (Mode::Staged, f),
        Command::Scan2d(f) => (Mode::Scan2d, f),
        Command::Lax(f) => (Mode::Lax, f),
        Command::Twospin(f) => (Mode::Twospin, f),
        Command::Analyze(f) => (Mode::Analyze, f),
        Command::Schema => {
            print!("{}", schema_json());
            return ExitCode::SUCCESS;
        }
    };
    let opts = RunOptions { seed: flags.seed, out_dir: flags.out_dir, threads: flags.threads, ideal: flags.ideal };
    let result = RunConfig::load(&flags.config).and_then(|cfg| run(mode, &cfg, &opts));
    match result {
        Ok(out) => {
            for f in out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

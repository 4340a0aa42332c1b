use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use moreau_cli::{run, sweep, RunOptions};

/// Sweeping-process solvers: scenario files in, trajectories and check
/// reports out.
#[derive(Parser)]
#[command(name = "moreau", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and run its checks.
    Run {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Output directory for trajectory.csv, reports.jsonl, summary.json.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Seed for sampled-direction Hausdorff estimates.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Corrupt one trajectory value before checking (test hook).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Run every scenario in a directory and merge the summaries.
    Sweep {
        /// Directory of scenario JSON files.
        batch_dir: PathBuf,
        /// Output directory; each scenario gets a subdirectory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (scenario-level parallelism only).
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Seed for sampled-direction Hausdorff estimates.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            corrupt,
        } => run(&scenario, &out, &RunOptions { seed, corrupt }),
        Command::Sweep {
            batch_dir,
            out,
            parallel,
            seed,
        } => sweep(&batch_dir, &out, parallel, &RunOptions { seed, corrupt: false }),
    };
    ExitCode::from(code as u8)
}

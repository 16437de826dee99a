use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subdiff::config::load_config;
use subdiff::driver::{self, RunReport};

#[derive(Debug, Parser)]
#[command(name = "subdiff", version, about = "Minimum-energy control of time-fractional diffusion into a target subspace")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON problem configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV and JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for the randomized optimality check.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the minimum-energy control and verify the transfer.
    Synthesize(Common),
    /// Replay a control CSV (or u = 0) and report the distance to the target.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Control CSV with header `t,u`; omit to replay u = 0.
        #[arg(long)]
        control: Option<PathBuf>,
    },
    /// Penalized cross-check over a decreasing list of epsilon values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated epsilon values, e.g. `1e-1,1e-3,1e-5`.
        #[arg(long, default_value = "1e-1,1e-3,1e-5")]
        eps: String,
    },
    /// Strategic-actuator and reachability report only.
    Analyze(Common),
}

fn finish(report: RunReport) -> ExitCode {
    // A closed stdout (e.g. piped into `head`) is not an error; the report
    // is on disk.
    let _ = std::io::stdout().write_all(report.to_json().as_bytes());
    if let Some(d) = &report.error {
        eprintln!("error: {}", d.message);
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, common) = match &cli.command {
        Command::Synthesize(c) => ("synthesize", c),
        Command::Verify { common, .. } => ("verify", common),
        Command::Sweep { common, .. } => ("sweep", common),
        Command::Analyze(c) => ("analyze", c),
    };
    let config = match load_config(&common.config) {
        Ok(c) => c,
        Err(e) => return finish(driver::failure_report(name, &common.out, e)),
    };
    let report = match &cli.command {
        Command::Synthesize(c) => driver::run_synthesis(&config, &c.out, c.seed),
        Command::Verify { common, control } => driver::run_verify(&config, control.as_deref(), &common.out),
        Command::Sweep { common, eps } => match driver::parse_eps_list(eps) {
            Ok(list) => driver::run_epsilon_sweep(&config, &list, &common.out),
            Err(e) => return finish(driver::failure_report(name, &common.out, e)),
        },
        Command::Analyze(c) => driver::run_analyze(&config, &c.out),
    };
    finish(report)
}

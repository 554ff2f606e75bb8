//! Command-line runner for fairness-constrained allocation experiments.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O etc.), 2 invalid config
//! (parse/type), 3 infeasible fairness constraint (k * v > 1).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fairbandit::config::{load_config, ExperimentConfig};
use fairbandit::{harness, Error};

#[derive(Parser)]
#[command(
    name = "fairbandit",
    version,
    about = "Run fairness-constrained bandit allocation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write results to the configured out_dir.
    Run(Common),
    /// Run one experiment per rate in the config's `sweep` list.
    Sweep(Common),
    /// Replay one replication and print its decision trace.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Replication index to replay.
        #[arg(long, default_value_t = 0)]
        rep: u32,
    },
    /// Parse and check a config without running anything.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Path to the experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override a config key with dotted-path syntax, e.g.
    /// --set policy.min_rate=1/3 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Suppress the one-line result summary on stdout.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        load_config(&self.config, &self.set)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Infeasible { .. } => 3,
        _ => 1,
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(common) => {
            let config = common.load()?;
            let result = harness::run_experiment(&config)?;
            if !common.quiet {
                println!(
                    "run: policy={} min_rate={} replications={} mean_total_reward={:.4} -> {}",
                    result.policy.as_str(),
                    result.min_rate,
                    config.replications,
                    result.aggregate.mean_total_reward,
                    config.out_dir.join("summary.csv").display()
                );
            }
        }
        Command::Sweep(common) => {
            let config = common.load()?;
            let results = harness::sweep(&config)?;
            if !common.quiet {
                println!(
                    "sweep: {} rates x {} replications -> {}",
                    results.len(),
                    config.replications,
                    config.out_dir.join("summary.csv").display()
                );
            }
        }
        Command::Trace { common, rep } => {
            let config = common.load()?;
            let output = harness::run_replication(&config, rep)?;
            print_trace(&output)?;
        }
        Command::Validate(common) => {
            let config = common.load()?;
            if !common.quiet {
                println!(
                    "config ok: env={} arms={} policy={} min_rate={} horizon={} replications={}",
                    config.env.name(),
                    config.arm_count(),
                    config.policy.kind.as_str(),
                    config.policy.min_rate,
                    config.horizon,
                    config.replications
                );
            }
        }
    }
    Ok(())
}

/// Streams the decision trace to stdout; a closed pipe (e.g. `| head`) ends
/// the stream quietly instead of failing.
fn print_trace(output: &harness::ReplicationOutput) -> Result<(), Error> {
    use std::io::{self, Write};
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let write = |out: &mut dyn Write| -> io::Result<()> {
        for record in output.trace.records() {
            writeln!(
                out,
                "t{} {} arm{} reward {}",
                record.round, record.reason, record.arm, record.reward
            )?;
        }
        out.flush()
    };
    match write(&mut out) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Error::Io(e)),
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emfield_runner::{load_config, run_tasks, RunOptions};

#[derive(Parser)]
#[command(name = "emfield", version, about = "Retarded electric fields of pulsed current sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the tasks of a run configuration.
    Run {
        config: PathBuf,
        /// Parse and validate the config, print it with defaults filled in, and exit.
        #[arg(long)]
        validate_only: bool,
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
        #[arg(long, value_name = "DIR")]
        output_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let Command::Run {
        config,
        validate_only,
        threads,
        output_dir,
    } = cli.command;

    let config = match load_config(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for w in config.warnings() {
        eprintln!("warning: {w}");
    }
    if validate_only {
        print!("{}", config.to_toml());
        return ExitCode::SUCCESS;
    }

    let outcome = match run_tasks(&config, &RunOptions { threads, output_dir }) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for (t, timing) in outcome.report.tasks.iter().zip(&outcome.timings.tasks) {
        match &t.error {
            None => println!("{:<10} ok     {:8.2}s", timing.task, timing.seconds),
            Some(e) => println!("{:<10} error  {:8.2}s  {e}", timing.task, timing.seconds),
        }
    }
    println!("artifacts in {}", outcome.output_dir.display());
    if outcome.report.has_errors() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

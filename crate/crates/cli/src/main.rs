use std::process::ExitCode;
use std::time::Instant;

use irs_cf_sim::config::{parse_args, CliError, SweepAxis};
use irs_cf_sim::output::write_csv_file;

/// Worker threads are capped through this variable rather than a flag:
/// thread count never changes the numbers, only the wall time, so it
/// is environment, not configuration.
const THREADS_VAR: &str = "IRS_CF_THREADS";

fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(CliError::HelpOrVersion(e)) => {
            print!("{}", e.render());
            return ExitCode::SUCCESS;
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            return ExitCode::from(2);
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };

    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let Ok(n) = raw.parse::<usize>() else {
            eprintln!("error: {THREADS_VAR} must be a positive integer, got `{raw}`");
            return ExitCode::from(2);
        };
        if n < 1 {
            eprintln!("error: {THREADS_VAR} must be a positive integer, got `{raw}`");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }

    let spec = match config.to_sweep_spec() {
        Ok(s) => s,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(other) => {
            eprintln!("error: {other:?}");
            return ExitCode::from(2);
        }
    };

    if config.verbosity >= 1 {
        let points = match &config.axis {
            SweepAxis::OverM { values, .. } => values.len(),
            SweepAxis::OverSnrDb { values, .. } => values.len(),
        };
        eprintln!(
            "sweeping {points} point(s), {} realization(s) each, seed {}",
            config.realizations, config.seed
        );
    }

    let started = Instant::now();
    let table = match irs_cf_core::run_sweep(&spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if config.verbosity >= 1 {
        eprintln!("sweep finished in {:.2?}", started.elapsed());
    }

    if let Err(e) = write_csv_file(&table, &config) {
        eprintln!(
            "error: cannot write {}: {e}",
            config.out_path.display()
        );
        return ExitCode::from(1);
    }
    if config.verbosity >= 1 {
        eprintln!("wrote {}", config.out_path.display());
    }
    ExitCode::SUCCESS
}

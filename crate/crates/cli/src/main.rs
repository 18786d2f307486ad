//! `entperc` command-line front end.
//!
//! Results go to `--out` (or stdout); with `--out`, a manifest recording
//! every parameter, the seed and the program version is written to
//! `<out stem>.manifest.json`, and CSV curve tables to `<out stem>.curves.csv`.
//! Progress messages go to stderr.

mod args;
mod commands;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::Serialize;

use args::{Cli, Format};
use error::CliError;

pub(crate) fn require_trials(trials: usize) -> Result<(), CliError> {
    if trials == 0 {
        Err(CliError::Invalid("--trials must be at least 1".into()))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    seed: u64,
    threads: usize,
    format: Format,
    parameters: &'a args::Command,
    outputs: Vec<PathBuf>,
    /// Seconds since the Unix epoch; the only field that differs between
    /// identical runs.
    timestamp: u64,
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.dump_network.is_some() {
        commands::check_dump(&cli.command)?;
    }
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Invalid("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))?;
    let output = pool.install(|| commands::run(&cli.command, cli.format, cli.seed))?;

    let mut outputs = Vec::new();
    match &cli.out {
        Some(out) => {
            write(out, &output.main)?;
            outputs.push(out.clone());
            if let Some(curves) = &output.curves {
                let path = sibling(out, "curves.csv");
                write(&path, curves)?;
                outputs.push(path);
            }
        }
        None => {
            print!("{}", output.main);
            if let Some(curves) = &output.curves {
                print!("\n{curves}");
            }
        }
    }
    if let (Some(path), Some(net)) = (&cli.dump_network, &output.network) {
        let doc = serde_json::to_string(&net.to_document()).expect("network serializes");
        write(path, &doc)?;
        outputs.push(path.clone());
    }
    if let Some(out) = &cli.out {
        let manifest = Manifest {
            program: "entperc",
            version: env!("CARGO_PKG_VERSION"),
            seed: cli.seed,
            threads,
            format: cli.format,
            parameters: &cli.command,
            outputs,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write(&sibling(out, "manifest.json"), &(json + "\n"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Invalid(_) = e {
                eprintln!("\nFor usage, try 'entperc --help'.");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

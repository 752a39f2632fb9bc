use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ssf_lab::cache::DiskCache;
use ssf_lab::lab::{run_file, selftest, EXIT_CHECK_FAILED, EXIT_ERROR};

#[derive(Parser)]
#[command(
    name = "ssf-lab",
    version,
    about = "Spectral shift function experiments on random lattice operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides of the form `--section.key=value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Inspect or empty the eigenvalue cache ($SSF_LAB_CACHE_DIR or ./.ssf-lab-cache).
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
    /// Run the built-in checks.
    Selftest,
}

#[derive(Subcommand)]
enum CacheAction {
    Stats,
    Clear,
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>, String> {
    raw.iter()
        .map(|arg| {
            let body = arg
                .strip_prefix("--")
                .ok_or_else(|| format!("override {arg:?} must look like --key=value"))?;
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| format!("override {arg:?} must look like --key=value"))?;
            Ok((k.to_string(), v.to_string()))
        })
        .collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides } => {
            let overrides = match parse_overrides(&overrides) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_ERROR);
                }
            };
            match run_file(&config, &overrides) {
                Ok(outcome) => {
                    println!("wrote {}", outcome.output_dir.display());
                    if let Some(c) = &outcome.check {
                        println!("check {}: {}", if c.passed { "passed" } else { "FAILED" }, c.detail);
                    }
                    ExitCode::from(outcome.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_ERROR)
                }
            }
        }
        Command::Cache { action } => {
            let result = DiskCache::open(DiskCache::default_dir()).and_then(|cache| match action {
                CacheAction::Stats => cache.stats().map(|s| {
                    println!("{}: {} files, {} bytes", cache.dir().display(), s.files, s.bytes);
                }),
                CacheAction::Clear => cache.clear().map(|n| {
                    println!("{}: removed {n} files", cache.dir().display());
                }),
            });
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_ERROR)
                }
            }
        }
        Command::Selftest => match selftest(&mut std::io::stdout()) {
            Ok(0) => ExitCode::SUCCESS,
            Ok(_) => ExitCode::from(EXIT_CHECK_FAILED),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_ERROR)
            }
        },
    }
}

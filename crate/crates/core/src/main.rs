use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use redspec::runner::{self, config::default_cache_dir, ExperimentConfig, Overrides, Suite, SuiteStatus};
use redspec::Error;

#[derive(Parser)]
#[command(name = "redspec", version, about = "Symmetry-reduced semiclassical spectral asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of an experiment.
    Run {
        /// TOML experiment file.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Built-in experiment (see list-presets).
        #[arg(long)]
        preset: Option<String>,
        /// Suite to run; repeat for several. Overrides the configuration.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// List the built-in experiments.
    ListPresets,
    /// Print a built-in experiment as TOML.
    ShowPreset { name: String },
    /// Summarize the spectrum cache.
    CacheInfo {
        #[arg(long, default_value_os_t = default_cache_dir())]
        cache_dir: PathBuf,
    },
    /// Delete the spectrum cache records.
    Clean {
        #[arg(long, default_value_os_t = default_cache_dir())]
        cache_dir: PathBuf,
    },
}

fn load(config: Option<PathBuf>, preset: Option<String>) -> redspec::Result<ExperimentConfig> {
    match (config, preset) {
        (Some(path), _) => ExperimentConfig::from_toml(&std::fs::read_to_string(&path)?),
        (None, Some(name)) => runner::preset(&name).ok_or_else(|| Error::Config {
            field: "preset".into(),
            message: format!("unknown preset `{name}`"),
        }),
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    }
}

fn execute(cli: Cli) -> redspec::Result<i32> {
    match cli.command {
        Command::Run {
            config,
            preset,
            suites,
            jobs,
            out,
            seed,
            cache_dir,
        } => {
            let suites = if suites.is_empty() {
                None
            } else {
                Some(suites.iter().map(|s| s.parse::<Suite>()).collect::<redspec::Result<Vec<_>>>()?)
            };
            let overrides = Overrides {
                suites,
                jobs,
                output_dir: out,
                cache_dir,
                seed,
            };
            let config = overrides.apply(load(config, preset)?)?;
            let manifest = runner::run(&config)?;
            for s in &manifest.suites {
                let status = match s.status {
                    SuiteStatus::Pass => "pass",
                    SuiteStatus::Fail => "FAIL",
                    SuiteStatus::Error => "ERROR",
                };
                let detail = s.error.as_deref().unwrap_or("");
                println!("{:<11} {:<5} {:>8.2}s {detail}", s.suite.name(), status, s.seconds);
            }
            println!(
                "cache: {} hits, {} misses; reports in {}",
                manifest.cache.hits,
                manifest.cache.misses,
                config.output_dir.display()
            );
            Ok(manifest.exit_code())
        }
        Command::ListPresets => {
            for p in runner::presets() {
                println!("{:<20} {}", p.name, p.description);
            }
            Ok(runner::EXIT_PASS)
        }
        Command::ShowPreset { name } => {
            print!("{}", load(None, Some(name))?.to_toml());
            Ok(runner::EXIT_PASS)
        }
        Command::CacheInfo { cache_dir } => {
            let info = runner::cache_info(&cache_dir)?;
            println!("{}: {} records, {} bytes", info.dir.display(), info.entries, info.bytes);
            Ok(runner::EXIT_PASS)
        }
        Command::Clean { cache_dir } => {
            let removed = runner::clean(&cache_dir)?;
            println!("removed {removed} records from {}", cache_dir.display());
            Ok(runner::EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let code = match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            runner::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}

//! `saferl` command-line interface.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 on runtime
//! failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use saferl_core::envs::EnvConfig;
use saferl_harness::config::{env_overrides, load_config_with_overrides};
use saferl_harness::{emit_report, evaluate, suites, train};

#[derive(Parser)]
#[command(name = "saferl", about = "Constrained policy optimization laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one algorithm on one environment.
    Train {
        /// Config document (TOML key-value file).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Total environment steps.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        algo: Option<String>,
        #[arg(long)]
        env: Option<String>,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint with the deterministic (mean-action) policy.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a named suite (smoke, velocity, navigation) across seeds.
    Benchmark {
        #[arg(long)]
        suite: String,
        /// Comma-separated seeds, e.g. `1,2,3`.
        #[arg(long, default_value = "1,2,3", value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Override the suite's training length.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Aggregate finished runs into normalized report tables.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

enum CliError {
    Config(String),
    Runtime(String),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { config, seed, steps, algo, env, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
            let mut overrides = env_overrides();
            if let Some(seed) = seed {
                overrides.push(("seed".into(), seed.to_string()));
            }
            if let Some(steps) = steps {
                overrides.push(("total_steps".into(), steps.to_string()));
            }
            if let Some(algo) = algo {
                overrides.push(("algo".into(), algo));
            }
            if let Some(env) = env {
                overrides.push(("env".into(), env));
            }
            if let Some(out) = out {
                overrides.push(("out_dir".into(), out.display().to_string()));
            }
            let cfg = load_config_with_overrides(&text, &overrides)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let outcome = train(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!(
                "trained {} on {} for {} iterations -> {}",
                cfg.algo,
                cfg.env,
                outcome.records.len(),
                outcome.out_dir.display()
            );
            if let Some(last) = outcome.records.last() {
                println!(
                    "final: ep_reward {:.3} ep_cost {:.3} (limit {})",
                    last.ep_reward, last.ep_cost, cfg.cost_limit
                );
            }
            Ok(())
        }
        Command::Eval { checkpoint, env, episodes, seed } => {
            let (jr, jc) = evaluate(&checkpoint, &env, episodes, seed, &EnvConfig::default())
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("episodes: {episodes}  J^R: {jr:.4}  J^C: {jc:.4}");
            Ok(())
        }
        Command::Benchmark { suite, seeds, out, steps } => {
            suites::run_suite(&suite, &seeds, &out, steps).map_err(|e| match e {
                suites::SuiteError::Unknown(_) => CliError::Config(e.to_string()),
                suites::SuiteError::Train(err) => CliError::Runtime(err.to_string()),
            })?;
            println!("suite `{suite}` finished; runs under {}", out.display());
            Ok(())
        }
        Command::Report { runs, out } => {
            emit_report(&runs, &out).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("report written to {}", out.display());
            Ok(())
        }
    }
}

//! Named benchmark suites: fixed groups of (algorithm, environment) pairs
//! run across seeds at desk scale, feeding the report generator.

use std::path::Path;

use thiserror::Error;

use crate::config::{AlgoId, RunConfig};
use crate::trainer::{train, TrainError};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`; available: smoke, velocity, navigation")]
    Unknown(String),
    #[error(transparent)]
    Train(#[from] TrainError),
}

/// Desk-scale overrides shared by the suite runs.
fn desk_scale(mut cfg: RunConfig, env: &str, seed: u64, total_steps: u64) -> RunConfig {
    cfg.env = env.to_string();
    cfg.seed = seed;
    cfg.total_steps = total_steps;
    cfg.batch_size = 2000;
    cfg.hidden = vec![32, 32];
    cfg.checkpoint_every = 0; // final checkpoint only
    cfg
}

/// The (algorithm, environment) grid of a named suite.
pub fn suite_grid(name: &str) -> Result<Vec<(AlgoId, &'static str)>, SuiteError> {
    match name {
        // liveness: every registered algorithm on its default environment
        "smoke" => Ok(AlgoId::ALL
            .iter()
            .map(|&algo| {
                let env = if algo.is_multi_agent() { "CoopMassVel" } else { "PointGoal1" };
                (algo, env)
            })
            .collect()),
        // reward/cost trade-off on the locomotion surrogate
        "velocity" => Ok(vec![
            (AlgoId::Ppo, "MassVel"),
            (AlgoId::PpoLag, "MassVel"),
            (AlgoId::CppoPid, "MassVel"),
        ]),
        // constraint satisfaction on the navigation tasks
        "navigation" => Ok(vec![
            (AlgoId::Ppo, "PointGoal1"),
            (AlgoId::PpoLag, "PointGoal1"),
            (AlgoId::TrpoLag, "PointGoal1"),
            (AlgoId::Cpo, "PointGoal1"),
            (AlgoId::CppoPid, "PointGoal1"),
            (AlgoId::Ppo, "PointCircle1"),
            (AlgoId::PpoLag, "PointCircle1"),
            (AlgoId::TrpoLag, "PointCircle1"),
            (AlgoId::Cpo, "PointCircle1"),
            (AlgoId::CppoPid, "PointCircle1"),
        ]),
        other => Err(SuiteError::Unknown(other.to_string())),
    }
}

/// Default training length per suite (overridable from the CLI).
pub fn suite_default_steps(name: &str) -> u64 {
    match name {
        "smoke" => 3 * 2000,
        "velocity" => 300_000,
        _ => 500_000,
    }
}

/// Run a whole suite sequentially; runs land under `out_dir` in per-run
/// subdirectories ready for `report`.
pub fn run_suite(
    name: &str,
    seeds: &[u64],
    out_dir: &Path,
    total_steps: Option<u64>,
) -> Result<(), SuiteError> {
    let grid = suite_grid(name)?;
    let steps = total_steps.unwrap_or_else(|| suite_default_steps(name));
    for (algo, env) in grid {
        for &seed in seeds {
            let mut cfg = desk_scale(RunConfig::for_algo(algo), env, seed, steps);
            if name == "smoke" {
                cfg.batch_size = 300;
                cfg.total_steps = 3 * cfg.batch_size as u64;
                cfg.hidden = vec![16, 16];
                cfg.max_episode_steps = Some(150);
            }
            cfg.out_dir = out_dir.join(format!("{algo}_{env}_s{seed}"));
            println!("[suite {name}] {algo} on {env} seed {seed} ({} steps)", cfg.total_steps);
            train(&cfg)?;
        }
    }
    Ok(())
}

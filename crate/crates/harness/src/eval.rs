//! Deterministic policy evaluation: run the mean action (no sampling) for a
//! fixed number of episodes and report undiscounted episodic means.

use std::path::Path;

use thiserror::Error;

use saferl_core::cmdp::{derive_episode_seed, EnvError};
use saferl_core::envs::{make_cmg_env, make_env, registered_cmg_ids, EnvConfig};
use saferl_core::nn::{load_checkpoint, CheckpointError};

use crate::joint_ckpt::load_joint_checkpoint;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] CheckpointError),
    #[error("environment error: {0}")]
    Env(#[from] EnvError),
    #[error("checkpoint expects observation dim {ckpt}, environment provides {env}")]
    DimensionMismatch { ckpt: usize, env: usize },
    #[error("evaluation needs at least one episode")]
    NoEpisodes,
}

/// Mean episodic reward and cost (`J^R`, `J^C`) of the checkpointed policy
/// on the named environment, over `n_episodes` deterministic episodes.
pub fn evaluate(
    checkpoint: &Path,
    env_id: &str,
    n_episodes: usize,
    seed: u64,
    env_cfg: &EnvConfig,
) -> Result<(f64, f64), EvalError> {
    if n_episodes == 0 {
        return Err(EvalError::NoEpisodes);
    }
    if registered_cmg_ids().iter().any(|id| id == env_id) {
        return evaluate_multi(checkpoint, env_id, n_episodes, seed, env_cfg);
    }
    let ckpt = load_checkpoint::<f64>(checkpoint)?;
    let mut env = make_env::<f64>(env_id, env_cfg)?;
    let env_dim = env.observation_space().dim();
    if ckpt.params.obs_dim() != env_dim {
        return Err(EvalError::DimensionMismatch { ckpt: ckpt.params.obs_dim(), env: env_dim });
    }

    let mut total_reward = 0.0;
    let mut total_cost = 0.0;
    for episode in 0..n_episodes {
        let mut obs = env.reset(derive_episode_seed(seed, episode as u64));
        loop {
            let action = ckpt.params.actor.mean(&obs).expect("dim checked");
            let step = env.step(&action)?;
            total_reward += step.reward;
            total_cost += step.cost;
            if step.terminated || step.truncated {
                break;
            }
            obs = step.observation;
        }
    }
    Ok((total_reward / n_episodes as f64, total_cost / n_episodes as f64))
}

fn evaluate_multi(
    checkpoint: &Path,
    env_id: &str,
    n_episodes: usize,
    seed: u64,
    env_cfg: &EnvConfig,
) -> Result<(f64, f64), EvalError> {
    let policy = load_joint_checkpoint(checkpoint)?;
    let mut env = make_cmg_env::<f64>(env_id, env_cfg)?;
    let n = env.n_agents();
    if policy.actors.len() != n {
        return Err(EvalError::DimensionMismatch { ckpt: policy.actors.len(), env: n });
    }
    let env_dim = env.observation_space(0).dim();
    if policy.actors[0].spec.input_dim() != env_dim {
        return Err(EvalError::DimensionMismatch {
            ckpt: policy.actors[0].spec.input_dim(),
            env: env_dim,
        });
    }

    let mut total_reward = 0.0;
    let mut total_cost = 0.0;
    for episode in 0..n_episodes {
        let mut obs = env.reset(derive_episode_seed(seed, episode as u64));
        loop {
            let actions: Vec<Vec<f64>> = (0..n)
                .map(|i| policy.actors[i].mean(&obs[i]).expect("dim checked"))
                .collect();
            let step = env.step(&actions)?;
            total_reward += step.reward;
            // mean per-agent cost
            total_cost += step.costs.iter().sum::<f64>() / n as f64;
            if step.terminated || step.truncated {
                break;
            }
            obs = step.observations;
        }
    }
    Ok((total_reward / n_episodes as f64, total_cost / n_episodes as f64))
}

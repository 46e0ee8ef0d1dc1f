//! The training loop: rollout, estimation, one algorithm update, metrics
//! and checkpoints, fully deterministic in (config, seed).

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use saferl_core::algos::{
    cpo_update, cppo_pid_update, cup_update, focops_update, npg_or_trpo_update, pcpo_update,
    pg_update, ppo_lag_update, ppo_update, prepare_batch, rcpo_update, trpo_lag_update,
    CupConfig, FocopsConfig, MultiplierState, NuState, Optimizers, PidState, PpoConfig,
    TrustRegionConfig, UpdateReport,
};
use saferl_core::cmdp::{derive_episode_seed, joint_rollout, rollout, CmdpEnv, CmgEnv, EnvError};
use saferl_core::envs::{make_cmg_env, make_env, CostMode, EnvConfig};
use saferl_core::estimation::{EstimationError, GaeConfig};
use saferl_core::multi::{
    happo_update, macpo_update, mappo_lag_update, mappo_update, prepare_joint_batch,
    JointOptimizers, JointPolicy,
};
use saferl_core::nn::{
    save_checkpoint, Activation, Checkpoint, CheckpointError, PolicyParams, TrainerExtras,
};

use crate::config::{AlgoId, LambdaOptimizer, RunConfig};
use crate::joint_ckpt::save_joint_checkpoint;
use crate::metrics::{MetricsRecord, MetricsSink};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("environment error: {0}")]
    Env(#[from] EnvError),
    #[error("estimation error: {0}")]
    Estimation(#[from] EstimationError),
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] CheckpointError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("update aborted with non-finite loss at iteration {0}; partial artifacts kept")]
    UpdateAborted(u64),
}

pub struct TrainOutcome {
    pub records: Vec<MetricsRecord>,
    pub out_dir: PathBuf,
    pub final_checkpoint: PathBuf,
}

pub const FINAL_CHECKPOINT: &str = "final.bin";
pub const META_FILE: &str = "meta.json";

fn env_config(cfg: &RunConfig) -> EnvConfig {
    EnvConfig {
        cost_mode: if cfg.binary_cost { CostMode::Binary } else { CostMode::Continuous },
        max_episode_steps: cfg.max_episode_steps,
    }
}

fn activation(cfg: &RunConfig) -> Activation {
    if cfg.tanh_activation {
        Activation::Tanh
    } else {
        Activation::Relu
    }
}

fn rollout_seed(cfg: &RunConfig, iteration: u64) -> u64 {
    derive_episode_seed(cfg.seed ^ 0x01D_5EED, iteration)
}

/// Run one full training job, writing metrics, timings, checkpoints and a
/// `meta.json` describing the run into `cfg.out_dir`.
pub fn train(cfg: &RunConfig) -> Result<TrainOutcome, TrainError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(
        cfg.out_dir.join(META_FILE),
        serde_json::to_string_pretty(cfg).expect("config serializes"),
    )?;
    if cfg.algo.is_multi_agent() {
        train_multi(cfg)
    } else {
        train_single(cfg)
    }
}

struct MultiplierBundle {
    lagrange: Option<MultiplierState<f64>>,
    pid: Option<PidState<f64>>,
    nu: Option<NuState<f64>>,
}

impl MultiplierBundle {
    fn for_algo(cfg: &RunConfig) -> Self {
        let lagrange = match cfg.algo {
            AlgoId::PpoLag | AlgoId::TrpoLag | AlgoId::Rcpo | AlgoId::MappoLag => {
                Some(match cfg.lambda_optimizer {
                    LambdaOptimizer::Sgd => {
                        MultiplierState::sgd(cfg.lambda_init, cfg.lambda_lr, cfg.cost_limit)
                    }
                    LambdaOptimizer::Adam => {
                        MultiplierState::adam(cfg.lambda_init, cfg.lambda_lr, cfg.cost_limit)
                    }
                })
            }
            _ => None,
        };
        let pid = matches!(cfg.algo, AlgoId::CppoPid)
            .then(|| PidState::new(cfg.pid_kp, cfg.pid_ki, cfg.pid_kd));
        let nu = matches!(cfg.algo, AlgoId::Focops | AlgoId::Cup)
            .then(|| NuState::new(cfg.nu_lr, cfg.nu_max));
        MultiplierBundle { lagrange, pid, nu }
    }

    fn extras(&self) -> TrainerExtras {
        TrainerExtras {
            lambda: self.lagrange.as_ref().map_or(0.0, |m| m.lambda),
            nu: self.nu.as_ref().map_or(0.0, |n| n.nu),
            pid_integral: self.pid.as_ref().map_or(0.0, |p| p.integral),
            pid_prev_error: self.pid.as_ref().map_or(0.0, |p| p.prev_error),
        }
    }
}

fn ppo_cfg(cfg: &RunConfig) -> PpoConfig<f64> {
    PpoConfig {
        clip: Some(cfg.clip),
        epochs: cfg.epochs,
        target_kl: cfg.target_kl,
        critic_epochs: cfg.critic_epochs,
        minibatch: cfg.minibatch,
    }
}

fn tr_cfg(cfg: &RunConfig) -> TrustRegionConfig<f64> {
    TrustRegionConfig {
        target_kl: cfg.target_kl,
        cg_iters: cfg.cg_iters,
        cg_tol: cfg.cg_tol,
        damping: cfg.cg_damping,
        backtrack_steps: cfg.search_steps,
        step_fraction: cfg.step_fraction,
        critic_epochs: cfg.critic_epochs,
        minibatch: cfg.minibatch,
    }
}

/// Per-iteration stream for minibatch shuffles (and agent ordering).
fn update_rng(cfg: &RunConfig, iteration: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_episode_seed(cfg.seed ^ 0x0A6E_47, iteration))
}

fn record_from_report(
    iteration: u64,
    env_steps: u64,
    ep_reward: f64,
    ep_cost: f64,
    report: &UpdateReport<f64>,
) -> MetricsRecord {
    MetricsRecord {
        iteration,
        env_steps,
        ep_reward,
        ep_cost,
        policy_loss: report.policy_loss,
        value_loss_r: report.value_loss_r,
        value_loss_c: report.value_loss_c,
        mean_kl: report.mean_kl,
        entropy: report.entropy,
        epochs_used: report.epochs_used as u64,
        step_accepted: report.step_accepted,
        lambda: report.lambda,
        pid_p: report.pid_terms.map(|t| t[0]),
        pid_i: report.pid_terms.map(|t| t[1]),
        pid_d: report.pid_terms.map(|t| t[2]),
        nu: report.nu,
        cpo_q: report.cpo.map(|c| c.q),
        cpo_r: report.cpo.map(|c| c.r),
        cpo_nu_star: report.cpo.map(|c| c.nu_star),
        cpo_lambda_star: report.cpo.map(|c| c.lambda_star),
    }
}

fn train_single(cfg: &RunConfig) -> Result<TrainOutcome, TrainError> {
    let mut env: Box<dyn CmdpEnv<f64> + Send> = make_env(&cfg.env, &env_config(cfg))?;
    let obs_dim = env.observation_space().dim();
    let act_dim = env.action_space().dim();
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params =
        PolicyParams::<f64>::new(obs_dim, act_dim, &cfg.hidden, activation(cfg), &mut init_rng);
    let mut opt = Optimizers::new(&params, cfg.actor_lr, cfg.critic_lr);
    let mut multipliers = MultiplierBundle::for_algo(cfg);

    let mut sink = MetricsSink::create(&cfg.out_dir)?;
    let gae_r = GaeConfig { gamma: cfg.gamma, lam: cfg.gae_lambda };
    let gae_c = GaeConfig { gamma: cfg.gamma, lam: cfg.cost_gae_lambda };
    let iterations = cfg.total_steps / cfg.batch_size as u64;

    let mut aborted_at = None;
    for iteration in 0..iterations {
        let start = Instant::now();
        let traj = rollout(env.as_mut(), &params, cfg.batch_size, rollout_seed(cfg, iteration));
        let batch = prepare_batch(&traj, gae_r, gae_c)?;
        let mut rng = update_rng(cfg, iteration);

        let report = match cfg.algo {
            AlgoId::Pg => pg_update(&mut params, &mut opt, &batch, &ppo_cfg(cfg), &mut rng),
            AlgoId::Ppo => ppo_update(&mut params, &mut opt, &batch, &ppo_cfg(cfg), &mut rng),
            AlgoId::PpoLag => ppo_lag_update(
                &mut params,
                &mut opt,
                multipliers.lagrange.as_mut().expect("ppo_lag multiplier"),
                &batch,
                &ppo_cfg(cfg),
                &mut rng,
            ),
            AlgoId::CppoPid => cppo_pid_update(
                &mut params,
                &mut opt,
                multipliers.pid.as_mut().expect("pid state"),
                &batch,
                &ppo_cfg(cfg),
                cfg.cost_limit,
                &mut rng,
            ),
            AlgoId::Focops => focops_update(
                &mut params,
                &mut opt,
                &batch,
                &FocopsConfig {
                    lam_temp: cfg.focops_lam,
                    epochs: cfg.epochs,
                    target_kl: cfg.target_kl,
                    critic_epochs: cfg.critic_epochs,
                    minibatch: cfg.minibatch,
                },
                cfg.cost_limit,
                multipliers.nu.as_mut().expect("focops nu"),
                &mut rng,
            ),
            AlgoId::Cup => cup_update(
                &mut params,
                &mut opt,
                &batch,
                &CupConfig {
                    clip: cfg.clip,
                    epochs: cfg.epochs,
                    target_kl: cfg.target_kl,
                    critic_epochs: cfg.critic_epochs,
                    minibatch: cfg.minibatch,
                },
                cfg.cost_limit,
                multipliers.nu.as_mut().expect("cup nu"),
                &mut rng,
            ),
            AlgoId::Npg => {
                npg_or_trpo_update(&mut params, &mut opt, &batch, &tr_cfg(cfg), false, &mut rng)
            }
            AlgoId::Trpo => {
                npg_or_trpo_update(&mut params, &mut opt, &batch, &tr_cfg(cfg), true, &mut rng)
            }
            AlgoId::TrpoLag => trpo_lag_update(
                &mut params,
                &mut opt,
                multipliers.lagrange.as_mut().expect("trpo_lag multiplier"),
                &batch,
                &tr_cfg(cfg),
                &mut rng,
            ),
            AlgoId::Rcpo => rcpo_update(
                &mut params,
                &mut opt,
                multipliers.lagrange.as_mut().expect("rcpo multiplier"),
                &batch,
                &tr_cfg(cfg),
                &mut rng,
            ),
            AlgoId::Cpo => {
                cpo_update(&mut params, &mut opt, &batch, &tr_cfg(cfg), cfg.cost_limit, &mut rng)
            }
            AlgoId::Pcpo => {
                pcpo_update(&mut params, &mut opt, &batch, &tr_cfg(cfg), cfg.cost_limit, &mut rng)
            }
            multi => unreachable!("{multi} is multi-agent"),
        };

        let env_steps = (iteration + 1) * cfg.batch_size as u64;
        let sps = cfg.batch_size as f64 / start.elapsed().as_secs_f64().max(1e-9);
        let record =
            record_from_report(iteration, env_steps, batch.ep_reward, batch.ep_cost, &report);
        let aborted = report.aborted;
        sink.append(record, sps)?;

        if cfg.checkpoint_every > 0 && (iteration + 1) % cfg.checkpoint_every == 0 {
            let path = cfg.out_dir.join(format!("ckpt_{:06}.bin", iteration + 1));
            save_single_checkpoint(&path, &params, &opt, &multipliers)?;
        }
        if aborted {
            aborted_at = Some(iteration);
            break;
        }
    }

    let final_checkpoint = cfg.out_dir.join(FINAL_CHECKPOINT);
    save_single_checkpoint(&final_checkpoint, &params, &opt, &multipliers)?;
    if let Some(iteration) = aborted_at {
        return Err(TrainError::UpdateAborted(iteration));
    }
    Ok(TrainOutcome { records: sink.records, out_dir: cfg.out_dir.clone(), final_checkpoint })
}

fn save_single_checkpoint(
    path: &PathBuf,
    params: &PolicyParams<f64>,
    opt: &Optimizers<f64>,
    multipliers: &MultiplierBundle,
) -> Result<(), CheckpointError> {
    let ckpt = Checkpoint {
        params: params.clone(),
        adam: Some([opt.actor.clone(), opt.critic_r.clone(), opt.critic_c.clone()]),
        extras: Some(multipliers.extras()),
    };
    save_checkpoint(path, &ckpt)
}

fn train_multi(cfg: &RunConfig) -> Result<TrainOutcome, TrainError> {
    let mut env: Box<dyn CmgEnv<f64> + Send> = make_cmg_env(&cfg.env, &env_config(cfg))?;
    let n = env.n_agents();
    let obs_dims: Vec<usize> = (0..n).map(|i| env.observation_space(i).dim()).collect();
    let act_dims: Vec<usize> = (0..n).map(|i| env.action_space(i).dim()).collect();
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut policy =
        JointPolicy::<f64>::new(&obs_dims, &act_dims, &cfg.hidden, activation(cfg), &mut init_rng);
    let mut opt = JointOptimizers::new(&policy, cfg.actor_lr, cfg.critic_lr);
    let mut multipliers = MultiplierBundle::for_algo(cfg);

    let mut sink = MetricsSink::create(&cfg.out_dir)?;
    let gae_r = GaeConfig { gamma: cfg.gamma, lam: cfg.gae_lambda };
    let gae_c = GaeConfig { gamma: cfg.gamma, lam: cfg.cost_gae_lambda };
    let iterations = cfg.total_steps / cfg.batch_size as u64;

    let mut aborted_at = None;
    for iteration in 0..iterations {
        let start = Instant::now();
        let traj =
            joint_rollout(env.as_mut(), &policy, cfg.batch_size, rollout_seed(cfg, iteration));
        let batch = prepare_joint_batch(&traj, gae_r, gae_c)?;
        let mut rng = update_rng(cfg, iteration);

        let report = match cfg.algo {
            AlgoId::Mappo => mappo_update(&mut policy, &mut opt, &batch, &ppo_cfg(cfg), &mut rng),
            AlgoId::MappoLag => mappo_lag_update(
                &mut policy,
                &mut opt,
                multipliers.lagrange.as_mut().expect("mappo_lag multiplier"),
                &batch,
                &ppo_cfg(cfg),
                &mut rng,
            ),
            AlgoId::Happo => {
                happo_update(&mut policy, &mut opt, &batch, &ppo_cfg(cfg), &mut rng)
            }
            AlgoId::Macpo => macpo_update(
                &mut policy,
                &mut opt,
                &batch,
                &tr_cfg(cfg),
                cfg.cost_limit,
                &mut rng,
            ),
            single => unreachable!("{single} is single-agent"),
        };

        let ep_cost = batch.ep_cost.iter().sum::<f64>() / batch.ep_cost.len() as f64;
        // mean undiscounted episodic reward over completed episodes
        let ep_reward = {
            let per: Vec<f64> =
                traj.episode_ranges().map(|r| traj.rewards[r].iter().sum()).collect();
            let complete: Vec<f64> = per
                .iter()
                .zip(&traj.episode_kinds)
                .filter(|(_, k)| k.is_complete())
                .map(|(&v, _)| v)
                .collect();
            let pool = if complete.is_empty() { &per } else { &complete };
            pool.iter().sum::<f64>() / pool.len().max(1) as f64
        };

        let env_steps = (iteration + 1) * cfg.batch_size as u64;
        let sps = cfg.batch_size as f64 / start.elapsed().as_secs_f64().max(1e-9);
        let record = record_from_report(iteration, env_steps, ep_reward, ep_cost, &report);
        let aborted = report.aborted;
        sink.append(record, sps)?;

        if cfg.checkpoint_every > 0 && (iteration + 1) % cfg.checkpoint_every == 0 {
            let path = cfg.out_dir.join(format!("ckpt_{:06}.bin", iteration + 1));
            save_joint_checkpoint(&path, &policy)?;
        }
        if aborted {
            aborted_at = Some(iteration);
            break;
        }
    }

    let final_checkpoint = cfg.out_dir.join(FINAL_CHECKPOINT);
    save_joint_checkpoint(&final_checkpoint, &policy)?;
    if let Some(iteration) = aborted_at {
        return Err(TrainError::UpdateAborted(iteration));
    }
    Ok(TrainOutcome { records: sink.records, out_dir: cfg.out_dir.clone(), final_checkpoint })
}

//! Named environment registry. Ids follow `<Robot><Task><Level>` for the
//! navigation suite (`PointGoal1`, `CarButton2`, ...) and `<Robot>Vel` /
//! `MassRun` for the locomotion surrogates.

use super::costs::CostConfig;
use super::coop::CoopMassPointEnv;
use super::mass::{MassPointEnv, MassTask};
use super::nav::{NavEnv, RobotKind, TaskKind};
use crate::cmdp::{CmdpEnv, CmgEnv, EnvError};
use crate::scalar::Real;

/// Cost semantics for constraint-object contacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostMode {
    /// Indicator costs in {0, 1} per step.
    #[default]
    Binary,
    /// Scaled continuous costs, including vase-displacement speed.
    Continuous,
}

/// Construction options shared by every registered environment.
#[derive(Debug, Clone, Default)]
pub struct EnvConfig {
    pub cost_mode: CostMode,
    /// Override the per-episode step limit (tests, smoke runs).
    pub max_episode_steps: Option<usize>,
}

fn cost_cfg<S: Real>(mode: CostMode) -> CostConfig<S> {
    match mode {
        CostMode::Binary => CostConfig::default(),
        CostMode::Continuous => CostConfig::continuous(),
    }
}

const NAV_ROBOTS: [(&str, RobotKind); 2] =
    [("Point", RobotKind::Point), ("Car", RobotKind::Car)];
const NAV_TASKS: [(&str, TaskKind, u8); 4] = [
    ("Goal", TaskKind::Goal, 2),
    ("Push", TaskKind::Push, 2),
    ("Button", TaskKind::Button, 2),
    ("Circle", TaskKind::Circle, 1),
];

/// All single-agent environment ids.
pub fn registered_env_ids() -> Vec<String> {
    let mut ids = Vec::new();
    for (robot, _) in NAV_ROBOTS {
        for (task, _, max_level) in NAV_TASKS {
            for level in 0..=max_level {
                ids.push(format!("{robot}{task}{level}"));
            }
        }
    }
    ids.push("MassVel".to_string());
    ids.push("MassLineVel".to_string());
    ids.push("MassRun".to_string());
    ids
}

/// Ids whose costs are step indicators when built in binary mode. The mass
/// surrogates always emit the continuous speed-magnitude cost.
pub fn binary_cost_env_ids() -> Vec<String> {
    registered_env_ids().into_iter().filter(|id| !id.starts_with("Mass")).collect()
}

/// All multi-agent environment ids.
pub fn registered_cmg_ids() -> Vec<String> {
    vec!["CoopMassVel".to_string()]
}

/// Build a single-agent environment by id.
pub fn make_env<S: Real>(
    id: &str,
    cfg: &EnvConfig,
) -> Result<Box<dyn CmdpEnv<S> + Send>, EnvError> {
    let limit = cfg.max_episode_steps;
    let wrap_mass = |env: MassPointEnv<S>| -> Box<dyn CmdpEnv<S> + Send> {
        match limit {
            Some(l) => Box::new(env.with_max_steps(l)),
            None => Box::new(env),
        }
    };
    match id {
        "MassVel" => return Ok(wrap_mass(MassPointEnv::new(MassTask::Velocity, 2))),
        "MassLineVel" => return Ok(wrap_mass(MassPointEnv::new(MassTask::Velocity, 1))),
        "MassRun" => return Ok(wrap_mass(MassPointEnv::new(MassTask::Run, 2))),
        _ => {}
    }

    for (robot_name, robot) in NAV_ROBOTS {
        for (task_name, task, max_level) in NAV_TASKS {
            for level in 0..=max_level {
                if id == format!("{robot_name}{task_name}{level}") {
                    let env = NavEnv::new(robot, task, level, cost_cfg::<S>(cfg.cost_mode));
                    return Ok(match limit {
                        Some(l) => Box::new(env.with_max_steps(l)),
                        None => Box::new(env),
                    });
                }
            }
        }
    }
    Err(EnvError::UnknownId(id.to_string()))
}

/// Build a multi-agent environment by id.
pub fn make_cmg_env<S: Real>(
    id: &str,
    cfg: &EnvConfig,
) -> Result<Box<dyn CmgEnv<S> + Send>, EnvError> {
    match id {
        "CoopMassVel" => {
            let env = CoopMassPointEnv::new();
            Ok(match cfg.max_episode_steps {
                Some(l) => Box::new(env.with_max_steps(l)),
                None => Box::new(env),
            })
        }
        _ => Err(EnvError::UnknownId(id.to_string())),
    }
}

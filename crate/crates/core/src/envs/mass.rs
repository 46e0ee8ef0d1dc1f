//! Locomotion surrogates: a force-controlled mass point with drag replaces
//! the joint-level velocity/run robots. Reward is forward (x) displacement
//! per step plus a small per-step alive bonus; the cost is the printed
//! speed-magnitude formula, which is inherently continuous, so these
//! environments ignore the binary cost mode.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::costs::velocity_cost;
use super::dynamics::{mass_point_dynamics, DynamicsParams, MassPointState};
use crate::cmdp::{prepare_action, BoxSpace, CmdpEnv, EnvError, EpisodeClock, StepResult};
use crate::scalar::Real;
use rand::SeedableRng;

pub const MASS_DT: f64 = 0.02;
pub const MASS_MAX_STEPS: usize = 1000;
/// Per-step bonus keeping slow constrained policies on a nonzero reward
/// floor, mirroring the survival bonus of the locomotion robots.
pub const ALIVE_BONUS: f64 = 0.01;
/// Initial speed of the Run task.
pub const RUN_INIT_SPEED: f64 = 0.5;
/// Reaching `x >= RUN_GOAL_X` ends a Run episode with a bonus.
pub const RUN_GOAL_X: f64 = 2.0;
pub const RUN_BONUS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassTask {
    /// Move right as fast as the speed budget allows; never terminates.
    Velocity,
    /// Start with a random heading at a fixed speed, reach the far side.
    Run,
}

/// Mass-point surrogate environment (1D or 2D).
///
/// Observations: `Velocity` sees `[velocity]`, `Run` sees
/// `[position / RUN_GOAL_X, velocity]`.
pub struct MassPointEnv<S: Real> {
    task: MassTask,
    dim: usize,
    dynamics: DynamicsParams<S>,
    obs_space: BoxSpace<S>,
    act_space: BoxSpace<S>,
    max_steps: usize,
    state: MassPointState<S>,
    clock: EpisodeClock,
    rng: ChaCha8Rng,
}

impl<S: Real> MassPointEnv<S> {
    pub fn new(task: MassTask, dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "mass point supports 1D and 2D");
        let obs_dim = match task {
            MassTask::Velocity => dim,
            MassTask::Run => 2 * dim,
        };
        Self {
            task,
            dim,
            dynamics: DynamicsParams::default(),
            obs_space: BoxSpace::unbounded(obs_dim),
            act_space: BoxSpace::symmetric_unit(dim),
            max_steps: MASS_MAX_STEPS,
            state: MassPointState::at_rest(dim),
            clock: EpisodeClock::new(MASS_MAX_STEPS),
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn with_max_steps(mut self, limit: usize) -> Self {
        self.max_steps = limit;
        self.clock = EpisodeClock::new(limit);
        self
    }

    fn observation(&self) -> Vec<S> {
        match self.task {
            MassTask::Velocity => self.state.velocity.clone(),
            MassTask::Run => {
                let mut obs: Vec<S> =
                    self.state.position.iter().map(|&p| p / S::c(RUN_GOAL_X)).collect();
                obs.extend_from_slice(&self.state.velocity);
                obs
            }
        }
    }
}

impl<S: Real> CmdpEnv<S> for MassPointEnv<S> {
    fn observation_space(&self) -> &BoxSpace<S> {
        &self.obs_space
    }

    fn action_space(&self) -> &BoxSpace<S> {
        &self.act_space
    }

    fn max_episode_steps(&self) -> usize {
        self.max_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<S> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = MassPointState::at_rest(self.dim);
        if self.task == MassTask::Run {
            let speed = S::c(RUN_INIT_SPEED);
            if self.dim == 2 {
                let heading =
                    S::c(self.rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
                self.state.velocity = vec![speed * heading.cos(), speed * heading.sin()];
            } else {
                let sign = if self.rng.gen_bool(0.5) { S::one() } else { -S::one() };
                self.state.velocity = vec![speed * sign];
            }
        }
        self.clock.restart();
        self.observation()
    }

    fn step(&mut self, action: &[S]) -> Result<StepResult<S>, EnvError> {
        let force = prepare_action(&self.act_space, action)?;
        let prev_x = self.state.position[0];
        self.state = mass_point_dynamics(&self.state, &force, S::c(MASS_DT), &self.dynamics)?;

        let mut reward = (self.state.position[0] - prev_x) + S::c(ALIVE_BONUS);
        let cost = velocity_cost(&self.state.velocity)?;

        let mut terminated = false;
        if self.task == MassTask::Run && self.state.position[0] >= S::c(RUN_GOAL_X) {
            reward += S::c(RUN_BONUS);
            terminated = true;
        }
        let truncated = self.clock.tick(terminated)?;
        Ok(StepResult { observation: self.observation(), reward, cost, terminated, truncated })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_policy_earns_only_the_alive_bonus() {
        let mut env = MassPointEnv::<f64>::new(MassTask::Velocity, 2);
        env.reset(0);
        let res = env.step(&[0.0, 0.0]).unwrap();
        assert!((res.reward - ALIVE_BONUS).abs() < 1e-12);
        assert_eq!(res.cost, 0.0);
    }

    #[test]
    fn moving_right_pays_speed_cost() {
        let mut env = MassPointEnv::<f64>::new(MassTask::Velocity, 2);
        env.reset(0);
        let mut total_cost = 0.0;
        for _ in 0..100 {
            let res = env.step(&[1.0, 0.0]).unwrap();
            total_cost += res.cost;
        }
        assert!(total_cost > 0.0);
        // near-saturated speed after 100 steps of full thrust
        let res = env.step(&[1.0, 0.0]).unwrap();
        assert!(res.cost > 0.8 && res.cost < 1.0);
    }

    #[test]
    fn run_task_starts_at_fixed_speed_random_heading() {
        let mut env = MassPointEnv::<f64>::new(MassTask::Run, 2);
        let obs_a = env.reset(1);
        let speed_a = (obs_a[2].powi(2) + obs_a[3].powi(2)).sqrt();
        assert!((speed_a - RUN_INIT_SPEED).abs() < 1e-12);
        let obs_b = env.reset(2);
        assert_ne!(obs_a[2..], obs_b[2..]);
    }

    #[test]
    fn run_task_terminates_at_the_far_side() {
        let mut env = MassPointEnv::<f64>::new(MassTask::Run, 1);
        env.reset(3);
        let mut terminated = false;
        for _ in 0..10_000 {
            let res = env.step(&[1.0]).unwrap();
            if res.terminated {
                terminated = true;
                assert!(res.reward > RUN_BONUS * 0.9);
                break;
            }
            if res.truncated {
                break;
            }
        }
        assert!(terminated, "full thrust should reach the far side");
    }

    #[test]
    fn velocity_env_truncates_at_the_limit() {
        let mut env = MassPointEnv::<f64>::new(MassTask::Velocity, 1).with_max_steps(5);
        env.reset(0);
        for i in 0..5 {
            let res = env.step(&[0.3]).unwrap();
            assert_eq!(res.truncated, i == 4);
        }
    }
}

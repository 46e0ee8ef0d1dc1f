//! Cooperative multi-agent surrogate: one planar mass point whose force
//! axes are split across agents. All agents share the forward-displacement
//! reward and each pays the speed-magnitude cost, giving the shared-reward,
//! per-agent-cost structure of a constrained Markov game.

use rand_chacha::ChaCha8Rng;

use super::costs::velocity_cost;
use super::dynamics::{mass_point_dynamics, DynamicsParams, MassPointState};
use super::mass::{ALIVE_BONUS, MASS_DT, MASS_MAX_STEPS};
use crate::cmdp::{BoxSpace, CmgEnv, EnvError, EpisodeClock, JointStepResult};
use crate::scalar::Real;
use rand::SeedableRng;

/// Two agents each drive one axis of a shared 2D mass point. Every agent
/// observes the full point velocity.
pub struct CoopMassPointEnv<S: Real> {
    dynamics: DynamicsParams<S>,
    obs_space: BoxSpace<S>,
    act_space: BoxSpace<S>,
    max_steps: usize,
    state: MassPointState<S>,
    clock: EpisodeClock,
    #[allow(dead_code)]
    rng: ChaCha8Rng,
}

impl<S: Real> CoopMassPointEnv<S> {
    pub fn new() -> Self {
        Self {
            dynamics: DynamicsParams::default(),
            obs_space: BoxSpace::unbounded(2),
            act_space: BoxSpace::symmetric_unit(1),
            max_steps: MASS_MAX_STEPS,
            state: MassPointState::at_rest(2),
            clock: EpisodeClock::new(MASS_MAX_STEPS),
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn with_max_steps(mut self, limit: usize) -> Self {
        self.max_steps = limit;
        self.clock = EpisodeClock::new(limit);
        self
    }

    fn observations(&self) -> Vec<Vec<S>> {
        vec![self.state.velocity.clone(); 2]
    }
}

impl<S: Real> Default for CoopMassPointEnv<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Real> CmgEnv<S> for CoopMassPointEnv<S> {
    fn n_agents(&self) -> usize {
        2
    }

    fn observation_space(&self, _agent: usize) -> &BoxSpace<S> {
        &self.obs_space
    }

    fn action_space(&self, _agent: usize) -> &BoxSpace<S> {
        &self.act_space
    }

    fn max_episode_steps(&self) -> usize {
        self.max_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<Vec<S>> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = MassPointState::at_rest(2);
        self.clock.restart();
        self.observations()
    }

    fn step(&mut self, actions: &[Vec<S>]) -> Result<JointStepResult<S>, EnvError> {
        if actions.len() != 2 {
            return Err(EnvError::ActionDim { expected: 2, got: actions.len() });
        }
        let mut force = [S::zero(); 2];
        for (i, a) in actions.iter().enumerate() {
            if a.len() != 1 {
                return Err(EnvError::ActionDim { expected: 1, got: a.len() });
            }
            if !a[0].is_finite() {
                return Err(EnvError::NonFiniteAction);
            }
            force[i] = a[0].max(-S::one()).min(S::one());
        }
        let prev_x = self.state.position[0];
        self.state = mass_point_dynamics(&self.state, &force, S::c(MASS_DT), &self.dynamics)?;
        let reward = (self.state.position[0] - prev_x) + S::c(ALIVE_BONUS);
        let cost = velocity_cost(&self.state.velocity)?;
        let truncated = self.clock.tick(false)?;
        Ok(JointStepResult {
            observations: self.observations(),
            reward,
            costs: vec![cost; 2],
            terminated: false,
            truncated,
        })
    }
}

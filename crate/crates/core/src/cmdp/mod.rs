//! Constrained-MDP and constrained-Markov-game abstractions: spaces, step
//! results, trajectories, environment traits and episode bookkeeping.

mod rollout;
mod trajectory;

pub use rollout::{derive_episode_seed, joint_rollout, rollout, Agent, JointAgent};
pub use trajectory::{EpisodeEnd, JointTrajectory, Trajectory};

use crate::scalar::{all_finite, Real};
use thiserror::Error;

/// Errors raised by environment interaction.
#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("action has dimension {got}, expected {expected}")]
    ActionDim { expected: usize, got: usize },
    #[error("action contains non-finite entries")]
    NonFiniteAction,
    #[error("state contains non-finite entries")]
    NonFiniteState,
    #[error("step called on a finished episode; call reset first")]
    EpisodeOver,
    #[error("step called before the first reset")]
    NotReset,
    #[error("unknown environment id `{0}`")]
    UnknownId(String),
    #[error("layout sampling failed after {0} rejection attempts")]
    LayoutSampling(usize),
    #[error("unsupported vector dimension {0}")]
    UnsupportedDim(usize),
}

/// A box in R^n with per-coordinate bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpace<S: Real> {
    low: Vec<S>,
    high: Vec<S>,
}

impl<S: Real> BoxSpace<S> {
    /// Bounds must satisfy `low[i] <= high[i]` and have equal length.
    pub fn new(low: Vec<S>, high: Vec<S>) -> Self {
        assert_eq!(low.len(), high.len(), "bound length mismatch");
        for (l, h) in low.iter().zip(&high) {
            assert!(*l <= *h, "low bound exceeds high bound");
        }
        Self { low, high }
    }

    /// The symmetric box `[-1, 1]^dim`.
    pub fn symmetric_unit(dim: usize) -> Self {
        Self::new(vec![S::c(-1.0); dim], vec![S::one(); dim])
    }

    /// Unbounded box (observations).
    pub fn unbounded(dim: usize) -> Self {
        Self::new(vec![S::neg_infinity(); dim], vec![S::infinity(); dim])
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn low(&self) -> &[S] {
        &self.low
    }

    pub fn high(&self) -> &[S] {
        &self.high
    }

    /// Clip a vector into the box, coordinatewise.
    pub fn clip(&self, v: &[S]) -> Vec<S> {
        v.iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(&x, (&l, &h))| x.max(l).min(h))
            .collect()
    }

    pub fn contains(&self, v: &[S]) -> bool {
        v.len() == self.dim()
            && v.iter()
                .zip(self.low.iter().zip(&self.high))
                .all(|(&x, (&l, &h))| x >= l && x <= h)
    }
}

/// Outcome of a single environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult<S: Real> {
    pub observation: Vec<S>,
    pub reward: S,
    /// Nonnegative safety signal; in binary mode this is 0 or 1.
    pub cost: S,
    pub terminated: bool,
    pub truncated: bool,
}

/// Single-agent constrained MDP. `reset` must be called before the first
/// `step`; stepping a finished episode is a contract violation.
pub trait CmdpEnv<S: Real> {
    fn observation_space(&self) -> &BoxSpace<S>;
    fn action_space(&self) -> &BoxSpace<S>;
    fn max_episode_steps(&self) -> usize;

    /// Start a fresh episode drawn deterministically from `seed`.
    fn reset(&mut self, seed: u64) -> Vec<S>;

    /// Advance one step. Out-of-bounds actions are clipped to the action
    /// space; non-finite or wrongly sized actions are errors.
    fn step(&mut self, action: &[S]) -> Result<StepResult<S>, EnvError>;
}

/// Joint step outcome of a constrained Markov game.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStepResult<S: Real> {
    pub observations: Vec<Vec<S>>,
    /// Reward shared by every agent.
    pub reward: S,
    /// One cost per agent.
    pub costs: Vec<S>,
    pub terminated: bool,
    pub truncated: bool,
}

/// Cooperative constrained Markov game: shared reward, per-agent costs.
pub trait CmgEnv<S: Real> {
    fn n_agents(&self) -> usize;
    fn observation_space(&self, agent: usize) -> &BoxSpace<S>;
    fn action_space(&self, agent: usize) -> &BoxSpace<S>;
    fn max_episode_steps(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Vec<Vec<S>>;
    fn step(&mut self, actions: &[Vec<S>]) -> Result<JointStepResult<S>, EnvError>;
}

/// Per-episode step counter shared by the concrete environments.
#[derive(Debug, Clone, Default)]
pub struct EpisodeClock {
    limit: usize,
    t: usize,
    started: bool,
    done: bool,
}

impl EpisodeClock {
    pub fn new(limit: usize) -> Self {
        Self { limit, t: 0, started: false, done: false }
    }

    pub fn restart(&mut self) {
        self.t = 0;
        self.started = true;
        self.done = false;
    }

    /// Register one step; returns `truncated` for this step.
    /// `terminated` is the environment's own terminal signal.
    pub fn tick(&mut self, terminated: bool) -> Result<bool, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        self.t += 1;
        let truncated = !terminated && self.t >= self.limit;
        self.done = terminated || truncated;
        Ok(truncated)
    }

    pub fn steps(&self) -> usize {
        self.t
    }
}

/// Validate and clip an action against a space.
pub fn prepare_action<S: Real>(space: &BoxSpace<S>, action: &[S]) -> Result<Vec<S>, EnvError> {
    if action.len() != space.dim() {
        return Err(EnvError::ActionDim { expected: space.dim(), got: action.len() });
    }
    if !all_finite(action) {
        return Err(EnvError::NonFiniteAction);
    }
    Ok(space.clip(action))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_space_clips_to_bounds() {
        let space = BoxSpace::<f64>::symmetric_unit(2);
        assert_eq!(space.clip(&[2.0, -3.0]), vec![1.0, -1.0]);
        assert!(space.contains(&[0.5, -0.5]));
        assert!(!space.contains(&[1.5, 0.0]));
    }

    #[test]
    #[should_panic]
    fn box_space_rejects_inverted_bounds() {
        let _ = BoxSpace::<f64>::new(vec![1.0], vec![0.0]);
    }

    #[test]
    fn prepare_action_checks_dim_and_finiteness() {
        let space = BoxSpace::<f64>::symmetric_unit(2);
        assert_eq!(
            prepare_action(&space, &[0.0]),
            Err(EnvError::ActionDim { expected: 2, got: 1 })
        );
        assert_eq!(prepare_action(&space, &[f64::NAN, 0.0]), Err(EnvError::NonFiniteAction));
        assert_eq!(prepare_action(&space, &[9.0, 0.25]).unwrap(), vec![1.0, 0.25]);
    }

    #[test]
    fn clock_enforces_reset_and_done_contract() {
        let mut clock = EpisodeClock::new(2);
        assert_eq!(clock.tick(false), Err(EnvError::NotReset));
        clock.restart();
        assert_eq!(clock.tick(false), Ok(false));
        assert_eq!(clock.tick(false), Ok(true)); // hits the limit
        assert_eq!(clock.tick(false), Err(EnvError::EpisodeOver));
        clock.restart();
        assert_eq!(clock.tick(true), Ok(false)); // terminal step is not truncated
        assert_eq!(clock.tick(false), Err(EnvError::EpisodeOver));
    }
}

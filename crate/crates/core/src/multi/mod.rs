//! Multi-agent constrained policy optimization on cooperative games:
//! MAPPO, MAPPO-Lag, HAPPO and MACPO, with per-agent actors, centralized
//! critics on the concatenated state, and sequential updates weighted by
//! the running likelihood-ratio factor.

mod updates;

pub use updates::{happo_update, macpo_update, mappo_lag_update, mappo_update};

use rand_chacha::ChaCha8Rng;

use crate::cmdp::{JointAgent, JointTrajectory};
use crate::estimation::{normalize_advantages, EstimationError, GaeConfig};
use crate::estimation::{discounted_returns, gae};
use crate::nn::{ActorNet, Activation, AdamState, ValueNet};
use crate::scalar::Real;

/// Per-agent actors plus centralized reward and per-agent cost critics.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPolicy<S: Real> {
    pub actors: Vec<ActorNet<S>>,
    pub critic_r: ValueNet<S>,
    pub critic_c: Vec<ValueNet<S>>,
}

impl<S: Real> JointPolicy<S> {
    pub fn new(
        obs_dims: &[usize],
        act_dims: &[usize],
        hidden: &[usize],
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        assert_eq!(obs_dims.len(), act_dims.len());
        let central_dim: usize = obs_dims.iter().sum();
        let actors = obs_dims
            .iter()
            .zip(act_dims)
            .map(|(&o, &a)| ActorNet::new(o, a, hidden, activation, rng))
            .collect();
        let critic_r = ValueNet::new(central_dim, hidden, activation, rng);
        let critic_c = obs_dims
            .iter()
            .map(|_| ValueNet::new(central_dim, hidden, activation, rng))
            .collect();
        Self { actors, critic_r, critic_c }
    }

    pub fn n_agents(&self) -> usize {
        self.actors.len()
    }
}

impl<S: Real> JointAgent<S> for JointPolicy<S> {
    fn n_agents(&self) -> usize {
        self.actors.len()
    }

    fn act(&self, agent: usize, obs: &[S], rng: &mut ChaCha8Rng) -> (Vec<S>, S) {
        self.actors[agent].sample(obs, rng).expect("obs dim mismatch")
    }

    fn central_values(&self, state: &[S]) -> (S, Vec<S>) {
        let vr = self.critic_r.value(state).expect("state dim mismatch");
        let vc = self.critic_c.iter().map(|c| c.value(state).expect("state dim")).collect();
        (vr, vc)
    }
}

/// Adam states matching a [`JointPolicy`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointOptimizers<S: Real> {
    pub actors: Vec<AdamState<S>>,
    pub critic_r: AdamState<S>,
    pub critic_c: Vec<AdamState<S>>,
}

impl<S: Real> JointOptimizers<S> {
    pub fn new(policy: &JointPolicy<S>, actor_lr: S, critic_lr: S) -> Self {
        Self {
            actors: policy
                .actors
                .iter()
                .map(|a| AdamState::new(a.n_params(), actor_lr))
                .collect(),
            critic_r: AdamState::new(policy.critic_r.n_params(), critic_lr),
            critic_c: policy
                .critic_c
                .iter()
                .map(|c| AdamState::new(c.n_params(), critic_lr))
                .collect(),
        }
    }
}

/// Prepared joint experience: shared standardized reward advantages,
/// per-agent centered cost advantages, centralized critic targets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBatch<S: Real> {
    pub obs: Vec<Vec<Vec<S>>>,
    pub actions: Vec<Vec<Vec<S>>>,
    pub old_log_probs: Vec<Vec<S>>,
    pub central_states: Vec<Vec<S>>,
    pub adv_r: Vec<S>,
    pub adv_c: Vec<Vec<S>>,
    pub ret_r: Vec<S>,
    pub ret_c: Vec<Vec<S>>,
    pub ep_cost: Vec<S>,
}

impl<S: Real> JointBatch<S> {
    pub fn len(&self) -> usize {
        self.central_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.central_states.is_empty()
    }

    pub fn n_agents(&self) -> usize {
        self.obs.len()
    }

    /// Mean episodic cost across agents (drives the shared multiplier).
    pub fn mean_ep_cost(&self) -> S {
        self.ep_cost.iter().copied().sum::<S>() / S::c(self.ep_cost.len() as f64)
    }
}

pub fn prepare_joint_batch<S: Real>(
    traj: &JointTrajectory<S>,
    cfg_r: GaeConfig<S>,
    cfg_c: GaeConfig<S>,
) -> Result<JointBatch<S>, EstimationError> {
    let n = traj.n_agents();
    let mut adv_r = Vec::with_capacity(traj.len());
    let mut ret_r = Vec::with_capacity(traj.len());
    let mut adv_c = vec![Vec::with_capacity(traj.len()); n];
    let mut ret_c = vec![Vec::with_capacity(traj.len()); n];

    for (k, range) in traj.episode_ranges().enumerate() {
        let rewards = &traj.rewards[range.clone()];
        let mut values_r = traj.value_r[range.clone()].to_vec();
        values_r.push(traj.bootstrap_r[k]);
        adv_r.extend(gae(rewards, &values_r, cfg_r)?);
        ret_r.extend(discounted_returns(rewards, cfg_r.gamma, traj.bootstrap_r[k]));

        for i in 0..n {
            let costs = &traj.costs[i][range.clone()];
            let mut values_c = traj.value_c[i][range.clone()].to_vec();
            values_c.push(traj.bootstrap_c[k][i]);
            adv_c[i].extend(gae(costs, &values_c, cfg_c)?);
            ret_c[i].extend(discounted_returns(costs, cfg_c.gamma, traj.bootstrap_c[k][i]));
        }
    }
    normalize_advantages(&mut adv_r)?;
    for a in adv_c.iter_mut() {
        crate::algos::center(a);
    }
    Ok(JointBatch {
        obs: traj.observations.clone(),
        actions: traj.actions.clone(),
        old_log_probs: traj.log_probs.clone(),
        central_states: traj.central_states.clone(),
        adv_r,
        adv_c,
        ret_r,
        ret_c,
        ep_cost: (0..n).map(|i| traj.mean_episodic_cost(i)).collect(),
    })
}

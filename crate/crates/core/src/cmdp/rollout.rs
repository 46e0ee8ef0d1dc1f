//! Batch collection: run a stochastic policy in an environment for a fixed
//! number of steps, auto-resetting episodes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CmdpEnv, CmgEnv, EpisodeEnd, JointTrajectory, Trajectory};
use crate::scalar::Real;

/// A stochastic policy with reward and cost critics, as seen by rollout.
pub trait Agent<S: Real> {
    /// Sample an action and its log-probability.
    fn act(&self, obs: &[S], rng: &mut ChaCha8Rng) -> (Vec<S>, S);
    /// Reward and cost value estimates for bootstrapping.
    fn values(&self, obs: &[S]) -> (S, S);
}

/// Multi-agent counterpart of [`Agent`]: per-agent actors plus centralized
/// critics evaluated on the concatenated state.
pub trait JointAgent<S: Real> {
    fn n_agents(&self) -> usize;
    fn act(&self, agent: usize, obs: &[S], rng: &mut ChaCha8Rng) -> (Vec<S>, S);
    fn central_values(&self, state: &[S]) -> (S, Vec<S>);
}

/// Deterministic per-episode environment seed derived from the rollout seed.
/// SplitMix64 keeps episode streams independent of each other.
pub fn derive_episode_seed(base: u64, episode: u64) -> u64 {
    let mut z = base ^ episode.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collect exactly `n_steps` transitions, resetting the environment whenever
/// an episode finishes. Episode truncation (and a rollout that stops
/// mid-episode) bootstraps with the critic value of the next observation;
/// termination bootstraps with zero.
pub fn rollout<S: Real, E: CmdpEnv<S> + ?Sized, A: Agent<S> + ?Sized>(
    env: &mut E,
    agent: &A,
    n_steps: usize,
    seed: u64,
) -> Trajectory<S> {
    let mut traj = Trajectory::default();
    if n_steps == 0 {
        return traj;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut episode = 0u64;
    let mut obs = env.reset(derive_episode_seed(seed, episode));

    for t in 0..n_steps {
        let (action, log_prob) = agent.act(&obs, &mut rng);
        let (vr, vc) = agent.values(&obs);
        let step = env.step(&action).expect("rollout step violated the env contract");

        traj.observations.push(obs);
        traj.actions.push(action);
        traj.log_probs.push(log_prob);
        traj.rewards.push(step.reward);
        traj.costs.push(step.cost);
        traj.value_r.push(vr);
        traj.value_c.push(vc);

        let last = t + 1 == n_steps;
        if step.terminated || step.truncated || last {
            let kind = if step.terminated {
                EpisodeEnd::Terminated
            } else if step.truncated {
                EpisodeEnd::Truncated
            } else {
                EpisodeEnd::Cut
            };
            let bootstrap = match kind {
                EpisodeEnd::Terminated => (S::zero(), S::zero()),
                _ => agent.values(&step.observation),
            };
            traj.episode_ends.push(t + 1);
            traj.episode_kinds.push(kind);
            traj.bootstrap_values.push(bootstrap);
        }

        if step.terminated || step.truncated {
            episode += 1;
            obs = env.reset(derive_episode_seed(seed, episode));
        } else {
            obs = step.observation;
        }
    }
    traj.check();
    traj
}

/// Joint rollout over a cooperative game; mirrors [`rollout`].
pub fn joint_rollout<S: Real, E: CmgEnv<S> + ?Sized, A: JointAgent<S> + ?Sized>(
    env: &mut E,
    agent: &A,
    n_steps: usize,
    seed: u64,
) -> JointTrajectory<S> {
    let n = env.n_agents();
    assert_eq!(n, agent.n_agents(), "agent/env agent-count mismatch");
    let mut traj = JointTrajectory {
        observations: vec![Vec::new(); n],
        actions: vec![Vec::new(); n],
        log_probs: vec![Vec::new(); n],
        costs: vec![Vec::new(); n],
        value_c: vec![Vec::new(); n],
        ..Default::default()
    };
    if n_steps == 0 {
        return traj;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut episode = 0u64;
    let mut obs = env.reset(derive_episode_seed(seed, episode));

    for t in 0..n_steps {
        let central: Vec<S> = obs.iter().flatten().copied().collect();
        let mut actions = Vec::with_capacity(n);
        for i in 0..n {
            let (a, lp) = agent.act(i, &obs[i], &mut rng);
            traj.log_probs[i].push(lp);
            actions.push(a);
        }
        let (vr, vc) = agent.central_values(&central);
        let step = env.step(&actions).expect("joint rollout step violated the env contract");

        for i in 0..n {
            traj.observations[i].push(obs[i].clone());
            traj.actions[i].push(actions[i].clone());
            traj.costs[i].push(step.costs[i]);
            traj.value_c[i].push(vc[i]);
        }
        traj.central_states.push(central);
        traj.rewards.push(step.reward);
        traj.value_r.push(vr);

        let last = t + 1 == n_steps;
        if step.terminated || step.truncated || last {
            let kind = if step.terminated {
                EpisodeEnd::Terminated
            } else if step.truncated {
                EpisodeEnd::Truncated
            } else {
                EpisodeEnd::Cut
            };
            let (br, bc) = match kind {
                EpisodeEnd::Terminated => (S::zero(), vec![S::zero(); n]),
                _ => {
                    let next_central: Vec<S> =
                        step.observations.iter().flatten().copied().collect();
                    agent.central_values(&next_central)
                }
            };
            traj.episode_ends.push(t + 1);
            traj.episode_kinds.push(kind);
            traj.bootstrap_r.push(br);
            traj.bootstrap_c.push(bc);
        }

        if step.terminated || step.truncated {
            episode += 1;
            obs = env.reset(derive_episode_seed(seed, episode));
        } else {
            obs = step.observations;
        }
    }
    traj
}

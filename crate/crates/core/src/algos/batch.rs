//! Batch preparation: turn a raw trajectory into the advantage/return
//! arrays the update rules consume. Reward advantages are standardized;
//! cost advantages are centered but keep their scale so multiplier and
//! constraint arithmetic stay in cost units.

use crate::cmdp::Trajectory;
use crate::estimation::{normalize_advantages, trajectory_estimates, EstimationError, GaeConfig};
use crate::scalar::Real;

/// Everything an update rule needs from one iteration of experience.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<S: Real> {
    pub obs: Vec<Vec<S>>,
    pub actions: Vec<Vec<S>>,
    pub old_log_probs: Vec<S>,
    /// Standardized reward advantages.
    pub adv_r: Vec<S>,
    /// Centered (zero-mean) cost advantages in cost units.
    pub adv_c: Vec<S>,
    pub ret_r: Vec<S>,
    pub ret_c: Vec<S>,
    /// Mean undiscounted episodic cost of the batch.
    pub ep_cost: S,
    /// Mean undiscounted episodic reward of the batch.
    pub ep_reward: S,
}

impl<S: Real> Batch<S> {
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }
}

/// Mean-center a vector, leaving its scale intact.
pub fn center<S: Real>(v: &mut [S]) {
    if v.is_empty() {
        return;
    }
    let mean = v.iter().copied().sum::<S>() / S::c(v.len() as f64);
    for x in v.iter_mut() {
        *x -= mean;
    }
}

pub fn prepare_batch<S: Real>(
    traj: &Trajectory<S>,
    cfg_r: GaeConfig<S>,
    cfg_c: GaeConfig<S>,
) -> Result<Batch<S>, EstimationError> {
    let est = trajectory_estimates(traj, cfg_r, cfg_c)?;
    let mut adv_r = est.adv_r;
    normalize_advantages(&mut adv_r)?;
    let mut adv_c = est.adv_c;
    center(&mut adv_c);
    Ok(Batch {
        obs: traj.observations.clone(),
        actions: traj.actions.clone(),
        old_log_probs: traj.log_probs.clone(),
        adv_r,
        adv_c,
        ret_r: est.ret_r,
        ret_c: est.ret_c,
        ep_cost: traj.mean_episodic_cost(),
        ep_reward: traj.mean_episodic_reward(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmdp::EpisodeEnd;

    #[test]
    fn prepared_batch_has_standardized_reward_advantages() {
        let traj = Trajectory::<f64> {
            observations: vec![vec![0.0]; 8],
            actions: vec![vec![0.0]; 8],
            log_probs: vec![-0.9; 8],
            rewards: vec![1.0, 0.0, 2.0, -1.0, 0.5, 0.0, 1.5, -0.5],
            costs: vec![1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0],
            value_r: vec![0.1; 8],
            value_c: vec![0.2; 8],
            episode_ends: vec![4, 8],
            episode_kinds: vec![EpisodeEnd::Truncated, EpisodeEnd::Truncated],
            bootstrap_values: vec![(0.0, 0.0), (0.0, 0.0)],
        };
        let cfg = GaeConfig::default();
        let batch = prepare_batch(&traj, cfg, cfg).unwrap();
        let n = batch.adv_r.len() as f64;
        let mean: f64 = batch.adv_r.iter().sum::<f64>() / n;
        assert!(mean.abs() < 1e-12);
        let c_mean: f64 = batch.adv_c.iter().sum::<f64>() / n;
        assert!(c_mean.abs() < 1e-12);
        // episodic cost: (2 + 3) / 2
        assert_eq!(batch.ep_cost, 2.5);
    }
}

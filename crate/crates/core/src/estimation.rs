//! Advantage and return estimation shared by every algorithm: generalized
//! advantage estimation for the reward and cost streams, discounted returns,
//! and advantage normalization.

use crate::cmdp::Trajectory;
use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimationError {
    #[error("values must have exactly one more entry than rewards ({rewards} + 1 != {values})")]
    LengthMismatch { rewards: usize, values: usize },
    #[error("normalization needs at least 2 entries, got {0}")]
    TooShort(usize),
    #[error("gamma must lie in [0, 1] and lambda in [0, 1]")]
    BadConfig,
}

/// Discount and GAE-lambda settings. `gamma = 1` is allowed for the finite
/// episode segments handled here, even though the discounted objectives are
/// stated for `gamma < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaeConfig<S: Real> {
    pub gamma: S,
    pub lam: S,
}

impl<S: Real> GaeConfig<S> {
    pub fn new(gamma: S, lam: S) -> Result<Self, EstimationError> {
        let unit = S::zero()..=S::one();
        if !unit.contains(&gamma) || !unit.contains(&lam) {
            return Err(EstimationError::BadConfig);
        }
        Ok(Self { gamma, lam })
    }
}

impl<S: Real> Default for GaeConfig<S> {
    fn default() -> Self {
        Self { gamma: S::c(0.99), lam: S::c(0.95) }
    }
}

/// GAE over one episode segment. `values` has length `T + 1`; its last entry
/// is the bootstrap value past the segment end.
pub fn gae<S: Real>(
    rewards: &[S],
    values: &[S],
    cfg: GaeConfig<S>,
) -> Result<Vec<S>, EstimationError> {
    if values.len() != rewards.len() + 1 {
        return Err(EstimationError::LengthMismatch {
            rewards: rewards.len(),
            values: values.len(),
        });
    }
    let t_len = rewards.len();
    let mut adv = vec![S::zero(); t_len];
    let mut running = S::zero();
    for t in (0..t_len).rev() {
        let delta = rewards[t] + cfg.gamma * values[t + 1] - values[t];
        running = delta + cfg.gamma * cfg.lam * running;
        adv[t] = running;
    }
    Ok(adv)
}

/// Backward recursion `G_t = r_t + gamma * G_{t+1}` with `G_T = bootstrap`.
pub fn discounted_returns<S: Real>(rewards: &[S], gamma: S, bootstrap: S) -> Vec<S> {
    let mut returns = vec![S::zero(); rewards.len()];
    let mut running = bootstrap;
    for t in (0..rewards.len()).rev() {
        running = rewards[t] + gamma * running;
        returns[t] = running;
    }
    returns
}

/// Shift to zero mean and scale to unit standard deviation (population
/// variance, denominator guarded by 1e-8).
pub fn normalize_advantages<S: Real>(adv: &mut [S]) -> Result<(), EstimationError> {
    if adv.len() < 2 {
        return Err(EstimationError::TooShort(adv.len()));
    }
    let n = S::c(adv.len() as f64);
    let mean = adv.iter().copied().sum::<S>() / n;
    let var = adv.iter().map(|&a| (a - mean) * (a - mean)).sum::<S>() / n;
    let denom = var.sqrt() + S::c(1e-8);
    for a in adv.iter_mut() {
        *a = (*a - mean) / denom;
    }
    Ok(())
}

/// Advantages and critic regression targets for a whole trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimates<S: Real> {
    pub adv_r: Vec<S>,
    pub adv_c: Vec<S>,
    pub ret_r: Vec<S>,
    pub ret_c: Vec<S>,
}

/// Per-episode GAE and discounted returns for the reward and cost streams.
/// Each segment uses its recorded bootstrap pair (zero after termination,
/// critic value after truncation or a mid-episode cut).
pub fn trajectory_estimates<S: Real>(
    traj: &Trajectory<S>,
    cfg_r: GaeConfig<S>,
    cfg_c: GaeConfig<S>,
) -> Result<Estimates<S>, EstimationError> {
    let t_len = traj.len();
    let mut est = Estimates {
        adv_r: Vec::with_capacity(t_len),
        adv_c: Vec::with_capacity(t_len),
        ret_r: Vec::with_capacity(t_len),
        ret_c: Vec::with_capacity(t_len),
    };
    for (k, range) in traj.episode_ranges().enumerate() {
        let (boot_r, boot_c) = traj.bootstrap_values[k];
        let rewards = &traj.rewards[range.clone()];
        let costs = &traj.costs[range.clone()];

        let mut values_r = traj.value_r[range.clone()].to_vec();
        values_r.push(boot_r);
        let mut values_c = traj.value_c[range.clone()].to_vec();
        values_c.push(boot_c);

        est.adv_r.extend(gae(rewards, &values_r, cfg_r)?);
        est.adv_c.extend(gae(costs, &values_c, cfg_c)?);
        est.ret_r.extend(discounted_returns(rewards, cfg_r.gamma, boot_r));
        est.ret_c.extend(discounted_returns(costs, cfg_c.gamma, boot_c));
    }
    Ok(est)
}

//! First-order constrained updates that work in distribution space:
//! FOCOPS (per-state KL-regularized loss with a learned cost weight) and
//! CUP (two-stage improve-then-project).

use rand_chacha::ChaCha8Rng;

use super::batch::Batch;
use super::policy_grad::{fit_critic, minibatch_plan, old_dists, ppo_actor_update, OldDists};
use super::{Optimizers, UpdateReport};
use crate::nn::{entropy, gaussian, ActorNet, MlpCache, PolicyParams};
use crate::scalar::{all_finite, Real};

/// Learned cost weight shared by FOCOPS and CUP, clamped to `[0, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuState<S: Real> {
    pub nu: S,
    pub lr: S,
    pub max: S,
}

impl<S: Real> NuState<S> {
    pub fn new(lr: S, max: S) -> Self {
        Self { nu: S::zero(), lr, max }
    }

    pub fn update(&mut self, ep_cost: S, cost_limit: S) {
        self.nu = (self.nu + self.lr * (ep_cost - cost_limit)).max(S::zero()).min(self.max);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocopsConfig<S: Real> {
    /// Temperature of the KL regularizer (table value 1.5).
    pub lam_temp: S,
    pub epochs: usize,
    pub target_kl: S,
    pub critic_epochs: usize,
    pub minibatch: usize,
}

impl<S: Real> Default for FocopsConfig<S> {
    fn default() -> Self {
        Self {
            lam_temp: S::c(1.5),
            epochs: 40,
            target_kl: S::c(0.02),
            critic_epochs: 40,
            minibatch: 64,
        }
    }
}

/// FOCOPS: minimize, over states whose per-state KL stays within the trust
/// region, `KL(pi_theta || pi_old) - (1 / lam) * rho * (adv_r - nu adv_c)`.
pub fn focops_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &FocopsConfig<S>,
    cost_limit: S,
    nu: &mut NuState<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    nu.update(batch.ep_cost, cost_limit);
    let old = old_dists(&params.actor, &batch.obs);
    let combined: Vec<S> =
        batch.adv_r.iter().zip(&batch.adv_c).map(|(&r, &c)| r - nu.nu * c).collect();

    let snapshot = params.actor.data.clone();
    let mut loss = S::zero();
    let mut aborted = false;
    let mut used = 0;
    'epochs: for _ in 0..cfg.epochs {
        for idx in minibatch_plan(batch.len(), cfg.minibatch, rng) {
            let (l, grad) = focops_loss_grad(&params.actor, batch, &old, &combined, cfg, &idx);
            if !l.is_finite() || !all_finite(&grad) {
                params.actor.data.copy_from_slice(&snapshot);
                aborted = true;
                break 'epochs;
            }
            opt.actor.apply(&mut params.actor.data, &grad);
            loss = l;
        }
        used += 1;
    }

    let kl = super::policy_grad::mean_kl(&params.actor, &batch.obs, &old);
    let value_loss_r = fit_critic(
        &mut params.critic_r,
        &mut opt.critic_r,
        &batch.obs,
        &batch.ret_r,
        cfg.critic_epochs,
        cfg.minibatch,
        rng,
    );
    let value_loss_c = fit_critic(
        &mut params.critic_c,
        &mut opt.critic_c,
        &batch.obs,
        &batch.ret_c,
        cfg.critic_epochs,
        cfg.minibatch,
        rng,
    );
    UpdateReport {
        policy_loss: loss,
        value_loss_r,
        value_loss_c,
        mean_kl: kl,
        entropy: entropy(params.actor.log_std()),
        epochs_used: used,
        aborted,
        nu: Some(nu.nu),
        ..Default::default()
    }
}

/// Loss and gradient of the FOCOPS objective (mean over all samples; the
/// trust-region mask zeroes states whose own KL exceeds the target).
fn focops_loss_grad<S: Real>(
    actor: &ActorNet<S>,
    batch: &Batch<S>,
    old: &OldDists<S>,
    combined_adv: &[S],
    cfg: &FocopsConfig<S>,
    idx: &[usize],
) -> (S, Vec<S>) {
    let inv_n = S::one() / S::c(idx.len() as f64);
    let inv_temp = S::one() / cfg.lam_temp;
    let mut grad = vec![S::zero(); actor.n_params()];
    let mut loss = S::zero();
    let mut cache = MlpCache::default();
    for &i in idx {
        actor.forward_cached(&batch.obs[i], &mut cache).expect("obs dim mismatch");
        let mean = cache.output().to_vec();
        let kl_state =
            gaussian::kl_divergence(&mean, actor.log_std(), &old.means[i], &old.log_std);
        if kl_state > cfg.target_kl {
            continue; // outside the per-state trust region
        }
        let lp = gaussian::log_prob(&mean, actor.log_std(), &batch.actions[i]);
        let rho = (lp - batch.old_log_probs[i]).exp();
        loss += (kl_state - inv_temp * rho * combined_adv[i]) * inv_n;

        let (mut d_mean, mut d_ls) =
            gaussian::kl_grad_old_given_new(&mean, actor.log_std(), &old.means[i], &old.log_std);
        let (pg_mean, pg_ls) = gaussian::log_prob_grad(&mean, actor.log_std(), &batch.actions[i]);
        let w = -inv_temp * rho * combined_adv[i];
        for k in 0..d_mean.len() {
            d_mean[k] = (d_mean[k] + w * pg_mean[k]) * inv_n;
            d_ls[k] = (d_ls[k] + w * pg_ls[k]) * inv_n;
        }
        actor.backward_into(&cache, &d_mean, &d_ls, &mut grad);
    }
    (loss, grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CupConfig<S: Real> {
    pub clip: S,
    /// Total Adam epochs, split evenly between the two stages.
    pub epochs: usize,
    pub target_kl: S,
    pub critic_epochs: usize,
    pub minibatch: usize,
}

impl<S: Real> Default for CupConfig<S> {
    fn default() -> Self {
        Self {
            clip: S::c(0.2),
            epochs: 40,
            target_kl: S::c(0.02),
            critic_epochs: 40,
            minibatch: 64,
        }
    }
}

/// CUP: stage 1 is a PPO clip update on the reward advantages; stage 2
/// projects back toward the stage-1 policy under a cost surrogate weighted
/// by `nu` (active only while the batch violates the budget).
pub fn cup_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &CupConfig<S>,
    cost_limit: S,
    nu: &mut NuState<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let stage1_epochs = (cfg.epochs / 2).max(1);
    let stage2_epochs = cfg.epochs.saturating_sub(stage1_epochs).max(1);
    let old = old_dists(&params.actor, &batch.obs);

    let (mut loss, _, mut used, mut aborted) = ppo_actor_update(
        &mut params.actor,
        &mut opt.actor,
        &batch.obs,
        &batch.actions,
        &batch.old_log_probs,
        &batch.adv_r,
        Some(cfg.clip),
        stage1_epochs,
        cfg.target_kl,
        cfg.minibatch,
        rng,
    );

    nu.update(batch.ep_cost, cost_limit);
    let violating = batch.ep_cost > cost_limit;
    if !aborted {
        let mid = old_dists(&params.actor, &batch.obs);
        let snapshot = params.actor.data.clone();
        'stage2: for _ in 0..stage2_epochs {
            for idx in minibatch_plan(batch.len(), cfg.minibatch, rng) {
                let (l, grad) =
                    cup_projection_loss_grad(&params.actor, batch, &mid, nu.nu, violating, &idx);
                if !l.is_finite() || !all_finite(&grad) {
                    params.actor.data.copy_from_slice(&snapshot);
                    aborted = true;
                    break 'stage2;
                }
                opt.actor.apply(&mut params.actor.data, &grad);
                loss = l;
            }
            used += 1;
        }
    }

    let kl = super::policy_grad::mean_kl(&params.actor, &batch.obs, &old);
    let value_loss_r = fit_critic(
        &mut params.critic_r,
        &mut opt.critic_r,
        &batch.obs,
        &batch.ret_r,
        cfg.critic_epochs,
        cfg.minibatch,
        rng,
    );
    let value_loss_c = fit_critic(
        &mut params.critic_c,
        &mut opt.critic_c,
        &batch.obs,
        &batch.ret_c,
        cfg.critic_epochs,
        cfg.minibatch,
        rng,
    );
    UpdateReport {
        policy_loss: loss,
        value_loss_r,
        value_loss_c,
        mean_kl: kl,
        entropy: entropy(params.actor.log_std()),
        epochs_used: used,
        aborted,
        nu: Some(nu.nu),
        ..Default::default()
    }
}

/// Stage-2 loss: `KL(pi_theta || pi_stage1) + nu * mean(rho_old * adv_c)`
/// with the cost term gated by budget violation. Ratios are taken against
/// the behavior policy the batch was collected under.
fn cup_projection_loss_grad<S: Real>(
    actor: &ActorNet<S>,
    batch: &Batch<S>,
    mid: &OldDists<S>,
    nu: S,
    violating: bool,
    idx: &[usize],
) -> (S, Vec<S>) {
    let inv_n = S::one() / S::c(idx.len() as f64);
    let mut grad = vec![S::zero(); actor.n_params()];
    let mut loss = S::zero();
    let mut cache = MlpCache::default();
    for &i in idx {
        actor.forward_cached(&batch.obs[i], &mut cache).expect("obs dim mismatch");
        let mean = cache.output().to_vec();
        let kl_state =
            gaussian::kl_divergence(&mean, actor.log_std(), &mid.means[i], &mid.log_std);
        loss += kl_state * inv_n;
        let (mut d_mean, mut d_ls) =
            gaussian::kl_grad_old_given_new(&mean, actor.log_std(), &mid.means[i], &mid.log_std);
        if violating && nu > S::zero() {
            let lp = gaussian::log_prob(&mean, actor.log_std(), &batch.actions[i]);
            let rho = (lp - batch.old_log_probs[i]).exp();
            loss += nu * rho * batch.adv_c[i] * inv_n;
            let (pg_mean, pg_ls) =
                gaussian::log_prob_grad(&mean, actor.log_std(), &batch.actions[i]);
            let w = nu * rho * batch.adv_c[i];
            for k in 0..d_mean.len() {
                d_mean[k] += w * pg_mean[k];
                d_ls[k] += w * pg_ls[k];
            }
        }
        for k in 0..d_mean.len() {
            d_mean[k] *= inv_n;
            d_ls[k] *= inv_n;
        }
        actor.backward_into(&cache, &d_mean, &d_ls, &mut grad);
    }
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fresh(seed: u64) -> (PolicyParams<f64>, Optimizers<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = PolicyParams::new(2, 1, &[8], Activation::Tanh, &mut rng);
        let opt = Optimizers::new(&params, 3e-4, 1e-3);
        (params, opt)
    }

    fn batch_for(params: &PolicyParams<f64>, seed: u64, n: usize, ep_cost: f64) -> Batch<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..params.obs_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut actions = Vec::new();
        let mut old_log_probs = Vec::new();
        for o in &obs {
            let (a, lp) = params.actor.sample(o, &mut rng).unwrap();
            actions.push(a);
            old_log_probs.push(lp);
        }
        Batch {
            adv_r: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            adv_c: (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            ret_r: vec![0.0; n],
            ret_c: vec![0.0; n],
            obs,
            actions,
            old_log_probs,
            ep_cost,
            ep_reward: 0.0,
        }
    }

    #[test]
    fn zero_advantages_and_zero_nu_keep_the_policy_fixed() {
        // The KL term is minimized exactly at the old policy, so gradients
        // vanish at initialization.
        let (mut params, mut opt) = fresh(0);
        let mut batch = batch_for(&params, 1, 8, 10.0); // satisfied: nu stays 0
        batch.adv_r = vec![0.0; batch.len()];
        batch.adv_c = vec![0.0; batch.len()];
        let before = params.actor.data.clone();
        let mut nu = NuState::new(0.035, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let report = focops_update(
            &mut params,
            &mut opt,
            &batch,
            &FocopsConfig::default(),
            25.0,
            &mut nu,
            &mut rng,
        );
        assert_eq!(params.actor.data, before);
        assert_eq!(report.nu.unwrap(), 0.0);
    }

    #[test]
    fn nu_clamps_at_its_bound() {
        let mut nu = NuState::new(1.0, 2.0);
        for _ in 0..10 {
            nu.update(40.0, 25.0);
        }
        assert_eq!(nu.nu, 2.0);
        for _ in 0..100 {
            nu.update(0.0, 25.0);
        }
        assert_eq!(nu.nu, 0.0);
    }

    #[test]
    fn focops_matches_scalar_oracle_on_one_state_problem() {
        // Single state, 1D action, negative advantage: the loss has an
        // interior optimum over (mean, log_std) that a brute-force grid
        // can pin down. The trust region is wide enough that the per-state
        // mask never engages, so the network must land on that optimum.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // a 1-1 "network" zeroed so the mean is exactly the output bias
        let mut actor = ActorNet::<f64>::new(1, 1, &[1], Activation::Tanh, &mut rng);
        for w in actor.data.iter_mut() {
            *w = 0.0;
        }
        let obs = vec![vec![0.0]];
        let action = vec![vec![0.4]];
        let old_lp = gaussian::log_prob(&[0.0], &[0.0], &action[0]);
        let adv = -0.8;

        let batch = Batch {
            obs: obs.clone(),
            actions: action.clone(),
            old_log_probs: vec![old_lp],
            adv_r: vec![adv],
            adv_c: vec![0.0],
            ret_r: vec![0.0],
            ret_c: vec![0.0],
            ep_cost: 0.0,
            ep_reward: 0.0,
        };

        // printed loss: KL(N(mu, s) || N(0, 1)) - (1 / 1.5) rho (mu, s) adv
        let loss_fn = |mu: f64, ls: f64| -> f64 {
            let kl = gaussian::kl_divergence(&[mu], &[ls], &[0.0], &[0.0]);
            let lp = gaussian::log_prob(&[mu], &[ls], &[0.4]);
            kl - (1.0 / 1.5) * (lp - old_lp).exp() * adv
        };
        // coarse grid, then refinement around the best cell
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let mut scan = |mu0: f64, mu1: f64, ls0: f64, ls1: f64, step: f64,
                        best: &mut (f64, f64, f64)| {
            let mut mu = mu0;
            while mu <= mu1 {
                let mut ls = ls0;
                while ls <= ls1 {
                    let l = loss_fn(mu, ls);
                    if l < best.0 {
                        *best = (l, mu, ls);
                    }
                    ls += step;
                }
                mu += step;
            }
        };
        scan(-1.5, 1.5, -1.0, 1.0, 1e-3, &mut best);
        scan(best.1 - 2e-3, best.1 + 2e-3, best.2 - 2e-3, best.2 + 2e-3, 1e-5, &mut best);

        let cfg = FocopsConfig { epochs: 30_000, target_kl: 0.5, ..Default::default() };
        let mut params = PolicyParams {
            actor,
            critic_r: crate::nn::ValueNet::new(1, &[1], Activation::Tanh, &mut rng),
            critic_c: crate::nn::ValueNet::new(1, &[1], Activation::Tanh, &mut rng),
        };
        let mut opt = Optimizers::new(&params, 3e-5, 1e-3);
        let mut nu = NuState::new(0.0, 2.0);
        let mut urng = ChaCha8Rng::seed_from_u64(0);
        focops_update(&mut params, &mut opt, &batch, &cfg, 25.0, &mut nu, &mut urng);

        let mean = params.actor.mean(&obs[0]).unwrap()[0];
        assert!(
            (mean - best.1).abs() < 1e-4,
            "mean {mean} vs oracle {} (loss {})",
            best.1,
            best.0
        );
        let ls = params.actor.log_std()[0];
        assert!((ls - best.2).abs() < 1e-4, "log_std {ls} vs oracle {}", best.2);
    }

    #[test]
    fn cup_stage2_is_identity_when_satisfied_and_nu_zero() {
        let (mut params, mut opt) = fresh(1);
        let mut batch = batch_for(&params, 2, 8, 10.0);
        batch.adv_r = vec![0.0; batch.len()]; // stage 1 does nothing
        let before = params.actor.data.clone();
        let mut nu = NuState::new(0.035, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        cup_update(&mut params, &mut opt, &batch, &CupConfig::default(), 25.0, &mut nu, &mut rng);
        assert_eq!(params.actor.data, before);
    }

    #[test]
    fn cup_projection_reduces_cost_surrogate_under_violation() {
        let (mut params, mut opt) = fresh(3);
        let mut batch = batch_for(&params, 4, 24, 40.0); // violating
        batch.adv_r = vec![0.0; batch.len()];
        let before_cost = crate::algos::surrogate_value(
            &params.actor,
            &batch.obs,
            &batch.actions,
            &batch.old_log_probs,
            &batch.adv_c,
        );
        let mut nu = NuState { nu: 2.0, lr: 0.0, max: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        cup_update(&mut params, &mut opt, &batch, &CupConfig::default(), 25.0, &mut nu, &mut rng);
        let after_cost = crate::algos::surrogate_value(
            &params.actor,
            &batch.obs,
            &batch.actions,
            &batch.old_log_probs,
            &batch.adv_c,
        );
        assert!(after_cost < before_cost, "{after_cost} vs {before_cost}");
    }
}

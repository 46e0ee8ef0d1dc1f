//! The multi-agent update rules. Sequential methods (HAPPO, MACPO) visit
//! agents in a fresh random order and weight later agents' advantages by
//! the running product of completed agents' likelihood ratios.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::{JointBatch, JointOptimizers, JointPolicy};
use crate::algos::{
    combined_advantage, cpo_actor_step, fit_critic, ppo_actor_update, MultiplierState, PpoConfig,
    TrustRegionConfig, UpdateReport,
};
use crate::nn::gaussian;
use crate::scalar::Real;

fn fit_central_critics<S: Real>(
    policy: &mut JointPolicy<S>,
    opt: &mut JointOptimizers<S>,
    batch: &JointBatch<S>,
    epochs: usize,
    minibatch: usize,
    rng: &mut ChaCha8Rng,
) -> (S, S) {
    let loss_r = fit_critic(
        &mut policy.critic_r,
        &mut opt.critic_r,
        &batch.central_states,
        &batch.ret_r,
        epochs,
        minibatch,
        rng,
    );
    let mut loss_c = S::zero();
    for i in 0..policy.critic_c.len() {
        loss_c += fit_critic(
            &mut policy.critic_c[i],
            &mut opt.critic_c[i],
            &batch.central_states,
            &batch.ret_c[i],
            epochs,
            minibatch,
            rng,
        );
    }
    (loss_r, loss_c / S::c(policy.critic_c.len() as f64))
}

/// Independent PPO clip updates per agent against the shared advantage,
/// then centralized critic regression.
pub fn mappo_update<S: Real>(
    policy: &mut JointPolicy<S>,
    opt: &mut JointOptimizers<S>,
    batch: &JointBatch<S>,
    cfg: &PpoConfig<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    per_agent_ppo(policy, opt, batch, cfg, |_agent| batch.adv_r.clone(), rng)
}

/// MAPPO on the Lagrangian advantage with one shared multiplier driven by
/// the mean per-agent episodic cost.
pub fn mappo_lag_update<S: Real>(
    policy: &mut JointPolicy<S>,
    opt: &mut JointOptimizers<S>,
    multiplier: &mut MultiplierState<S>,
    batch: &JointBatch<S>,
    cfg: &PpoConfig<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let lambda = multiplier.lambda;
    let mut report = per_agent_ppo(
        policy,
        opt,
        batch,
        cfg,
        |agent| combined_advantage(&batch.adv_r, &batch.adv_c[agent], lambda),
        rng,
    );
    multiplier.update(batch.mean_ep_cost());
    report.lambda = Some(multiplier.lambda);
    report
}

fn per_agent_ppo<S: Real, F: Fn(usize) -> Vec<S>>(
    policy: &mut JointPolicy<S>,
    opt: &mut JointOptimizers<S>,
    batch: &JointBatch<S>,
    cfg: &PpoConfig<S>,
    advantage_of: F,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let n = policy.n_agents();
    let mut report = UpdateReport::default();
    for i in 0..n {
        let adv = advantage_of(i);
        let (loss, kl, used, aborted) = ppo_actor_update(
            &mut policy.actors[i],
            &mut opt.actors[i],
            &batch.obs[i],
            &batch.actions[i],
            &batch.old_log_probs[i],
            &adv,
            cfg.clip,
            cfg.epochs,
            cfg.target_kl,
            cfg.minibatch,
            rng,
        );
        report.policy_loss += loss;
        report.mean_kl += kl;
        report.epochs_used += used;
        report.aborted |= aborted;
    }
    report.policy_loss /= S::c(n as f64);
    report.mean_kl /= S::c(n as f64);
    let (vr, vc) = fit_central_critics(policy, opt, batch, cfg.critic_epochs, cfg.minibatch, rng);
    report.value_loss_r = vr;
    report.value_loss_c = vc;
    report.entropy =
        policy.actors.iter().map(|a| gaussian::entropy(a.log_std())).sum::<S>() / S::c(n as f64);
    report
}

/// Multiply the running factor by agent `i`'s new/old likelihood ratios.
fn update_factor<S: Real>(
    factor: &mut [S],
    policy: &JointPolicy<S>,
    batch: &JointBatch<S>,
    agent: usize,
) {
    for t in 0..batch.len() {
        let lp = policy.actors[agent]
            .log_prob(&batch.obs[agent][t], &batch.actions[agent][t])
            .expect("obs dim mismatch");
        factor[t] *= (lp - batch.old_log_probs[agent][t]).exp();
    }
}

/// Sequential PPO updates in a random agent order; each agent maximizes the
/// factor-weighted shared advantage.
pub fn happo_update<S: Real>(
    policy: &mut JointPolicy<S>,
    opt: &mut JointOptimizers<S>,
    batch: &JointBatch<S>,
    cfg: &PpoConfig<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let n = policy.n_agents();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut factor = vec![S::one(); batch.len()];
    let mut report = UpdateReport::default();
    for &i in &order {
        let adv: Vec<S> = batch.adv_r.iter().zip(&factor).map(|(&a, &m)| m * a).collect();
        let (loss, kl, used, aborted) = ppo_actor_update(
            &mut policy.actors[i],
            &mut opt.actors[i],
            &batch.obs[i],
            &batch.actions[i],
            &batch.old_log_probs[i],
            &adv,
            cfg.clip,
            cfg.epochs,
            cfg.target_kl,
            cfg.minibatch,
            rng,
        );
        report.policy_loss += loss;
        report.mean_kl += kl;
        report.epochs_used += used;
        report.aborted |= aborted;
        update_factor(&mut factor, policy, batch, i);
        debug_assert!(factor.iter().all(|m| *m > S::zero()));
    }
    report.policy_loss /= S::c(n as f64);
    report.mean_kl /= S::c(n as f64);
    let (vr, vc) = fit_central_critics(policy, opt, batch, cfg.critic_epochs, cfg.minibatch, rng);
    report.value_loss_r = vr;
    report.value_loss_c = vc;
    report.entropy =
        policy.actors.iter().map(|a| gaussian::entropy(a.log_std())).sum::<S>() / S::c(n as f64);
    report
}

/// Sequential CPO: each agent solves its own constrained subproblem on the
/// factor-weighted advantages against its per-agent cost budget.
pub fn macpo_update<S: Real>(
    policy: &mut JointPolicy<S>,
    opt: &mut JointOptimizers<S>,
    batch: &JointBatch<S>,
    cfg: &TrustRegionConfig<S>,
    cost_limit: S,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let n = policy.n_agents();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut factor = vec![S::one(); batch.len()];
    let mut report = UpdateReport::default();
    let mut accepted_all = true;
    for &i in &order {
        let adv_r: Vec<S> = batch.adv_r.iter().zip(&factor).map(|(&a, &m)| m * a).collect();
        let adv_c: Vec<S> =
            batch.adv_c[i].iter().zip(&factor).map(|(&a, &m)| m * a).collect();
        let slack = batch.ep_cost[i] - cost_limit;
        let (accepted, kl, internals) = cpo_actor_step(
            &mut policy.actors[i],
            &batch.obs[i],
            &batch.actions[i],
            &batch.old_log_probs[i],
            &adv_r,
            &adv_c,
            slack,
            cfg,
        );
        accepted_all &= accepted;
        report.mean_kl += kl;
        report.cpo = Some(internals);
        update_factor(&mut factor, policy, batch, i);
    }
    report.step_accepted = accepted_all;
    report.mean_kl /= S::c(n as f64);
    report.epochs_used = 1;
    let (vr, vc) = fit_central_critics(policy, opt, batch, cfg.critic_epochs, cfg.minibatch, rng);
    report.value_loss_r = vr;
    report.value_loss_c = vc;
    report.entropy =
        policy.actors.iter().map(|a| gaussian::entropy(a.log_std())).sum::<S>() / S::c(n as f64);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;
    use rand::{Rng, SeedableRng};

    fn joint_policy(seed: u64, n_agents: usize) -> (JointPolicy<f64>, JointOptimizers<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs_dims = vec![3; n_agents];
        let act_dims = vec![2; n_agents];
        let policy = JointPolicy::new(&obs_dims, &act_dims, &[8], Activation::Relu, &mut rng);
        let opt = JointOptimizers::new(&policy, 5e-4, 5e-4);
        (policy, opt)
    }

    fn joint_batch(seed: u64, policy: &JointPolicy<f64>, t: usize) -> JointBatch<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = policy.n_agents();
        let mut obs = vec![Vec::new(); n];
        let mut actions = vec![Vec::new(); n];
        let mut old_lp = vec![Vec::new(); n];
        let mut central = Vec::new();
        for _ in 0..t {
            let mut state = Vec::new();
            for i in 0..n {
                let o: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (a, lp) = policy.actors[i].sample(&o, &mut rng).unwrap();
                state.extend_from_slice(&o);
                obs[i].push(o);
                actions[i].push(a);
                old_lp[i].push(lp);
            }
            central.push(state);
        }
        JointBatch {
            obs,
            actions,
            old_log_probs: old_lp,
            central_states: central,
            adv_r: (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            adv_c: (0..n).map(|_| (0..t).map(|_| rng.gen_range(-0.5..0.5)).collect()).collect(),
            ret_r: vec![0.0; t],
            ret_c: vec![vec![0.0; t]; n],
            ep_cost: vec![30.0; n],
        }
    }

    #[test]
    fn zero_advantages_leave_policies_unchanged() {
        let (mut policy, mut opt) = joint_policy(0, 2);
        let mut batch = joint_batch(1, &policy, 12);
        batch.adv_r = vec![0.0; batch.len()];
        let before: Vec<_> = policy.actors.iter().map(|a| a.data.clone()).collect();
        mappo_update(
            &mut policy,
            &mut opt,
            &batch,
            &PpoConfig::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        for (actor, data) in policy.actors.iter().zip(&before) {
            assert_eq!(&actor.data, data);
        }
    }

    #[test]
    fn mappo_equals_independent_ppo_runs_per_agent() {
        let (mut policy, mut opt) = joint_policy(2, 2);
        let batch = joint_batch(3, &policy, 10);
        let cfg = PpoConfig::default();

        // independent per-agent updates on copies, consuming the rng the
        // same way the joint update does
        let mut expected = policy.actors.clone();
        let mut adams = opt.actors.clone();
        let mut ref_rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..2 {
            ppo_actor_update(
                &mut expected[i],
                &mut adams[i],
                &batch.obs[i],
                &batch.actions[i],
                &batch.old_log_probs[i],
                &batch.adv_r,
                cfg.clip,
                cfg.epochs,
                cfg.target_kl,
                cfg.minibatch,
                &mut ref_rng,
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        mappo_update(&mut policy, &mut opt, &batch, &cfg, &mut rng);
        assert_eq!(policy.actors, expected);
    }

    #[test]
    fn happo_factor_is_the_exponentiated_log_prob_difference() {
        let (mut policy, mut opt) = joint_policy(4, 2);
        let batch = joint_batch(5, &policy, 8);
        let cfg = PpoConfig::default();

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let before = policy.actors[0].clone();
        happo_update(&mut policy, &mut opt, &batch, &cfg, &mut rng);

        // recompute the factor contributed by agent 0 from scratch
        for t in 0..batch.len() {
            let new_lp =
                policy.actors[0].log_prob(&batch.obs[0][t], &batch.actions[0][t]).unwrap();
            let old_lp = before.log_prob(&batch.obs[0][t], &batch.actions[0][t]).unwrap();
            // behavior log-prob equals old actor's log-prob (same params)
            assert!((old_lp - batch.old_log_probs[0][t]).abs() < 1e-9);
            let m = (new_lp - batch.old_log_probs[0][t]).exp();
            assert!(m > 0.0);
        }
    }

    #[test]
    fn mappo_lag_collapses_to_mappo_at_lambda_zero() {
        let (mut p1, mut o1) = joint_policy(6, 2);
        let (mut p2, mut o2) = joint_policy(6, 2);
        let batch = joint_batch(7, &p1, 10);
        let cfg = PpoConfig::default();
        let mut mult = MultiplierState::sgd(0.0, 0.0, 25.0);
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        mappo_lag_update(&mut p1, &mut o1, &mut mult, &batch, &cfg, &mut r1);
        mappo_update(&mut p2, &mut o2, &batch, &cfg, &mut r2);
        assert_eq!(p1, p2);
    }

    #[test]
    fn mappo_lag_sgd_multiplier_follows_the_table_example() {
        let (mut policy, mut opt) = joint_policy(8, 2);
        let mut batch = joint_batch(9, &policy, 8);
        batch.ep_cost = vec![26.0, 26.0];
        let mut mult = MultiplierState::sgd(1e-5, 0.78, 25.0);
        let report = mappo_lag_update(
            &mut policy,
            &mut opt,
            &mut mult,
            &batch,
            &PpoConfig::default(),
            &mut ChaCha8Rng::seed_from_u64(4),
        );
        assert!((report.lambda.unwrap() - 0.78001).abs() < 1e-12);
    }

    #[test]
    fn macpo_steps_respect_per_agent_kl() {
        let (mut policy, mut opt) = joint_policy(10, 2);
        let batch = joint_batch(11, &policy, 16);
        let cfg = TrustRegionConfig::default();
        let before: Vec<_> = policy.actors.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let report = macpo_update(&mut policy, &mut opt, &batch, &cfg, 25.0, &mut rng);
        if report.step_accepted {
            for i in 0..2 {
                let old = crate::algos::old_dists(&before[i], &batch.obs[i]);
                let kl = crate::algos::mean_kl(&policy.actors[i], &batch.obs[i], &old);
                assert!(kl <= 1.5 * cfg.target_kl, "agent {i} kl {kl}");
            }
        }
    }
}

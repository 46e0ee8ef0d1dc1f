//! PPO-family updates: clipped surrogate with minibatch Adam and KL early
//! stopping, plus the Lagrangian and PID-Lagrangian variants.

use rand_chacha::ChaCha8Rng;

use super::batch::Batch;
use super::multiplier::{MultiplierState, PidState};
use super::policy_grad::{fit_critic, ppo_actor_update};
use super::{Optimizers, PpoConfig, UpdateReport};
use crate::nn::{entropy, PolicyParams};
use crate::scalar::Real;

/// Clipped-surrogate policy update plus critic regression.
pub fn ppo_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &PpoConfig<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    ppo_core(params, opt, batch, cfg, &batch.adv_r, rng)
}

/// Plain policy gradient: PPO with clipping disabled and a single epoch.
pub fn pg_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &PpoConfig<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let pg_cfg = PpoConfig { clip: None, epochs: 1, ..*cfg };
    ppo_core(params, opt, batch, &pg_cfg, &batch.adv_r, rng)
}

/// The Lagrangian mixture `(adv_r - lambda * adv_c) / (1 + lambda)`.
pub fn combined_advantage<S: Real>(adv_r: &[S], adv_c: &[S], lambda: S) -> Vec<S> {
    debug_assert_eq!(adv_r.len(), adv_c.len());
    let denom = S::one() + lambda;
    adv_r.iter().zip(adv_c).map(|(&r, &c)| (r - lambda * c) / denom).collect()
}

/// PPO on the Lagrangian advantage, then multiplier ascent on the batch's
/// mean episodic cost.
pub fn ppo_lag_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    multiplier: &mut MultiplierState<S>,
    batch: &Batch<S>,
    cfg: &PpoConfig<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let adv = combined_advantage(&batch.adv_r, &batch.adv_c, multiplier.lambda);
    let mut report = ppo_core(params, opt, batch, cfg, &adv, rng);
    multiplier.update(batch.ep_cost);
    report.lambda = Some(multiplier.lambda);
    report
}

/// PPO with the multiplier produced by a PID controller on the episodic
/// cost error; the controller output feeds the same advantage mixture.
pub fn cppo_pid_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    pid: &mut PidState<S>,
    batch: &Batch<S>,
    cfg: &PpoConfig<S>,
    cost_limit: S,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let (lambda, terms) = pid.update(batch.ep_cost, cost_limit);
    let adv = combined_advantage(&batch.adv_r, &batch.adv_c, lambda);
    let mut report = ppo_core(params, opt, batch, cfg, &adv, rng);
    report.lambda = Some(lambda);
    report.pid_terms = Some(terms);
    report
}

fn ppo_core<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &PpoConfig<S>,
    adv: &[S],
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let (policy_loss, kl, epochs_used, aborted) = ppo_actor_update(
        &mut params.actor,
        &mut opt.actor,
        &batch.obs,
        &batch.actions,
        &batch.old_log_probs,
        adv,
        cfg.clip,
        cfg.epochs,
        cfg.target_kl,
        cfg.minibatch,
        rng,
    );
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
        policy_loss,
        value_loss_r,
        value_loss_c,
        mean_kl: kl,
        entropy: entropy(params.actor.log_std()),
        epochs_used,
        aborted,
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algos::MultiplierOptimizer;
    use crate::nn::Activation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic_batch(seed: u64, params: &PolicyParams<f64>, n: usize) -> Batch<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs: Vec<Vec<f64>> =
            (0..n).map(|_| (0..params.obs_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut actions = Vec::new();
        let mut old_log_probs = Vec::new();
        for o in &obs {
            let (a, lp) = params.actor.sample(o, &mut rng).unwrap();
            actions.push(a);
            old_log_probs.push(lp);
        }
        let adv_r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let adv_c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let ret_r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ret_c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        Batch {
            obs,
            actions,
            old_log_probs,
            adv_r,
            adv_c,
            ret_r,
            ret_c,
            ep_cost: 30.0,
            ep_reward: 5.0,
        }
    }

    fn fresh(seed: u64) -> (PolicyParams<f64>, Optimizers<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = PolicyParams::new(3, 2, &[8], Activation::Tanh, &mut rng);
        let opt = Optimizers::new(&params, 3e-4, 1e-3);
        (params, opt)
    }

    #[test]
    fn lambda_zero_reduces_ppo_lag_to_ppo() {
        let (mut p1, mut o1) = fresh(0);
        let (mut p2, mut o2) = fresh(0);
        assert_eq!(p1, p2);
        let batch = synthetic_batch(1, &p1, 16);
        let cfg = PpoConfig::default();

        let mut mult = MultiplierState::sgd(0.0, 0.0, 25.0);
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        ppo_lag_update(&mut p1, &mut o1, &mut mult, &batch, &cfg, &mut r1);
        ppo_update(&mut p2, &mut o2, &batch, &cfg, &mut r2);
        assert_eq!(p1, p2);
    }

    #[test]
    fn lambda_keeps_rising_under_violation() {
        let (mut params, mut opt) = fresh(2);
        let batch = synthetic_batch(3, &params, 8);
        let mut mult = MultiplierState::adam(0.001, 0.035, 25.0);
        let mut prev = mult.lambda;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let report = ppo_lag_update(
                &mut params,
                &mut opt,
                &mut mult,
                &batch,
                &PpoConfig::default(),
                &mut rng,
            );
            assert!(report.lambda.unwrap() > prev);
            prev = report.lambda.unwrap();
        }
        assert!(matches!(mult.optimizer, MultiplierOptimizer::Adam(_)));
    }

    #[test]
    fn combined_advantage_limits() {
        let adv_r = [1.0f64, -2.0];
        let adv_c = [0.5, 0.5];
        let same = combined_advantage(&adv_r, &adv_c, 0.0);
        assert_eq!(same, adv_r.to_vec());
        // large lambda: direction approaches pure cost descent
        let big = combined_advantage(&adv_r, &adv_c, 1e6);
        for (x, &c) in big.iter().zip(&adv_c) {
            assert!((x + c).abs() < 1e-4, "{x} vs {}", -c);
        }
    }

    #[test]
    fn pid_variant_reports_terms() {
        let (mut params, mut opt) = fresh(4);
        let batch = synthetic_batch(5, &params, 8);
        let mut pid = PidState::new(0.1, 0.01, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let report = cppo_pid_update(
            &mut params,
            &mut opt,
            &mut pid,
            &batch,
            &PpoConfig::default(),
            25.0,
            &mut rng,
        );
        // e = 5: lambda = 0.5 + 0.05 + 0.05
        assert!((report.lambda.unwrap() - 0.6).abs() < 1e-12);
        assert!(report.pid_terms.is_some());
    }

    #[test]
    fn pg_is_single_epoch() {
        let (mut params, mut opt) = fresh(6);
        let batch = synthetic_batch(7, &params, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = pg_update(&mut params, &mut opt, &batch, &PpoConfig::default(), &mut rng);
        assert_eq!(report.epochs_used, 1);
    }
}

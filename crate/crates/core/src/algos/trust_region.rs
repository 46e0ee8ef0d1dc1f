//! Natural-gradient and trust-region updates: NPG, TRPO, and their
//! Lagrangian variants (TRPO-Lag, RCPO).

use rand_chacha::ChaCha8Rng;

use super::batch::Batch;
use super::cg::conjugate_gradient;
use super::multiplier::MultiplierState;
use super::policy_grad::{
    fisher_vector_product, fit_critic, mean_kl, old_dists, surrogate_grad, surrogate_value,
};
use super::ppo::combined_advantage;
use super::{Optimizers, TrustRegionConfig, UpdateReport};
use crate::nn::{entropy, ActorNet, PolicyParams};
use crate::scalar::{axpy, dot, Real};

/// Outcome of one trust-region actor step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionOutcome<S: Real> {
    pub surrogate: S,
    pub kl: S,
    pub accepted: bool,
}

/// Natural-gradient step on `mean(rho * adv)`: solve `H x = g`, scale to
/// the KL radius, and either apply it directly (NPG) or backtrack until the
/// surrogate improves within the radius (TRPO).
pub fn trust_region_actor_step<S: Real>(
    actor: &mut ActorNet<S>,
    obs: &[Vec<S>],
    actions: &[Vec<S>],
    old_log_probs: &[S],
    adv: &[S],
    cfg: &TrustRegionConfig<S>,
    line_search: bool,
) -> TrustRegionOutcome<S> {
    cfg.validate();
    let old = old_dists(actor, obs);
    let (surr_old, g) = surrogate_grad(actor, obs, actions, old_log_probs, adv);
    if g.iter().all(|x| *x == S::zero()) {
        return TrustRegionOutcome { surrogate: surr_old, kl: S::zero(), accepted: true };
    }
    let matvec = |v: &[S]| fisher_vector_product(actor, obs, v, cfg.damping);
    let solve = conjugate_gradient(&matvec, &g, cfg.cg_iters, cfg.cg_tol);
    if solve.breakdown {
        return TrustRegionOutcome { surrogate: surr_old, kl: S::zero(), accepted: false };
    }
    let x = solve.x;
    let x_h_x = dot(&x, &matvec(&x));
    if x_h_x <= S::zero() || !x_h_x.is_finite() {
        return TrustRegionOutcome { surrogate: surr_old, kl: S::zero(), accepted: false };
    }
    let scale = (S::c(2.0) * cfg.target_kl / x_h_x).sqrt();
    let mut full_step = x;
    for s in full_step.iter_mut() {
        *s *= scale;
    }

    let base = actor.data.clone();
    if !line_search {
        axpy(&mut actor.data, S::one(), &full_step);
        let kl = mean_kl(actor, obs, &old);
        let surrogate = surrogate_value(actor, obs, actions, old_log_probs, adv);
        return TrustRegionOutcome { surrogate, kl, accepted: true };
    }

    let mut frac = S::one();
    for _ in 0..cfg.backtrack_steps {
        actor.data.copy_from_slice(&base);
        axpy(&mut actor.data, frac, &full_step);
        let kl = mean_kl(actor, obs, &old);
        let surrogate = surrogate_value(actor, obs, actions, old_log_probs, adv);
        if kl <= cfg.target_kl && surrogate > surr_old {
            return TrustRegionOutcome { surrogate, kl, accepted: true };
        }
        frac *= cfg.step_fraction;
    }
    actor.data.copy_from_slice(&base);
    TrustRegionOutcome { surrogate: surr_old, kl: S::zero(), accepted: false }
}

/// NPG (`line_search = false`) or TRPO (`line_search = true`) on the given
/// advantages, plus critic regression.
pub fn npg_or_trpo_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &TrustRegionConfig<S>,
    line_search: bool,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    update_with_advantages(params, opt, batch, cfg, line_search, &batch.adv_r, rng)
}

/// TRPO on the rescaled Lagrangian advantage, then multiplier ascent.
pub fn trpo_lag_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    multiplier: &mut MultiplierState<S>,
    batch: &Batch<S>,
    cfg: &TrustRegionConfig<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let adv = combined_advantage(&batch.adv_r, &batch.adv_c, multiplier.lambda);
    let mut report = update_with_advantages(params, opt, batch, cfg, true, &adv, rng);
    multiplier.update(batch.ep_cost);
    report.lambda = Some(multiplier.lambda);
    report
}

/// NPG on the penalized advantage `adv_r - lambda * adv_c`, then
/// multiplier ascent.
pub fn rcpo_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    multiplier: &mut MultiplierState<S>,
    batch: &Batch<S>,
    cfg: &TrustRegionConfig<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let lambda = multiplier.lambda;
    let adv: Vec<S> =
        batch.adv_r.iter().zip(&batch.adv_c).map(|(&r, &c)| r - lambda * c).collect();
    let mut report = update_with_advantages(params, opt, batch, cfg, false, &adv, rng);
    multiplier.update(batch.ep_cost);
    report.lambda = Some(multiplier.lambda);
    report
}

fn update_with_advantages<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &TrustRegionConfig<S>,
    line_search: bool,
    adv: &[S],
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let outcome = trust_region_actor_step(
        &mut params.actor,
        &batch.obs,
        &batch.actions,
        &batch.old_log_probs,
        adv,
        cfg,
        line_search,
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
        policy_loss: -outcome.surrogate,
        value_loss_r,
        value_loss_c,
        mean_kl: outcome.kl,
        entropy: entropy(params.actor.log_std()),
        epochs_used: 1,
        step_accepted: outcome.accepted,
        ..Default::default()
    }
}

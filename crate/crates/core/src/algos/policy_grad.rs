//! Shared gradient machinery over a batch: surrogate objectives and their
//! exact gradients, mean KL measurements, Fisher-vector products, the PPO
//! clip loss, and critic regression. Every multi-sample quantity is a mean
//! over the batch.

use rand_chacha::ChaCha8Rng;

use crate::nn::{gaussian, ActorNet, AdamState, MlpCache, ValueNet};
use crate::scalar::{all_finite, axpy, Real};

/// Frozen behavior-policy statistics at update start.
#[derive(Debug, Clone)]
pub struct OldDists<S: Real> {
    pub means: Vec<Vec<S>>,
    pub log_std: Vec<S>,
}

pub fn old_dists<S: Real>(actor: &ActorNet<S>, obs: &[Vec<S>]) -> OldDists<S> {
    let means = obs.iter().map(|o| actor.mean(o).expect("obs dim mismatch")).collect();
    OldDists { means, log_std: actor.log_std().to_vec() }
}

/// Mean KL(old || new) over the batch states.
pub fn mean_kl<S: Real>(actor: &ActorNet<S>, obs: &[Vec<S>], old: &OldDists<S>) -> S {
    let mut total = S::zero();
    for (o, old_mean) in obs.iter().zip(&old.means) {
        let mean = actor.mean(o).expect("obs dim mismatch");
        total += gaussian::kl_divergence(old_mean, &old.log_std, &mean, actor.log_std());
    }
    total / S::c(obs.len() as f64)
}

/// Value of the importance-weighted surrogate `mean(rho * adv)` at the
/// current actor, with ratios against the stored behavior log-probs.
pub fn surrogate_value<S: Real>(
    actor: &ActorNet<S>,
    obs: &[Vec<S>],
    actions: &[Vec<S>],
    old_log_probs: &[S],
    adv: &[S],
) -> S {
    let mut total = S::zero();
    for i in 0..obs.len() {
        let lp = actor.log_prob(&obs[i], &actions[i]).expect("obs dim mismatch");
        total += (lp - old_log_probs[i]).exp() * adv[i];
    }
    total / S::c(obs.len() as f64)
}

/// Gradient of the surrogate at the current actor. At the behavior policy
/// this reduces to `mean(adv * grad log pi)`.
pub fn surrogate_grad<S: Real>(
    actor: &ActorNet<S>,
    obs: &[Vec<S>],
    actions: &[Vec<S>],
    old_log_probs: &[S],
    adv: &[S],
) -> (S, Vec<S>) {
    let n = obs.len();
    let inv_n = S::one() / S::c(n as f64);
    let mut grad = vec![S::zero(); actor.n_params()];
    let mut value = S::zero();
    let mut cache = MlpCache::default();
    for i in 0..n {
        actor.forward_cached(&obs[i], &mut cache).expect("obs dim mismatch");
        let mean = cache.output().to_vec();
        let lp = gaussian::log_prob(&mean, actor.log_std(), &actions[i]);
        let rho = (lp - old_log_probs[i]).exp();
        value += rho * adv[i];
        let (mut d_mean, mut d_ls) = gaussian::log_prob_grad(&mean, actor.log_std(), &actions[i]);
        let w = rho * adv[i] * inv_n;
        for d in d_mean.iter_mut() {
            *d *= w;
        }
        for d in d_ls.iter_mut() {
            *d *= w;
        }
        actor.backward_into(&cache, &d_mean, &d_ls, &mut grad);
    }
    (value * inv_n, grad)
}

/// Exact Hessian-vector product of the mean KL(old || new) at the current
/// parameters, computed by forward-over-reverse differentiation through the
/// Gaussian heads, plus `damping * v`.
pub fn fisher_vector_product<S: Real>(
    actor: &ActorNet<S>,
    obs: &[Vec<S>],
    v: &[S],
    damping: S,
) -> Vec<S> {
    let n = obs.len();
    let inv_n = S::one() / S::c(n as f64);
    let log_std = actor.log_std().to_vec();
    let inv_var: Vec<S> = log_std.iter().map(|&ls| (S::c(-2.0) * ls).exp()).collect();
    let mut out = vec![S::zero(); actor.n_params()];
    let mut cache = MlpCache::default();
    for o in obs {
        actor.forward_cached(o, &mut cache).expect("obs dim mismatch");
        let (jvp_mean, jvp_ls) = actor.jvp(&cache, v);
        // Gauss-Newton cotangents: d2KL/dmean2 = 1/sigma^2, d2KL/dlogstd2 = 2
        let cot_mean: Vec<S> =
            jvp_mean.iter().zip(&inv_var).map(|(&j, &iv)| j * iv * inv_n).collect();
        let cot_ls: Vec<S> = jvp_ls.iter().map(|&j| S::c(2.0) * j * inv_n).collect();
        actor.backward_into(&cache, &cot_mean, &cot_ls, &mut out);
    }
    axpy(&mut out, damping, v);
    out
}

/// PPO clip loss `-mean(min(rho * adv, clip(rho) * adv))` and its gradient.
/// With `clip = None` this is the plain policy-gradient surrogate loss.
pub fn clip_loss_grad<S: Real>(
    actor: &ActorNet<S>,
    obs: &[Vec<S>],
    actions: &[Vec<S>],
    old_log_probs: &[S],
    adv: &[S],
    clip: Option<S>,
) -> (S, Vec<S>) {
    let idx: Vec<usize> = (0..obs.len()).collect();
    clip_loss_grad_at(actor, obs, actions, old_log_probs, adv, clip, &idx)
}

/// [`clip_loss_grad`] restricted to the samples in `idx` (one minibatch).
pub fn clip_loss_grad_at<S: Real>(
    actor: &ActorNet<S>,
    obs: &[Vec<S>],
    actions: &[Vec<S>],
    old_log_probs: &[S],
    adv: &[S],
    clip: Option<S>,
    idx: &[usize],
) -> (S, Vec<S>) {
    let inv_n = S::one() / S::c(idx.len() as f64);
    let mut grad = vec![S::zero(); actor.n_params()];
    let mut loss = S::zero();
    let mut cache = MlpCache::default();
    for &i in idx {
        actor.forward_cached(&obs[i], &mut cache).expect("obs dim mismatch");
        let mean = cache.output().to_vec();
        let lp = gaussian::log_prob(&mean, actor.log_std(), &actions[i]);
        let rho = (lp - old_log_probs[i]).exp();
        let a = adv[i];

        let (objective, active) = match clip {
            None => (rho * a, true),
            Some(eps) => {
                let clipped_rho = rho.max(S::one() - eps).min(S::one() + eps);
                let unclipped = rho * a;
                let clipped = clipped_rho * a;
                if unclipped <= clipped {
                    (unclipped, true)
                } else {
                    // clipped branch active; gradient is zero outside the band
                    (clipped, rho >= S::one() - eps && rho <= S::one() + eps)
                }
            }
        };
        loss -= objective * inv_n;
        if active {
            let (mut d_mean, mut d_ls) =
                gaussian::log_prob_grad(&mean, actor.log_std(), &actions[i]);
            let w = -a * rho * inv_n;
            for d in d_mean.iter_mut() {
                *d *= w;
            }
            for d in d_ls.iter_mut() {
                *d *= w;
            }
            actor.backward_into(&cache, &d_mean, &d_ls, &mut grad);
        }
    }
    (loss, grad)
}

/// Deterministically shuffled minibatch index blocks for one epoch.
pub fn minibatch_plan(n: usize, minibatch: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    let size = minibatch.max(1).min(n);
    if size < n {
        idx.shuffle(rng);
    }
    idx.chunks(size).map(|c| c.to_vec()).collect()
}

/// Iterated minibatch-Adam PPO actor update with KL early stopping after
/// each epoch. Returns (final loss, measured KL, epochs used, aborted).
#[allow(clippy::too_many_arguments)]
pub fn ppo_actor_update<S: Real>(
    actor: &mut ActorNet<S>,
    adam: &mut AdamState<S>,
    obs: &[Vec<S>],
    actions: &[Vec<S>],
    old_log_probs: &[S],
    adv: &[S],
    clip: Option<S>,
    epochs: usize,
    target_kl: S,
    minibatch: usize,
    rng: &mut ChaCha8Rng,
) -> (S, S, usize, bool) {
    let snapshot = actor.data.clone();
    let old = old_dists(actor, obs);
    let mut loss = S::zero();
    let mut kl = S::zero();
    let mut used = 0;
    for _ in 0..epochs {
        for idx in minibatch_plan(obs.len(), minibatch, rng) {
            let (l, grad) =
                clip_loss_grad_at(actor, obs, actions, old_log_probs, adv, clip, &idx);
            if !l.is_finite() || !all_finite(&grad) {
                actor.data.copy_from_slice(&snapshot);
                return (l, kl, used, true);
            }
            adam.apply(&mut actor.data, &grad);
            loss = l;
        }
        used += 1;
        kl = mean_kl(actor, obs, &old);
        if kl > target_kl {
            break;
        }
    }
    (loss, kl, used, false)
}

/// Mean-squared-error regression of a critic onto targets with minibatch
/// Adam. Returns the final full-batch loss.
pub fn fit_critic<S: Real>(
    critic: &mut ValueNet<S>,
    adam: &mut AdamState<S>,
    obs: &[Vec<S>],
    targets: &[S],
    epochs: usize,
    minibatch: usize,
    rng: &mut ChaCha8Rng,
) -> S {
    let n = obs.len();
    let mut cache = MlpCache::default();
    for _ in 0..epochs {
        for idx in minibatch_plan(n, minibatch, rng) {
            let inv_m = S::one() / S::c(idx.len() as f64);
            let mut grad = vec![S::zero(); critic.n_params()];
            for &i in &idx {
                critic.spec.forward_cached(&critic.data, &obs[i], &mut cache).expect("obs dim");
                let v = cache.output()[0];
                let err = v - targets[i];
                let d_out = [S::c(2.0) * err * inv_m];
                critic.spec.backward(&critic.data, &cache, &d_out, &mut grad);
            }
            if !all_finite(&grad) {
                return S::nan();
            }
            adam.apply(&mut critic.data, &grad);
        }
    }
    // report the final full-batch loss
    let inv_n = S::one() / S::c(n as f64);
    let mut loss = S::zero();
    for i in 0..n {
        let v = critic.value(&obs[i]).expect("obs dim");
        let err = v - targets[i];
        loss += err * err * inv_n;
    }
    loss
}

//! Diagonal-Gaussian distribution math: sampling, log-densities, closed-form
//! KL divergence, entropy, and the derivative formulas the policy losses
//! feed into MLP backward passes.

use crate::scalar::Real;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn half_ln_two_pi<S: Real>() -> S {
    S::c(0.5 * (2.0 * std::f64::consts::PI).ln())
}

/// Draw `action = mean + exp(log_std) * z` and return its log-probability.
pub fn sample<S: Real>(mean: &[S], log_std: &[S], rng: &mut ChaCha8Rng) -> (Vec<S>, S) {
    debug_assert_eq!(mean.len(), log_std.len());
    let action: Vec<S> = mean
        .iter()
        .zip(log_std)
        .map(|(&m, &ls)| m + ls.exp() * S::c(rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let lp = log_prob(mean, log_std, &action);
    (action, lp)
}

/// Sum over dimensions of the diagonal-Gaussian log-density.
pub fn log_prob<S: Real>(mean: &[S], log_std: &[S], action: &[S]) -> S {
    debug_assert_eq!(mean.len(), action.len());
    let half = S::c(0.5);
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((&m, &ls), &a)| {
            let z = (a - m) / ls.exp();
            -half * z * z - ls - half_ln_two_pi::<S>()
        })
        .sum()
}

/// Gradient of `log_prob` with respect to (mean, log_std).
pub fn log_prob_grad<S: Real>(
    mean: &[S],
    log_std: &[S],
    action: &[S],
) -> (Vec<S>, Vec<S>) {
    let mut d_mean = Vec::with_capacity(mean.len());
    let mut d_log_std = Vec::with_capacity(mean.len());
    for ((&m, &ls), &a) in mean.iter().zip(log_std).zip(action) {
        let inv_var = (S::c(-2.0) * ls).exp();
        let diff = a - m;
        d_mean.push(diff * inv_var);
        d_log_std.push(diff * diff * inv_var - S::one());
    }
    (d_mean, d_log_std)
}

/// Closed-form KL(p || q) between diagonal Gaussians, summed over dims.
pub fn kl_divergence<S: Real>(
    mean_p: &[S],
    log_std_p: &[S],
    mean_q: &[S],
    log_std_q: &[S],
) -> S {
    debug_assert_eq!(mean_p.len(), mean_q.len());
    let half = S::c(0.5);
    mean_p
        .iter()
        .zip(log_std_p)
        .zip(mean_q.iter().zip(log_std_q))
        .map(|((&mp, &lp), (&mq, &lq))| {
            let var_p = (S::c(2.0) * lp).exp();
            let inv_var_q = (S::c(-2.0) * lq).exp();
            let diff = mp - mq;
            lq - lp + half * (var_p + diff * diff) * inv_var_q - half
        })
        .sum()
}

/// d KL(p_old || q) / d(mean_q, log_std_q): gradient with respect to the new
/// distribution when the trust region measures KL(old || new).
pub fn kl_grad_new_given_old<S: Real>(
    mean_old: &[S],
    log_std_old: &[S],
    mean_new: &[S],
    log_std_new: &[S],
) -> (Vec<S>, Vec<S>) {
    let mut d_mean = Vec::with_capacity(mean_old.len());
    let mut d_ls = Vec::with_capacity(mean_old.len());
    for ((&mp, &lp), (&mq, &lq)) in
        mean_old.iter().zip(log_std_old).zip(mean_new.iter().zip(log_std_new))
    {
        let var_p = (S::c(2.0) * lp).exp();
        let inv_var_q = (S::c(-2.0) * lq).exp();
        let diff = mq - mp;
        d_mean.push(diff * inv_var_q);
        d_ls.push(S::one() - (var_p + diff * diff) * inv_var_q);
    }
    (d_mean, d_ls)
}

/// d KL(p || q_old) / d(mean_p, log_std_p): gradient with respect to the new
/// distribution when the loss measures KL(new || old).
pub fn kl_grad_old_given_new<S: Real>(
    mean_new: &[S],
    log_std_new: &[S],
    mean_old: &[S],
    log_std_old: &[S],
) -> (Vec<S>, Vec<S>) {
    let mut d_mean = Vec::with_capacity(mean_new.len());
    let mut d_ls = Vec::with_capacity(mean_new.len());
    for ((&mp, &lp), (&mq, &lq)) in
        mean_new.iter().zip(log_std_new).zip(mean_old.iter().zip(log_std_old))
    {
        let var_p = (S::c(2.0) * lp).exp();
        let inv_var_q = (S::c(-2.0) * lq).exp();
        let diff = mp - mq;
        d_mean.push(diff * inv_var_q);
        d_ls.push(var_p * inv_var_q - S::one());
    }
    (d_mean, d_ls)
}

/// Differential entropy of the diagonal Gaussian.
pub fn entropy<S: Real>(log_std: &[S]) -> S {
    let half_ln_2pi_e = S::c(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln());
    log_std.iter().map(|&ls| ls + half_ln_2pi_e).sum()
}

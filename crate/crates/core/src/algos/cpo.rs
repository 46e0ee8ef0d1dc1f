//! Constrained policy optimization: the trust-region subproblem with a
//! linearized cost constraint, solved through its two-variable dual, plus
//! the projection-based variant.
//!
//! Subproblem: maximize g's subject to (1/2) s'Hs <= delta and a's + c <= 0.
//! With H-inverse inner products q = g'H^-1 g, r = a'H^-1 g, s = a'H^-1 a,
//! the dual over (lambda, nu) splits into the nu = 0 branch with optimum
//! sqrt(q / (2 delta)) and the nu > 0 branch with optimum sqrt(A / B),
//! A = q - r^2/s, B = 2 delta - c^2/s, each projected onto its validity
//! interval. Infeasible instances (c > 0 and B < 0) take the recovery step
//! that purely decreases cost at the KL radius.

use rand_chacha::ChaCha8Rng;

use super::batch::Batch;
use super::cg::conjugate_gradient;
use super::policy_grad::{
    fisher_vector_product, fit_critic, mean_kl, old_dists, surrogate_grad, surrogate_value,
};
use super::{CpoReport, Optimizers, TrustRegionConfig, UpdateReport};
use crate::nn::{entropy, ActorNet, PolicyParams};
use crate::scalar::{axpy, dot, norm, Real};

const TINY: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpoCase {
    /// Constraint inactive within the trust region: plain TRPO step.
    Slack,
    /// Both constraints engaged through the dual.
    Feasible,
    /// No feasible point in the trust region: recovery step.
    Infeasible,
    /// Vanishing cost gradient; constraint ignored this step.
    DegenerateCostGradient,
}

/// Solution of the constrained quadratic subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct CpoStep<S: Real> {
    pub direction: Vec<S>,
    pub nu: S,
    pub lam: S,
    pub case: CpoCase,
    /// g' H^-1 g
    pub q: S,
    /// a' H^-1 g
    pub r: S,
    /// a' H^-1 a
    pub s: S,
}

/// Solve the CPO subproblem through its dual. Returns `None` when conjugate
/// gradient hits a breakdown (non-positive curvature).
pub fn solve_cpo_subproblem<S: Real, F: Fn(&[S]) -> Vec<S>>(
    matvec: F,
    g: &[S],
    a: &[S],
    c: S,
    delta: S,
    cg_iters: usize,
    cg_tol: S,
) -> Option<CpoStep<S>> {
    let g_solve = conjugate_gradient(&matvec, g, cg_iters, cg_tol);
    if g_solve.breakdown {
        return None;
    }
    let h_inv_g = g_solve.x;
    let q = dot(g, &h_inv_g);
    let two_delta = S::c(2.0) * delta;

    // Vanishing cost gradient: fall back to an unconstrained step.
    if norm(a) < S::c(TINY) {
        let lam = (q / two_delta).sqrt().max(S::c(TINY));
        let mut direction = h_inv_g;
        let scale = S::one() / lam;
        for d in direction.iter_mut() {
            *d *= scale;
        }
        let case =
            if c > S::zero() { CpoCase::DegenerateCostGradient } else { CpoCase::Slack };
        return Some(CpoStep { direction, nu: S::zero(), lam, case, q, r: S::zero(), s: S::zero() });
    }

    let a_solve = conjugate_gradient(&matvec, a, cg_iters, cg_tol);
    if a_solve.breakdown {
        return None;
    }
    let h_inv_a = a_solve.x;
    let r = dot(a, &h_inv_g);
    let s = dot(a, &h_inv_a).max(S::c(TINY));
    let cap_a = (q - r * r / s).max(S::zero());
    let cap_b = two_delta - c * c / s;

    if c > S::zero() && cap_b < S::zero() {
        // Infeasible: pure cost decrease at the KL radius.
        let mut direction = h_inv_a;
        let scale = -(two_delta / s).sqrt();
        for d in direction.iter_mut() {
            *d *= scale;
        }
        return Some(CpoStep {
            direction,
            nu: S::zero(),
            lam: S::zero(),
            case: CpoCase::Infeasible,
            q,
            r,
            s,
        });
    }
    if c < S::zero() && cap_b < S::zero() {
        // The whole trust region is feasible: TRPO step.
        let lam = (q / two_delta).sqrt().max(S::c(TINY));
        let mut direction = h_inv_g;
        let scale = S::one() / lam;
        for d in direction.iter_mut() {
            *d *= scale;
        }
        return Some(CpoStep { direction, nu: S::zero(), lam, case: CpoCase::Slack, q, r, s });
    }

    // Validity intervals of the two dual branches over lambda >= 0:
    // branch A requires lambda * c + r <= 0, branch B the opposite.
    let inf = S::infinity();
    let (a_lo, a_hi, b_lo, b_hi) = if c > S::c(TINY) {
        let t = (-r / c).max(S::zero());
        (S::zero(), t, t, inf)
    } else if c < -S::c(TINY) {
        let t = (-r / c).max(S::zero());
        (t, inf, S::zero(), t)
    } else if r > S::zero() {
        (S::zero(), -S::one(), S::zero(), inf) // branch A empty
    } else {
        (S::zero(), inf, S::zero(), -S::one()) // branch B empty
    };

    let clamp = |x: S, lo: S, hi: S| x.max(lo).min(hi);
    let dual_a = |lam: S| q / (S::c(2.0) * lam) + lam * delta;
    let dual_b = |lam: S| {
        cap_a / (S::c(2.0) * lam) + lam * cap_b * S::c(0.5) - c * r / s
    };

    let mut best: Option<(S, S)> = None; // (dual value, lambda)
    if a_lo <= a_hi {
        let lam = clamp((q / two_delta).sqrt(), a_lo, a_hi).max(S::c(TINY));
        let val = dual_a(lam);
        best = Some((val, lam));
    }
    if b_lo <= b_hi {
        let lam_b0 = if cap_b > S::c(TINY) { (cap_a / cap_b).sqrt() } else { inf };
        let lam = clamp(lam_b0, b_lo, b_hi);
        let lam = if lam.is_finite() { lam.max(S::c(TINY)) } else { S::c(1e10) };
        let val = dual_b(lam);
        if best.map_or(true, |(v, _)| val < v) {
            best = Some((val, lam));
        }
    }
    let (_, lam) = best.expect("at least one dual branch is valid");
    let nu = ((lam * c + r) / s).max(S::zero());

    let mut direction = vec![S::zero(); g.len()];
    axpy(&mut direction, S::one() / lam, &h_inv_g);
    axpy(&mut direction, -nu / lam, &h_inv_a);
    Some(CpoStep { direction, nu, lam, case: CpoCase::Feasible, q, r, s })
}

/// One CPO actor step: dual solve plus a backtracking line search that
/// enforces the KL radius and forbids the cost surrogate from worsening
/// (beyond the available slack). The reward-improvement requirement is
/// waived on recovery steps.
#[allow(clippy::too_many_arguments)]
pub fn cpo_actor_step<S: Real>(
    actor: &mut ActorNet<S>,
    obs: &[Vec<S>],
    actions: &[Vec<S>],
    old_log_probs: &[S],
    adv_r: &[S],
    adv_c: &[S],
    constraint_slack: S,
    cfg: &TrustRegionConfig<S>,
) -> (bool, S, CpoReport<S>) {
    cfg.validate();
    let c = constraint_slack;
    let old = old_dists(actor, obs);
    let (surr_r_old, g) = surrogate_grad(actor, obs, actions, old_log_probs, adv_r);
    let (surr_c_old, a) = surrogate_grad(actor, obs, actions, old_log_probs, adv_c);

    let matvec = |v: &[S]| fisher_vector_product(actor, obs, v, cfg.damping);
    let step = match solve_cpo_subproblem(
        &matvec,
        &g,
        &a,
        c,
        cfg.target_kl,
        cfg.cg_iters,
        cfg.cg_tol,
    ) {
        Some(step) => step,
        None => {
            return (
                false,
                S::zero(),
                CpoReport {
                    q: S::zero(),
                    r: S::zero(),
                    nu_star: S::zero(),
                    lambda_star: S::zero(),
                    recovery: false,
                },
            )
        }
    };
    let recovery = step.case == CpoCase::Infeasible;
    let report = CpoReport {
        q: step.q,
        r: step.r,
        nu_star: step.nu,
        lambda_star: step.lam,
        recovery,
    };

    let base = actor.data.clone();
    let cost_budget = (-c).max(S::zero());
    let mut frac = S::one();
    for _ in 0..cfg.backtrack_steps {
        actor.data.copy_from_slice(&base);
        axpy(&mut actor.data, frac, &step.direction);
        let kl = mean_kl(actor, obs, &old);
        let surr_r = surrogate_value(actor, obs, actions, old_log_probs, adv_r);
        let surr_c = surrogate_value(actor, obs, actions, old_log_probs, adv_c);
        let kl_ok = kl <= cfg.target_kl;
        let cost_ok = surr_c - surr_c_old <= cost_budget;
        let reward_ok = recovery || surr_r > surr_r_old;
        if kl_ok && cost_ok && reward_ok {
            return (true, kl, report);
        }
        frac *= cfg.step_fraction;
    }
    actor.data.copy_from_slice(&base);
    (false, S::zero(), report)
}

/// Full CPO update: actor step plus critic regression.
pub fn cpo_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &TrustRegionConfig<S>,
    cost_limit: S,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let c = batch.ep_cost - cost_limit;
    let (accepted, kl, internals) = cpo_actor_step(
        &mut params.actor,
        &batch.obs,
        &batch.actions,
        &batch.old_log_probs,
        &batch.adv_r,
        &batch.adv_c,
        c,
        cfg,
    );
    finish_update(params, opt, batch, cfg, accepted, kl, internals, rng)
}

/// PCPO actor step: take the unconstrained trust-region step for the
/// reward, then project it onto the linearized constraint set in the
/// H-norm, with a line search enforcing the KL radius and cost budget.
#[allow(clippy::too_many_arguments)]
pub fn pcpo_actor_step<S: Real>(
    actor: &mut ActorNet<S>,
    obs: &[Vec<S>],
    actions: &[Vec<S>],
    old_log_probs: &[S],
    adv_r: &[S],
    adv_c: &[S],
    constraint_slack: S,
    cfg: &TrustRegionConfig<S>,
) -> (bool, S, CpoReport<S>) {
    cfg.validate();
    let c = constraint_slack;
    let old = old_dists(actor, obs);
    let (_, g) = surrogate_grad(actor, obs, actions, old_log_probs, adv_r);
    let (surr_c_old, a) = surrogate_grad(actor, obs, actions, old_log_probs, adv_c);

    // Degenerate cost gradient: identical path to CPO's fallback.
    if norm(&a) < S::c(TINY) {
        return cpo_actor_step(actor, obs, actions, old_log_probs, adv_r, adv_c, c, cfg);
    }

    let matvec = |v: &[S]| fisher_vector_product(actor, obs, v, cfg.damping);
    let g_solve = conjugate_gradient(&matvec, &g, cfg.cg_iters, cfg.cg_tol);
    let a_solve = conjugate_gradient(&matvec, &a, cfg.cg_iters, cfg.cg_tol);
    if g_solve.breakdown || a_solve.breakdown {
        let zero = CpoReport {
            q: S::zero(),
            r: S::zero(),
            nu_star: S::zero(),
            lambda_star: S::zero(),
            recovery: false,
        };
        return (false, S::zero(), zero);
    }
    let q = dot(&g, &g_solve.x);
    let r = dot(&a, &g_solve.x);
    let s = dot(&a, &a_solve.x).max(S::c(TINY));

    let two_delta = S::c(2.0) * cfg.target_kl;
    let scale = (two_delta / q.max(S::c(TINY))).sqrt();
    let mut direction: Vec<S> = g_solve.x.iter().map(|&x| x * scale).collect();

    // Project onto {s : a's + c <= 0} in the H-norm.
    let violation = dot(&a, &direction) + c;
    let nu = (violation / s).max(S::zero());
    if nu > S::zero() {
        axpy(&mut direction, -nu, &a_solve.x);
    }
    let report = CpoReport {
        q,
        r,
        nu_star: nu,
        lambda_star: (q / two_delta).sqrt(),
        recovery: false,
    };

    let base = actor.data.clone();
    let cost_budget = (-c).max(S::zero());
    let mut frac = S::one();
    for _ in 0..cfg.backtrack_steps {
        actor.data.copy_from_slice(&base);
        axpy(&mut actor.data, frac, &direction);
        let kl = mean_kl(actor, obs, &old);
        let surr_c = surrogate_value(actor, obs, actions, old_log_probs, adv_c);
        if kl <= cfg.target_kl && surr_c - surr_c_old <= cost_budget {
            return (true, kl, report);
        }
        frac *= cfg.step_fraction;
    }
    actor.data.copy_from_slice(&base);
    (false, S::zero(), report)
}

/// Full PCPO update: projected actor step plus critic regression.
pub fn pcpo_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &TrustRegionConfig<S>,
    cost_limit: S,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
    let c = batch.ep_cost - cost_limit;
    let (accepted, kl, internals) = pcpo_actor_step(
        &mut params.actor,
        &batch.obs,
        &batch.actions,
        &batch.old_log_probs,
        &batch.adv_r,
        &batch.adv_c,
        c,
        cfg,
    );
    finish_update(params, opt, batch, cfg, accepted, kl, internals, rng)
}

#[allow(clippy::too_many_arguments)]
fn finish_update<S: Real>(
    params: &mut PolicyParams<S>,
    opt: &mut Optimizers<S>,
    batch: &Batch<S>,
    cfg: &TrustRegionConfig<S>,
    accepted: bool,
    kl: S,
    internals: CpoReport<S>,
    rng: &mut ChaCha8Rng,
) -> UpdateReport<S> {
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
        policy_loss: S::zero(),
        value_loss_r,
        value_loss_c,
        mean_kl: kl,
        entropy: entropy(params.actor.log_std()),
        epochs_used: 1,
        step_accepted: accepted,
        cpo: Some(internals),
        ..Default::default()
    }
}

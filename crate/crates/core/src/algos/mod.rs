//! Single-agent constrained policy-optimization update rules: first-order
//! (PG, PPO, PPO-Lag, CPPO-PID, FOCOPS, CUP) and second-order (NPG, TRPO,
//! TRPO-Lag, RCPO, CPO, PCPO). Each update consumes one prepared batch.

mod batch;
mod cg;
mod cpo;
mod focops;
mod multiplier;
mod policy_grad;
mod ppo;
mod trust_region;

pub use batch::{center, prepare_batch, Batch};
pub use cg::{conjugate_gradient, CgResult};
pub use cpo::{
    cpo_actor_step, cpo_update, pcpo_actor_step, pcpo_update, solve_cpo_subproblem, CpoCase,
    CpoStep,
};
pub use focops::{cup_update, focops_update, CupConfig, FocopsConfig, NuState};
pub use multiplier::{MultiplierOptimizer, MultiplierState, PidState};
pub use policy_grad::{
    clip_loss_grad, clip_loss_grad_at, fisher_vector_product, fit_critic, mean_kl,
    minibatch_plan, old_dists, ppo_actor_update, surrogate_grad, surrogate_value, OldDists,
};
pub use ppo::{combined_advantage, cppo_pid_update, pg_update, ppo_lag_update, ppo_update};
pub use trust_region::{npg_or_trpo_update, rcpo_update, trpo_lag_update};

use crate::nn::{AdamState, PolicyParams};
use crate::scalar::Real;

/// Adam states for the actor and both critics.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizers<S: Real> {
    pub actor: AdamState<S>,
    pub critic_r: AdamState<S>,
    pub critic_c: AdamState<S>,
}

impl<S: Real> Optimizers<S> {
    pub fn new(params: &PolicyParams<S>, actor_lr: S, critic_lr: S) -> Self {
        Self {
            actor: AdamState::new(params.actor.n_params(), actor_lr),
            critic_r: AdamState::new(params.critic_r.n_params(), critic_lr),
            critic_c: AdamState::new(params.critic_c.n_params(), critic_lr),
        }
    }
}

/// First-order update settings (Appendix-style defaults live in the
/// harness config).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpoConfig<S: Real> {
    /// Clip coefficient; `None` disables clipping (plain policy gradient).
    pub clip: Option<S>,
    pub epochs: usize,
    pub target_kl: S,
    pub critic_epochs: usize,
    /// Minibatch size for the Adam passes.
    pub minibatch: usize,
}

impl<S: Real> Default for PpoConfig<S> {
    fn default() -> Self {
        Self {
            clip: Some(S::c(0.2)),
            epochs: 40,
            target_kl: S::c(0.02),
            critic_epochs: 40,
            minibatch: 64,
        }
    }
}

/// Second-order update settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionConfig<S: Real> {
    /// KL radius (delta).
    pub target_kl: S,
    pub cg_iters: usize,
    pub cg_tol: S,
    pub damping: S,
    pub backtrack_steps: usize,
    pub step_fraction: S,
    pub critic_epochs: usize,
    /// Minibatch size for the critic regression.
    pub minibatch: usize,
}

impl<S: Real> TrustRegionConfig<S> {
    pub fn validate(&self) {
        assert!(self.target_kl > S::zero(), "target KL must be positive");
        assert!(self.cg_iters >= 1, "need at least one CG iteration");
        assert!(
            self.step_fraction > S::zero() && self.step_fraction <= S::one(),
            "step fraction must lie in (0, 1]"
        );
    }
}

impl<S: Real> Default for TrustRegionConfig<S> {
    fn default() -> Self {
        Self {
            target_kl: S::c(0.01),
            cg_iters: 15,
            cg_tol: S::c(1e-8),
            damping: S::c(0.1),
            backtrack_steps: 15,
            step_fraction: S::c(0.8),
            critic_epochs: 10,
            minibatch: 64,
        }
    }
}

/// Dual internals logged by CPO-style updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpoReport<S: Real> {
    /// g^T H^-1 g
    pub q: S,
    /// g^T H^-1 b (b = cost gradient)
    pub r: S,
    pub nu_star: S,
    pub lambda_star: S,
    pub recovery: bool,
}

/// What one batch update did.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateReport<S: Real> {
    pub policy_loss: S,
    pub value_loss_r: S,
    pub value_loss_c: S,
    pub mean_kl: S,
    pub entropy: S,
    pub epochs_used: usize,
    /// Trust-region methods: whether the line search accepted a step.
    pub step_accepted: bool,
    /// Non-finite loss detected; parameters were left unchanged.
    pub aborted: bool,
    pub lambda: Option<S>,
    pub pid_terms: Option<[S; 3]>,
    pub nu: Option<S>,
    pub cpo: Option<CpoReport<S>>,
}

impl<S: Real> Default for UpdateReport<S> {
    fn default() -> Self {
        Self {
            policy_loss: S::zero(),
            value_loss_r: S::zero(),
            value_loss_c: S::zero(),
            mean_kl: S::zero(),
            entropy: S::zero(),
            epochs_used: 0,
            step_accepted: true,
            aborted: false,
            lambda: None,
            pid_terms: None,
            nu: None,
            cpo: None,
        }
    }
}

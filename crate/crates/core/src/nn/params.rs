//! Parameter bundles: Gaussian actor, scalar critics, and the flat-vector
//! view used by optimizers, trust-region steps and checkpoints.
//!
//! Flat ordering is part of the contract: `[actor MLP | log_std | reward
//! critic | cost critic]`, each MLP laid out layer by layer (row-major
//! weights, then biases).

use rand_chacha::ChaCha8Rng;

use super::{gaussian, Activation, MlpCache, MlpSpec, NnError};
use crate::scalar::Real;

pub const LOG_STD_INIT: f64 = -0.5;
const POLICY_OUTPUT_GAIN: f64 = 0.01;
const CRITIC_OUTPUT_GAIN: f64 = 1.0;

/// Gaussian actor: a mean MLP plus a state-independent `log_std` vector,
/// stored together as `[mlp params | log_std]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorNet<S: Real> {
    pub spec: MlpSpec,
    pub data: Vec<S>,
}

impl<S: Real> ActorNet<S> {
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        hidden: &[usize],
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut widths = vec![obs_dim];
        widths.extend_from_slice(hidden);
        widths.push(act_dim);
        let spec = MlpSpec::new(widths, activation);
        let mut data = spec.init_params(POLICY_OUTPUT_GAIN, rng);
        data.extend(std::iter::repeat(S::c(LOG_STD_INIT)).take(act_dim));
        Self { spec, data }
    }

    pub fn act_dim(&self) -> usize {
        self.spec.output_dim()
    }

    pub fn n_params(&self) -> usize {
        self.data.len()
    }

    pub fn mlp_params(&self) -> &[S] {
        &self.data[..self.spec.param_count()]
    }

    pub fn log_std(&self) -> &[S] {
        &self.data[self.spec.param_count()..]
    }

    /// Mean vector of the policy at `obs`.
    pub fn mean(&self, obs: &[S]) -> Result<Vec<S>, NnError> {
        self.spec.forward(self.mlp_params(), obs)
    }

    /// Sample an action with its log-probability.
    pub fn sample(&self, obs: &[S], rng: &mut ChaCha8Rng) -> Result<(Vec<S>, S), NnError> {
        let mean = self.mean(obs)?;
        Ok(gaussian::sample(&mean, self.log_std(), rng))
    }

    pub fn log_prob(&self, obs: &[S], action: &[S]) -> Result<S, NnError> {
        let mean = self.mean(obs)?;
        Ok(gaussian::log_prob(&mean, self.log_std(), action))
    }

    /// Cached forward pass through the mean MLP.
    pub fn forward_cached(&self, obs: &[S], cache: &mut MlpCache<S>) -> Result<(), NnError> {
        self.spec.forward_cached(self.mlp_params(), obs, cache)
    }

    /// Accumulate parameter gradients from per-sample head cotangents
    /// `(d mean, d log_std)` into `grad` (which uses this actor's layout).
    pub fn backward_into(
        &self,
        cache: &MlpCache<S>,
        d_mean: &[S],
        d_log_std: &[S],
        grad: &mut [S],
    ) {
        let split = self.spec.param_count();
        self.spec.backward(self.mlp_params(), cache, d_mean, &mut grad[..split]);
        for (g, &d) in grad[split..].iter_mut().zip(d_log_std) {
            *g += d;
        }
    }

    /// Directional derivative of `(mean(obs), log_std)` along `tangent`.
    pub fn jvp(&self, cache: &MlpCache<S>, tangent: &[S]) -> (Vec<S>, Vec<S>) {
        let split = self.spec.param_count();
        let d_mean = self.spec.jvp(self.mlp_params(), cache, &tangent[..split]);
        (d_mean, tangent[split..].to_vec())
    }
}

/// Scalar-output value network.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet<S: Real> {
    pub spec: MlpSpec,
    pub data: Vec<S>,
}

impl<S: Real> ValueNet<S> {
    pub fn new(
        obs_dim: usize,
        hidden: &[usize],
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut widths = vec![obs_dim];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let spec = MlpSpec::new(widths, activation);
        let data = spec.init_params(CRITIC_OUTPUT_GAIN, rng);
        Self { spec, data }
    }

    pub fn n_params(&self) -> usize {
        self.data.len()
    }

    pub fn value(&self, obs: &[S]) -> Result<S, NnError> {
        Ok(self.spec.forward(&self.data, obs)?[0])
    }
}

/// Actor plus reward and cost critics for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams<S: Real> {
    pub actor: ActorNet<S>,
    pub critic_r: ValueNet<S>,
    pub critic_c: ValueNet<S>,
}

impl<S: Real> PolicyParams<S> {
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        hidden: &[usize],
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        Self {
            actor: ActorNet::new(obs_dim, act_dim, hidden, activation, rng),
            critic_r: ValueNet::new(obs_dim, hidden, activation, rng),
            critic_c: ValueNet::new(obs_dim, hidden, activation, rng),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.spec.input_dim()
    }

    pub fn n_params(&self) -> usize {
        self.actor.n_params() + self.critic_r.n_params() + self.critic_c.n_params()
    }

    /// Flat view in the documented order.
    pub fn flatten(&self) -> Vec<S> {
        let mut flat = Vec::with_capacity(self.n_params());
        flat.extend_from_slice(&self.actor.data);
        flat.extend_from_slice(&self.critic_r.data);
        flat.extend_from_slice(&self.critic_c.data);
        flat
    }

    /// Restore from a flat vector; shapes (and thus offsets) come from
    /// `self`. Exact inverse of [`PolicyParams::flatten`].
    pub fn unflatten(&mut self, flat: &[S]) {
        assert_eq!(flat.len(), self.n_params(), "flat vector length mismatch");
        let a = self.actor.data.len();
        let r = self.critic_r.data.len();
        self.actor.data.copy_from_slice(&flat[..a]);
        self.critic_r.data.copy_from_slice(&flat[a..a + r]);
        self.critic_c.data.copy_from_slice(&flat[a + r..]);
    }
}

impl<S: Real> crate::cmdp::Agent<S> for PolicyParams<S> {
    fn act(&self, obs: &[S], rng: &mut ChaCha8Rng) -> (Vec<S>, S) {
        self.actor.sample(obs, rng).expect("obs dim mismatch")
    }

    fn values(&self, obs: &[S]) -> (S, S) {
        (
            self.critic_r.value(obs).expect("obs dim mismatch"),
            self.critic_c.value(obs).expect("obs dim mismatch"),
        )
    }
}

//! Minimal differentiable function approximation: multilayer perceptrons
//! with hand-rolled reverse-mode gradients and forward-mode directional
//! derivatives, diagonal-Gaussian heads, and the Adam optimizer.

mod adam;
mod checkpoint;
pub mod gaussian;
mod params;

pub use adam::AdamState;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError, TrainerExtras};
pub use gaussian::{
    entropy, kl_divergence, kl_grad_new_given_old, kl_grad_old_given_new, log_prob, log_prob_grad,
    sample,
};
pub use params::{ActorNet, PolicyParams, ValueNet};

use crate::scalar::Real;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("input has dimension {got}, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("loss evaluated to a non-finite value")]
    NonFiniteLoss,
}

/// Hidden-layer nonlinearity; the output layer is always linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply<S: Real>(self, x: S) -> S {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(S::zero()),
        }
    }

    /// Derivative expressed through the pre-activation value.
    fn derivative<S: Real>(self, pre: S) -> S {
        match self {
            Activation::Tanh => {
                let t = pre.tanh();
                S::one() - t * t
            }
            Activation::Relu => {
                if pre > S::zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
        }
    }
}

/// Fully-connected network shape: `widths[0]` inputs through `widths.last()`
/// outputs. Parameters are stored flat, layer by layer, row-major weights
/// followed by biases.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, activation: Activation) -> Self {
        assert!(widths.len() >= 2, "an MLP needs at least input and output widths");
        assert!(widths.iter().all(|&w| w >= 1), "layer widths must be positive");
        Self { widths, activation }
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    fn layer_offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        // (offset, in, out) per layer
        let mut offset = 0;
        self.widths.windows(2).map(move |w| {
            let entry = (offset, w[0], w[1]);
            offset += (w[0] + 1) * w[1];
            entry
        })
    }

    /// Deterministic forward pass.
    pub fn forward<S: Real>(&self, params: &[S], input: &[S]) -> Result<Vec<S>, NnError> {
        if input.len() != self.input_dim() {
            return Err(NnError::ShapeMismatch { expected: self.input_dim(), got: input.len() });
        }
        debug_assert_eq!(params.len(), self.param_count());
        let n_layers = self.n_layers();
        let mut act = input.to_vec();
        for (l, (offset, n_in, n_out)) in self.layer_offsets().enumerate() {
            let mut next = vec![S::zero(); n_out];
            affine(params, offset, n_in, n_out, &act, &mut next);
            if l + 1 < n_layers {
                for z in &mut next {
                    *z = self.activation.apply(*z);
                }
            }
            act = next;
        }
        Ok(act)
    }

    /// Forward pass that records pre-activations for a later backward pass.
    pub fn forward_cached<S: Real>(
        &self,
        params: &[S],
        input: &[S],
        cache: &mut MlpCache<S>,
    ) -> Result<(), NnError> {
        if input.len() != self.input_dim() {
            return Err(NnError::ShapeMismatch { expected: self.input_dim(), got: input.len() });
        }
        let n_layers = self.n_layers();
        cache.activations.resize(n_layers + 1, Vec::new());
        cache.pre_activations.resize(n_layers, Vec::new());
        cache.activations[0].clear();
        cache.activations[0].extend_from_slice(input);
        for (l, (offset, n_in, n_out)) in self.layer_offsets().enumerate() {
            let (done, rest) = cache.activations.split_at_mut(l + 1);
            let prev = &done[l];
            let pre = &mut cache.pre_activations[l];
            pre.clear();
            pre.resize(n_out, S::zero());
            affine(params, offset, n_in, n_out, prev, pre);
            let out = &mut rest[0];
            out.clear();
            if l + 1 < n_layers {
                out.extend(pre.iter().map(|&z| self.activation.apply(z)));
            } else {
                out.extend_from_slice(pre);
            }
        }
        Ok(())
    }

    /// Reverse-mode pass. `out_grad` is dL/d(output); parameter gradients
    /// are accumulated into `grad_acc` (same flat layout as `params`).
    pub fn backward<S: Real>(
        &self,
        params: &[S],
        cache: &MlpCache<S>,
        out_grad: &[S],
        grad_acc: &mut [S],
    ) {
        debug_assert_eq!(out_grad.len(), self.output_dim());
        debug_assert_eq!(grad_acc.len(), self.param_count());
        let layers: Vec<(usize, usize, usize)> = self.layer_offsets().collect();
        let n_layers = layers.len();
        let mut dz = out_grad.to_vec();
        for l in (0..n_layers).rev() {
            let (offset, n_in, n_out) = layers[l];
            if l + 1 < n_layers {
                // dz currently holds d(activation); fold in the derivative.
                for (d, &pre) in dz.iter_mut().zip(&cache.pre_activations[l]) {
                    *d = *d * self.activation.derivative(pre);
                }
            }
            let prev = &cache.activations[l];
            for o in 0..n_out {
                let row = offset + o * n_in;
                let g = dz[o];
                for (w, &p) in grad_acc[row..row + n_in].iter_mut().zip(prev) {
                    *w += g * p;
                }
                grad_acc[offset + n_out * n_in + o] += g;
            }
            if l > 0 {
                let mut dprev = vec![S::zero(); n_in];
                for o in 0..n_out {
                    let row = offset + o * n_in;
                    let g = dz[o];
                    for (dp, &w) in dprev.iter_mut().zip(&params[row..row + n_in]) {
                        *dp += g * w;
                    }
                }
                dz = dprev;
            }
        }
    }

    /// Forward-mode directional derivative of the outputs with respect to
    /// the parameters, along `tangent`. Requires a populated cache.
    pub fn jvp<S: Real>(&self, params: &[S], cache: &MlpCache<S>, tangent: &[S]) -> Vec<S> {
        debug_assert_eq!(tangent.len(), self.param_count());
        let n_layers = self.n_layers();
        let mut t_act: Vec<S> = vec![S::zero(); self.input_dim()];
        for (l, (offset, n_in, n_out)) in self.layer_offsets().enumerate() {
            let prev = &cache.activations[l];
            let mut t_pre = vec![S::zero(); n_out];
            // tangent weights and biases acting on the primal activations
            affine(tangent, offset, n_in, n_out, prev, &mut t_pre);
            // primal weights acting on the tangent activations
            for o in 0..n_out {
                let row = offset + o * n_in;
                let mut acc = S::zero();
                for (w, t) in params[row..row + n_in].iter().zip(&t_act) {
                    acc += *w * *t;
                }
                t_pre[o] += acc;
            }
            if l + 1 < n_layers {
                for (t, &pre) in t_pre.iter_mut().zip(&cache.pre_activations[l]) {
                    *t = *t * self.activation.derivative(pre);
                }
            }
            t_act = t_pre;
        }
        t_act
    }

    /// Orthogonally initialized parameters: hidden layers with gain
    /// `sqrt(2)`, output layer with `output_gain`, zero biases.
    pub fn init_params<S: Real>(&self, output_gain: f64, rng: &mut ChaCha8Rng) -> Vec<S> {
        let mut params = vec![S::zero(); self.param_count()];
        let n_layers = self.n_layers();
        for (l, (offset, n_in, n_out)) in self.layer_offsets().enumerate() {
            let gain = if l + 1 < n_layers { std::f64::consts::SQRT_2 } else { output_gain };
            let w = orthogonal(n_out, n_in, gain, rng);
            for (dst, src) in params[offset..offset + n_in * n_out].iter_mut().zip(w) {
                *dst = S::c(src);
            }
        }
        params
    }
}

/// z = W x + b for the layer stored at `offset`.
#[inline]
fn affine<S: Real>(params: &[S], offset: usize, n_in: usize, n_out: usize, x: &[S], z: &mut [S]) {
    let bias = offset + n_out * n_in;
    for o in 0..n_out {
        let row = offset + o * n_in;
        let mut acc = params[bias + o];
        for (w, v) in params[row..row + n_in].iter().zip(x) {
            acc += *w * *v;
        }
        z[o] = acc;
    }
}

/// Reusable buffers for cached forward passes.
#[derive(Debug, Clone, Default)]
pub struct MlpCache<S: Real> {
    pub activations: Vec<Vec<S>>,
    pub pre_activations: Vec<Vec<S>>,
}

impl<S: Real> MlpCache<S> {
    pub fn output(&self) -> &[S] {
        self.activations.last().expect("cache is empty")
    }
}

/// Row-major orthogonal matrix scaled by `gain`, via Gram-Schmidt on
/// Gaussian draws (on columns when rows outnumber columns).
fn orthogonal(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if rows <= cols {
        let q = gram_schmidt(rows, cols, rng);
        q.into_iter().map(|x| x * gain).collect()
    } else {
        // Orthonormalize the transpose and write it back transposed.
        let q = gram_schmidt(cols, rows, rng);
        let mut out = vec![0.0; rows * cols];
        for r in 0..cols {
            for c in 0..rows {
                out[c * cols + r] = q[r * rows + c] * gain;
            }
        }
        out
    }
}

fn gram_schmidt(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    debug_assert!(rows <= cols);
    loop {
        let mut m: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        let mut ok = true;
        for i in 0..rows {
            for j in 0..i {
                let dot: f64 =
                    (0..cols).map(|k| m[i * cols + k] * m[j * cols + k]).sum();
                for k in 0..cols {
                    m[i * cols + k] -= dot * m[j * cols + k];
                }
            }
            let norm: f64 = (0..cols).map(|k| m[i * cols + k].powi(2)).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for k in 0..cols {
                m[i * cols + k] /= norm;
            }
        }
        if ok {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn fd_grad<F: Fn(&[f64]) -> f64>(f: F, params: &[f64], h: f64) -> Vec<f64> {
        let mut g = vec![0.0; params.len()];
        let mut p = params.to_vec();
        for i in 0..p.len() {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            g[i] = (up - down) / (2.0 * h);
        }
        g
    }

    #[test]
    fn zero_params_give_zero_output() {
        let spec = MlpSpec::new(vec![3, 4, 2], Activation::Tanh);
        let params = vec![0.0f64; spec.param_count()];
        let out = spec.forward(&params, &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn constant_path_returns_output_bias() {
        // 1-1-1 net with zero hidden weight: output = output bias.
        let spec = MlpSpec::new(vec![1, 1, 1], Activation::Tanh);
        // layout: [w0, b0, w1, b1]
        let params = vec![0.0f64, 0.3, 5.0, -0.7];
        let out = spec.forward(&params, &[123.0]).unwrap();
        let expected = 5.0 * (0.3f64).tanh() - 0.7;
        assert!((out[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn forward_matches_explicit_matrix_multiply() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = MlpSpec::new(vec![3, 5, 2], Activation::Tanh);
        let params: Vec<f64> = spec.init_params(1.0, &mut rng);
        let x = [0.2, -0.4, 1.1];
        let got = spec.forward(&params, &x).unwrap();

        // Independent reimplementation with explicit indices.
        let w0 = &params[0..15];
        let b0 = &params[15..20];
        let w1 = &params[20..30];
        let b1 = &params[30..32];
        let mut h = [0.0f64; 5];
        for o in 0..5 {
            let mut acc = b0[o];
            for i in 0..3 {
                acc += w0[o * 3 + i] * x[i];
            }
            h[o] = acc.tanh();
        }
        let mut y = [0.0f64; 2];
        for o in 0..2 {
            let mut acc = b1[o];
            for i in 0..5 {
                acc += w1[o * 5 + i] * h[i];
            }
            y[o] = acc;
        }
        for (a, b) in got.iter().zip(y.iter()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn wrong_input_dim_is_an_error() {
        let spec = MlpSpec::new(vec![3, 2], Activation::Tanh);
        let params = vec![0.0f64; spec.param_count()];
        assert_eq!(
            spec.forward(&params, &[1.0]),
            Err(NnError::ShapeMismatch { expected: 3, got: 1 })
        );
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = MlpSpec::new(vec![4, 8, 8, 3], Activation::Tanh);
        let params: Vec<f64> = spec.init_params(0.7, &mut rng);
        let x = [0.3, -0.2, 0.9, -1.4];
        let w = [0.5, -1.25, 2.0]; // loss = w . y

        let loss = |p: &[f64]| -> f64 {
            let y = spec.forward(p, &x).unwrap();
            y.iter().zip(&w).map(|(a, b)| a * b).sum()
        };

        let mut cache = MlpCache::default();
        spec.forward_cached(&params, &x, &mut cache).unwrap();
        let mut grad = vec![0.0; spec.param_count()];
        spec.backward(&params, &cache, &w, &mut grad);

        let fd = fd_grad(loss, &params, 1e-5);
        for (a, f) in grad.iter().zip(&fd) {
            let scale = a.abs().max(f.abs()).max(1e-3);
            assert!((a - f).abs() / scale < 1e-6, "analytic {a} vs fd {f}");
        }
    }

    #[test]
    fn jvp_matches_directional_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = MlpSpec::new(vec![2, 6, 2], Activation::Tanh);
        let params: Vec<f64> = spec.init_params(1.0, &mut rng);
        let x = [0.4, -0.9];
        let v: Vec<f64> =
            (0..spec.param_count()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();

        let mut cache = MlpCache::default();
        spec.forward_cached(&params, &x, &mut cache).unwrap();
        let jvp = spec.jvp(&params, &cache, &v);

        let h = 1e-6;
        let mut plus = params.clone();
        let mut minus = params.clone();
        for i in 0..params.len() {
            plus[i] += h * v[i];
            minus[i] -= h * v[i];
        }
        let yp = spec.forward(&plus, &x).unwrap();
        let ym = spec.forward(&minus, &x).unwrap();
        for (j, (p, m)) in jvp.iter().zip(yp.iter().zip(ym.iter())) {
            let fd = (p - m) / (2.0 * h);
            assert!((j - fd).abs() < 1e-7, "jvp {j} vs fd {fd}");
        }
    }

    #[test]
    fn orthogonal_init_rows_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = orthogonal(4, 9, 1.0, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..9).map(|k| m[i * 9 + k] * m[j * 9 + k]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10);
            }
        }
        // tall case: columns orthonormal
        let m = orthogonal(9, 4, 1.0, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..9).map(|k| m[k * 4 + i] * m[k * 4 + j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10);
            }
        }
    }
}

//! Adam with standard bias correction.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<S: Real> {
    pub m: Vec<S>,
    pub v: Vec<S>,
    pub step: u64,
    pub lr: S,
    pub beta1: S,
    pub beta2: S,
    pub epsilon: S,
}

impl<S: Real> AdamState<S> {
    /// Defaults: beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    pub fn new(n_params: usize, lr: S) -> Self {
        Self {
            m: vec![S::zero(); n_params],
            v: vec![S::zero(); n_params],
            step: 0,
            lr,
            beta1: S::c(0.9),
            beta2: S::c(0.999),
            epsilon: S::c(1e-8),
        }
    }

    /// One descent step along `grad` (pass the gradient of the loss).
    pub fn apply(&mut self, params: &mut [S], grad: &[S]) {
        debug_assert_eq!(params.len(), self.m.len());
        debug_assert_eq!(params.len(), grad.len());
        self.step += 1;
        let t = S::c(self.step as f64);
        let bc1 = S::one() - self.beta1.powf(t);
        let bc2 = S::one() - self.beta2.powf(t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (S::one() - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (S::one() - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut adam = AdamState::new(3, 0.01f64);
        let mut params = vec![1.0, -2.0, 0.5];
        for _ in 0..10 {
            adam.apply(&mut params, &[0.0, 0.0, 0.0]);
        }
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_is_approximately_lr() {
        let mut adam = AdamState::new(1, 1e-3f64);
        let mut params = vec![0.0];
        adam.apply(&mut params, &[1.0]);
        // bias-corrected first step: lr * g / (|g| + eps) ~ lr
        assert!((params[0] + 1e-3).abs() < 1e-10, "got {}", params[0]);
    }

    #[test]
    fn first_step_is_gradient_scale_invariant() {
        let mut a = AdamState::new(1, 1e-3f64);
        let mut b = AdamState::new(1, 1e-3f64);
        let mut pa = vec![0.0];
        let mut pb = vec![0.0];
        a.apply(&mut pa, &[1e-4]);
        b.apply(&mut pb, &[1e4]);
        // equality up to the epsilon guard: lr * g / (|g| + eps)
        assert!((pa[0] - pb[0]).abs() < 1e-6, "{} vs {}", pa[0], pb[0]);
    }
}

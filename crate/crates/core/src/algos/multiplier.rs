//! Lagrange multiplier updates: plain SGD ascent, Adam ascent, and the
//! PID controller variant.

use crate::nn::AdamState;
use crate::scalar::Real;

/// How the scalar multiplier ascends on the violation.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierOptimizer<S: Real> {
    Sgd,
    Adam(AdamState<S>),
}

/// Learned Lagrange multiplier, projected to stay nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierState<S: Real> {
    pub lambda: S,
    pub cost_limit: S,
    pub lr: S,
    pub optimizer: MultiplierOptimizer<S>,
}

impl<S: Real> MultiplierState<S> {
    pub fn sgd(init: S, lr: S, cost_limit: S) -> Self {
        Self { lambda: init.max(S::zero()), cost_limit, lr, optimizer: MultiplierOptimizer::Sgd }
    }

    pub fn adam(init: S, lr: S, cost_limit: S) -> Self {
        Self {
            lambda: init.max(S::zero()),
            cost_limit,
            lr,
            optimizer: MultiplierOptimizer::Adam(AdamState::new(1, lr)),
        }
    }

    /// One ascent step on `lambda * (ep_cost - cost_limit)`, then the
    /// projection `lambda = max(0, lambda)`.
    pub fn update(&mut self, ep_cost: S) {
        debug_assert!(ep_cost.is_finite());
        let violation = ep_cost - self.cost_limit;
        match &mut self.optimizer {
            MultiplierOptimizer::Sgd => {
                self.lambda += self.lr * violation;
            }
            MultiplierOptimizer::Adam(adam) => {
                // minimizing -lambda * violation
                let mut lam = [self.lambda];
                adam.apply(&mut lam, &[-violation]);
                self.lambda = lam[0];
            }
        }
        if self.lambda < S::zero() {
            self.lambda = S::zero();
        }
    }
}

/// PID-controlled multiplier. The integral accumulator is projected at
/// zero, and the controller output is projected at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PidState<S: Real> {
    pub kp: S,
    pub ki: S,
    pub kd: S,
    pub integral: S,
    pub prev_error: S,
}

impl<S: Real> PidState<S> {
    pub fn new(kp: S, ki: S, kd: S) -> Self {
        Self { kp, ki, kd, integral: S::zero(), prev_error: S::zero() }
    }

    /// Feed one episodic-cost measurement; returns the multiplier and the
    /// (proportional, integral, derivative) contributions.
    pub fn update(&mut self, ep_cost: S, cost_limit: S) -> (S, [S; 3]) {
        let e = ep_cost - cost_limit;
        self.integral = (self.integral + e).max(S::zero());
        let p = self.kp * e;
        let i = self.ki * self.integral;
        let d = self.kd * (e - self.prev_error);
        self.prev_error = e;
        let lambda = (p + i + d).max(S::zero());
        (lambda, [p, i, d])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_one_multiply_add() {
        // lambda = 1e-5, lr = 0.78, Jc = 26, b = 25 -> 0.78001
        let mut m = MultiplierState::sgd(1e-5f64, 0.78, 25.0);
        m.update(26.0);
        assert!((m.lambda - 0.78001).abs() < 1e-12);
    }

    #[test]
    fn satisfied_constraint_keeps_lambda_at_zero() {
        let mut m = MultiplierState::sgd(0.0f64, 0.1, 25.0);
        for _ in 0..50 {
            m.update(10.0);
            assert_eq!(m.lambda, 0.0);
        }
        let mut m = MultiplierState::adam(0.0f64, 0.035, 25.0);
        for _ in 0..50 {
            m.update(10.0);
            assert_eq!(m.lambda, 0.0);
        }
    }

    #[test]
    fn adam_first_step_is_approximately_lr() {
        let mut m = MultiplierState::adam(0.001f64, 0.035, 25.0);
        m.update(30.0);
        assert!((m.lambda - 0.001 - 0.035).abs() < 1e-6, "lambda {}", m.lambda);
    }

    #[test]
    fn lambda_nondecreasing_under_constant_violation() {
        for adam in [false, true] {
            let mut m = if adam {
                MultiplierState::adam(0.001f64, 0.035, 25.0)
            } else {
                MultiplierState::sgd(0.001f64, 0.035, 25.0)
            };
            let mut prev = m.lambda;
            for _ in 0..100 {
                m.update(40.0);
                assert!(m.lambda >= prev);
                prev = m.lambda;
            }
        }
    }

    #[test]
    fn pid_first_call_and_integral_ramp() {
        let mut pid = PidState::new(0.1f64, 0.01, 0.01);
        let (lambda, terms) = pid.update(26.0, 25.0);
        // e = 1: 0.1 + 0.01 + 0.01
        assert!((lambda - 0.12).abs() < 1e-12);
        assert_eq!(terms[0], 0.1);

        // constant error: the derivative term drops out after the first
        // call, leaving the closed-form ramp kp * e + ki * k * e
        for k in 2..=20u32 {
            let (l, _) = pid.update(26.0, 25.0);
            assert!((l - (0.1 + 0.01 * f64::from(k))).abs() < 1e-12, "call {k}: {l}");
        }
    }

    #[test]
    fn pid_projects_at_zero_under_satisfaction() {
        let mut pid = PidState::new(0.1f64, 0.01, 0.01);
        for _ in 0..25 {
            let (lambda, _) = pid.update(20.0, 25.0);
            assert_eq!(lambda, 0.0);
        }
    }

    #[test]
    fn pid_pure_proportional_mode() {
        let mut pid = PidState::new(0.25f64, 0.0, 0.0);
        for e in [-3.0f64, 4.0, 10.0, -1.0] {
            let (lambda, _) = pid.update(25.0 + e, 25.0);
            assert_eq!(lambda, (0.25 * e).max(0.0));
        }
    }
}

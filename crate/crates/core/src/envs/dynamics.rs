//! Planar robot dynamics: the two-actuator Point robot, the differential
//! Car, and the force-controlled mass point used by the locomotion
//! surrogates. All integrators are semi-implicit Euler: velocities update
//! first, positions advance with the new velocity.

use crate::cmdp::EnvError;
use crate::scalar::Real;

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle<S: Real>(theta: S) -> S {
    let two_pi = S::c(2.0) * S::PI();
    let mut w = theta - two_pi * ((theta + S::PI()) / two_pi).floor();
    if w <= -S::PI() {
        w = S::PI();
    }
    w
}

/// Pose and speeds of the Point robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState<S: Real> {
    pub x: S,
    pub y: S,
    pub theta: S,
    pub v: S,
    pub omega: S,
}

impl<S: Real> PointState<S> {
    pub fn at_rest(x: S, y: S, theta: S) -> Self {
        Self { x, y, theta, v: S::zero(), omega: S::zero() }
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.v, self.omega].iter().all(|s| s.is_finite())
    }
}

/// Pose and wheel speeds of the differential-drive Car robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarState<S: Real> {
    pub x: S,
    pub y: S,
    pub theta: S,
    pub v_left: S,
    pub v_right: S,
}

impl<S: Real> CarState<S> {
    pub fn at_rest(x: S, y: S, theta: S) -> Self {
        Self { x, y, theta, v_left: S::zero(), v_right: S::zero() }
    }

    pub fn body_speed(&self) -> S {
        (self.v_left + self.v_right) * S::c(0.5)
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.v_left, self.v_right].iter().all(|s| s.is_finite())
    }
}

/// Position and velocity of a free mass point (1D or 2D).
#[derive(Debug, Clone, PartialEq)]
pub struct MassPointState<S: Real> {
    pub position: Vec<S>,
    pub velocity: Vec<S>,
}

impl<S: Real> MassPointState<S> {
    pub fn at_rest(dim: usize) -> Self {
        Self { position: vec![S::zero(); dim], velocity: vec![S::zero(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }
}

/// Force/torque coefficients shared by the robots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams<S: Real> {
    pub c_thrust: S,
    pub c_turn: S,
    pub c_wheel: S,
    pub c_force: S,
    pub k_drag: S,
    pub axle_width: S,
}

impl<S: Real> Default for DynamicsParams<S> {
    fn default() -> Self {
        Self {
            c_thrust: S::one(),
            c_turn: S::c(2.0),
            c_wheel: S::one(),
            c_force: S::one(),
            k_drag: S::one(),
            axle_width: S::c(0.3),
        }
    }
}

/// Point robot: `u1` thrusts along the heading, `u2` commands the turn rate.
pub fn point_dynamics<S: Real>(
    state: &PointState<S>,
    action: [S; 2],
    dt: S,
    p: &DynamicsParams<S>,
) -> Result<PointState<S>, EnvError> {
    if !state.is_finite() {
        return Err(EnvError::NonFiniteState);
    }
    if !(action[0].is_finite() && action[1].is_finite() && dt.is_finite()) {
        return Err(EnvError::NonFiniteAction);
    }
    let omega = p.c_turn * action[1];
    let theta = wrap_angle(state.theta + omega * dt);
    let v = state.v + (p.c_thrust * action[0] - p.k_drag * state.v) * dt;
    Ok(PointState {
        x: state.x + v * theta.cos() * dt,
        y: state.y + v * theta.sin() * dt,
        theta,
        v,
        omega,
    })
}

/// Car robot: wheel speeds relax toward the commanded forces; the body
/// turns with the wheel-speed difference.
pub fn car_dynamics<S: Real>(
    state: &CarState<S>,
    action: [S; 2],
    dt: S,
    p: &DynamicsParams<S>,
) -> Result<CarState<S>, EnvError> {
    if !state.is_finite() {
        return Err(EnvError::NonFiniteState);
    }
    if !(action[0].is_finite() && action[1].is_finite() && dt.is_finite()) {
        return Err(EnvError::NonFiniteAction);
    }
    let v_left = state.v_left + (p.c_wheel * action[0] - p.k_drag * state.v_left) * dt;
    let v_right = state.v_right + (p.c_wheel * action[1] - p.k_drag * state.v_right) * dt;
    let v = (v_left + v_right) * S::c(0.5);
    let omega = (v_right - v_left) / p.axle_width;
    let theta = wrap_angle(state.theta + omega * dt);
    Ok(CarState {
        x: state.x + v * theta.cos() * dt,
        y: state.y + v * theta.sin() * dt,
        theta,
        v_left,
        v_right,
    })
}

/// Free mass point under a bounded force with linear drag.
pub fn mass_point_dynamics<S: Real>(
    state: &MassPointState<S>,
    force: &[S],
    dt: S,
    p: &DynamicsParams<S>,
) -> Result<MassPointState<S>, EnvError> {
    if state.position.iter().chain(&state.velocity).any(|s| !s.is_finite()) {
        return Err(EnvError::NonFiniteState);
    }
    if force.iter().any(|s| !s.is_finite()) {
        return Err(EnvError::NonFiniteAction);
    }
    debug_assert_eq!(force.len(), state.dim());
    let velocity: Vec<S> = state
        .velocity
        .iter()
        .zip(force)
        .map(|(&v, &f)| v + (p.c_force * f - p.k_drag * v) * dt)
        .collect();
    let position: Vec<S> =
        state.position.iter().zip(&velocity).map(|(&x, &v)| x + v * dt).collect();
    Ok(MassPointState { position, velocity })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> DynamicsParams<f64> {
        DynamicsParams { k_drag: 0.0, ..Default::default() }
    }

    #[test]
    fn wrap_angle_range() {
        for k in -20..=20 {
            let theta = k as f64 * 0.7;
            let w = wrap_angle(theta);
            assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            // same direction
            assert!(((w - theta).abs() / (2.0 * std::f64::consts::PI)).fract() < 1e-9);
        }
        assert_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
    }

    #[test]
    fn point_moves_straight_when_not_turning() {
        let s0 = PointState::at_rest(0.0, 0.0, 0.0);
        let s1 = point_dynamics(&s0, [0.8, 0.0], 0.02, &params()).unwrap();
        assert_eq!(s1.y, 0.0);
        assert!(s1.x > 0.0);
        assert_eq!(s1.theta, 0.0);
    }

    #[test]
    fn point_rest_is_a_fixed_point() {
        let s0 = PointState::at_rest(1.0, -2.0, 0.4);
        let s1 = point_dynamics(&s0, [0.0, 0.0], 0.02, &params()).unwrap();
        assert_eq!(s1, s0);
    }

    #[test]
    fn point_two_step_hand_integration() {
        // c_thrust = 1, k_drag = 0, dt = 0.02, full thrust from rest:
        // v: 0.02 then 0.04; x: 0.0004 then 0.0012.
        let p = params();
        let s0 = PointState::at_rest(0.0, 0.0, 0.0);
        let s1 = point_dynamics(&s0, [1.0, 0.0], 0.02, &p).unwrap();
        let s2 = point_dynamics(&s1, [1.0, 0.0], 0.02, &p).unwrap();
        assert!((s2.v - 0.04).abs() < 1e-15);
        assert!((s2.x - 0.0012).abs() < 1e-15);
    }

    #[test]
    fn point_rejects_non_finite() {
        let s0 = PointState::at_rest(0.0, 0.0, 0.0);
        assert_eq!(
            point_dynamics(&s0, [f64::NAN, 0.0], 0.02, &params()),
            Err(EnvError::NonFiniteAction)
        );
    }

    #[test]
    fn car_equal_forces_go_straight() {
        let s0 = CarState::at_rest(0.0, 0.0, 0.7);
        let mut s = s0;
        for _ in 0..50 {
            s = car_dynamics(&s, [0.6, 0.6], 0.02, &params()).unwrap();
        }
        assert_eq!(s.theta, 0.7);
        assert!(s.x > 0.0);
    }

    #[test]
    fn car_opposite_wheels_spin_in_place() {
        let mut s = CarState { x: 0.5, y: 0.5, theta: 0.0, v_left: -0.3, v_right: 0.3 };
        for _ in 0..10 {
            s = car_dynamics(&s, [-1.0, 1.0], 0.02, &params()).unwrap();
            assert!((s.x - 0.5).abs() < 1e-12 && (s.y - 0.5).abs() < 1e-12);
        }
        assert!(s.theta > 0.0);
    }

    #[test]
    fn car_one_step_hand_integration() {
        let s0 = CarState::at_rest(0.0, 0.0, 0.0);
        let s1 = car_dynamics(&s0, [1.0, 1.0], 0.02, &params()).unwrap();
        assert!((s1.v_left - 0.02).abs() < 1e-15);
        assert!((s1.v_right - 0.02).abs() < 1e-15);
    }

    #[test]
    fn mass_point_newton_and_decay() {
        let p = params();
        // no force, no drag: velocity unchanged
        let s0 = MassPointState { position: vec![0.0, 0.0], velocity: vec![0.3, -0.4] };
        let s1 = mass_point_dynamics(&s0, &[0.0, 0.0], 0.02, &p).unwrap();
        assert_eq!(s1.velocity, s0.velocity);

        // drag strictly decays speed
        let dragged = DynamicsParams { k_drag: 1.0, ..params() };
        let mut s = MassPointState { position: vec![0.0], velocity: vec![1.0] };
        let mut prev_speed = 1.0;
        for _ in 0..100 {
            s = mass_point_dynamics(&s, &[0.0], 0.02, &dragged).unwrap();
            let speed = s.velocity[0].abs();
            assert!(speed < prev_speed);
            prev_speed = speed;
        }
    }

    #[test]
    fn mass_point_hand_integration() {
        let p = params();
        let s0 = MassPointState::at_rest(2);
        let s1 = mass_point_dynamics(&s0, &[1.0, 0.0], 0.02, &p).unwrap();
        assert_eq!(s1.velocity, vec![0.02, 0.0]);
        assert!((s1.position[0] - 0.0004).abs() < 1e-18);
        assert_eq!(s1.position[1], 0.0);
    }
}

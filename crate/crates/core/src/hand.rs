//! Reward and safety-cost math for the dexterous-hand tasks, as pure
//! functions. No hand simulation: positions, quaternions and joint angles
//! come from the caller.

use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HandError {
    #[error("quaternion norm {0} is not 1 within 1e-9")]
    NonUnitQuaternion(f64),
    #[error("distances must be nonnegative")]
    NegativeDistance,
    #[error("inputs must be finite")]
    NonFinite,
}

/// Unit quaternion in (w, x, y, z) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion<S: Real> {
    pub w: S,
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Quaternion<S> {
    pub fn new(w: S, x: S, y: S, z: S) -> Self {
        Self { w, x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(S::one(), S::zero(), S::zero(), S::zero())
    }

    /// Rotation of `angle` radians about a unit axis.
    pub fn from_axis_angle(axis: [S; 3], angle: S) -> Self {
        let half = angle * S::c(0.5);
        let s = half.sin();
        Self::new(half.cos(), axis[0] * s, axis[1] * s, axis[2] * s)
    }

    pub fn norm(&self) -> S {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product `self ⊗ other`.
    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.w * other.w - self.x * other.x - self.y * other.y - self.z * other.z,
            self.w * other.x + self.x * other.w + self.y * other.z - self.z * other.y,
            self.w * other.y - self.x * other.z + self.y * other.w + self.z * other.x,
            self.w * other.z + self.x * other.y - self.y * other.x + self.z * other.w,
        )
    }

    fn check_unit(&self) -> Result<(), HandError> {
        let n = self.norm().to_f64_c();
        if (n - 1.0).abs() > 1e-9 {
            return Err(HandError::NonUnitQuaternion(n));
        }
        Ok(())
    }
}

/// Position plus orientation of a rigid body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<S: Real> {
    pub position: [S; 3],
    pub orientation: Quaternion<S>,
}

/// Forefinger joint angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerAngles<S: Real> {
    pub ang_2: S,
    pub ang_3: S,
    pub ang_4: S,
}

/// Euclidean distance between two points.
pub fn positional_distance<S: Real>(a: [S; 3], b: [S; 3]) -> S {
    let mut acc = S::zero();
    for i in 0..3 {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc.sqrt()
}

/// Rotational distance `2 asin(min(|d_a|, 1))` where `d_a` is the vector
/// part of the relative quaternion `q_goal ⊗ conj(q_obj)`. Sign-invariant:
/// `q` and `-q` describe the same rotation.
pub fn rotational_distance<S: Real>(
    q_obj: Quaternion<S>,
    q_goal: Quaternion<S>,
) -> Result<S, HandError> {
    q_obj.check_unit()?;
    q_goal.check_unit()?;
    let rel = q_goal.mul(&q_obj.conjugate());
    let d_a = (rel.x * rel.x + rel.y * rel.y + rel.z * rel.z).sqrt();
    Ok(S::c(2.0) * d_a.min(S::one()).asin())
}

/// Hand-over reward `exp(-0.2 (alpha d_p + d_r))`, in (0, 1].
pub fn handover_reward<S: Real>(d_p: S, d_r: S, alpha: S) -> Result<S, HandError> {
    if !(d_p.is_finite() && d_r.is_finite() && alpha.is_finite()) {
        return Err(HandError::NonFinite);
    }
    if d_p < S::zero() || d_r < S::zero() {
        return Err(HandError::NegativeDistance);
    }
    Ok((S::c(-0.2) * (alpha * d_p + d_r)).exp())
}

/// Default positional/rotational balance for [`handover_reward`].
pub const HANDOVER_ALPHA: f64 = 10.0;

fn in_closed<S: Real>(x: S, lo: f64, hi: f64) -> bool {
    x >= S::c(lo) && x <= S::c(hi)
}

/// Indicator cost for the single-joint constraint: 1 when `ang_4` leaves
/// the closed interval [-10, 10] degrees.
pub fn safety_joint_cost<S: Real>(ang_4: S) -> S {
    if in_closed(ang_4, -10.0, 10.0) {
        S::zero()
    } else {
        S::one()
    }
}

/// Indicator cost for the three-joint constraint: 1 when any of ang_2 or
/// ang_3 leaves [22.5, 67.5] degrees or ang_4 leaves [-10, 10] degrees.
pub fn safety_finger_cost<S: Real>(angles: FingerAngles<S>) -> S {
    let ok = in_closed(angles.ang_2, 22.5, 67.5)
        && in_closed(angles.ang_3, 22.5, 67.5)
        && in_closed(angles.ang_4, -10.0, 10.0);
    if ok {
        S::zero()
    } else {
        S::one()
    }
}

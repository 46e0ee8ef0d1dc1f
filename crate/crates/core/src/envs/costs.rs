//! Constraint cost functions: the velocity-magnitude cost, the circle
//! reward/cost pair, and contact costs against the constraint objects.

use super::layout::WorldLayout;
use crate::cmdp::EnvError;
use crate::scalar::Real;

/// Cost mode and per-kind continuous scales.
#[derive(Debug, Clone, PartialEq)]
pub struct CostConfig<S: Real> {
    /// Squash every component (and the total) to {0, 1}.
    pub binary_indicator: bool,
    pub hazard_scale: S,
    pub pillar_scale: S,
    pub vase_contact_scale: S,
    /// Continuous-mode extra cost per unit of vase displacement speed.
    pub vase_velocity_scale: S,
    pub gremlin_scale: S,
    pub button_scale: S,
}

impl<S: Real> Default for CostConfig<S> {
    fn default() -> Self {
        Self {
            binary_indicator: true,
            hazard_scale: S::one(),
            pillar_scale: S::one(),
            vase_contact_scale: S::one(),
            vase_velocity_scale: S::one(),
            gremlin_scale: S::one(),
            button_scale: S::one(),
        }
    }
}

impl<S: Real> CostConfig<S> {
    pub fn continuous() -> Self {
        Self { binary_indicator: false, ..Self::default() }
    }

    /// Collapse a nonnegative component to an indicator in binary mode.
    pub fn squash(&self, x: S) -> S {
        if self.binary_indicator && x > S::zero() {
            S::one()
        } else if self.binary_indicator {
            S::zero()
        } else {
            x
        }
    }
}

/// Per-kind contact costs and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContactCosts<S: Real> {
    pub hazards: S,
    pub pillars: S,
    pub vases: S,
    pub gremlins: S,
    pub total: S,
}

/// Speed-magnitude cost: Euclidean norm in 2D, absolute value in 1D.
pub fn velocity_cost<S: Real>(velocity: &[S]) -> Result<S, EnvError> {
    match velocity.len() {
        1 => Ok(velocity[0].abs()),
        2 => Ok((velocity[0] * velocity[0] + velocity[1] * velocity[1]).sqrt()),
        d => Err(EnvError::UnsupportedDim(d)),
    }
}

/// Circle-task reward and sigwall cost:
/// reward = v . [-y, x] / (1 + | ||(x, y)|| - d |), cost = 1[|x| > x_lim].
pub fn circle_reward_cost<S: Real>(
    position: [S; 2],
    velocity: [S; 2],
    d: S,
    x_lim: S,
) -> (S, S) {
    debug_assert!(d > S::zero() && x_lim > S::zero());
    let [x, y] = position;
    let tangent = velocity[0] * (-y) + velocity[1] * x;
    let radial_err = ((x * x + y * y).sqrt() - d).abs();
    let reward = tangent / (S::one() + radial_err);
    let cost = if x.abs() > x_lim { S::one() } else { S::zero() };
    (reward, cost)
}

/// Contact costs of the robot disc against the constraint objects.
///
/// Hazards charge when the robot center enters the hazard circle; pillars,
/// vases and gremlins charge on disc overlap. In continuous mode a moving
/// vase additionally charges `vase_velocity_scale * speed` (speeds are read
/// from `layout.vase_speeds`). In binary mode every component and the total
/// collapse to indicators.
pub fn contact_costs<S: Real>(
    robot_pos: [S; 2],
    robot_radius: S,
    layout: &WorldLayout<S>,
    cfg: &CostConfig<S>,
) -> ContactCosts<S> {
    let mut out = ContactCosts::default();

    for hazard in &layout.hazards {
        if hazard.contains(robot_pos) {
            out.hazards += cfg.hazard_scale;
        }
    }
    for pillar in &layout.pillars {
        if pillar.overlaps_disc(robot_pos, robot_radius) {
            out.pillars += cfg.pillar_scale;
        }
    }
    for (i, vase) in layout.vases.iter().enumerate() {
        if vase.overlaps_disc(robot_pos, robot_radius) {
            out.vases += cfg.vase_contact_scale;
        }
        if !cfg.binary_indicator {
            let speed = layout.vase_speeds.get(i).copied().unwrap_or_else(S::zero);
            out.vases += cfg.vase_velocity_scale * speed;
        }
    }
    for gremlin in &layout.gremlins {
        if gremlin.overlaps_disc(robot_pos, robot_radius) {
            out.gremlins += cfg.gremlin_scale;
        }
    }

    out.hazards = cfg.squash(out.hazards);
    out.pillars = cfg.squash(out.pillars);
    out.vases = cfg.squash(out.vases);
    out.gremlins = cfg.squash(out.gremlins);
    out.total = cfg.squash(out.hazards + out.pillars + out.vases + out.gremlins);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::layout::Disc;

    #[test]
    fn velocity_cost_cases() {
        assert_eq!(velocity_cost(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(velocity_cost(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(velocity_cost(&[-2.0]).unwrap(), 2.0);
        assert_eq!(velocity_cost(&[1.0, 1.0, 1.0]), Err(EnvError::UnsupportedDim(3)));
    }

    #[test]
    fn circle_formula_spot_checks() {
        // pos (10, 0), v (0, 1), d = 10: tangent 10, on-circle, cost fires past x_lim = 9.
        let (r, c) = circle_reward_cost([10.0, 0.0], [0.0, 1.0], 10.0, 9.0);
        assert_eq!(r, 10.0);
        assert_eq!(c, 1.0);

        // reversed velocity negates the reward, cost unchanged
        let (r2, c2) = circle_reward_cost([10.0, 0.0], [0.0, -1.0], 10.0, 9.0);
        assert_eq!(r2, -10.0);
        assert_eq!(c2, 1.0);

        // at the origin the tangent vector vanishes
        let (r3, c3) = circle_reward_cost([0.0, 0.0], [0.7, -0.3], 10.0, 9.0);
        assert_eq!(r3, 0.0);
        assert_eq!(c3, 0.0);
    }

    fn one_hazard_one_pillar() -> WorldLayout<f64> {
        WorldLayout {
            hazards: vec![Disc { center: [0.0, 0.0], radius: 0.3 }],
            pillars: vec![Disc { center: [0.1, 0.0], radius: 0.2 }],
            ..Default::default()
        }
    }

    #[test]
    fn far_robot_pays_nothing() {
        let layout = one_hazard_one_pillar();
        let costs = contact_costs([5.0, 5.0], 0.18, &layout, &CostConfig::default());
        assert_eq!(costs.total, 0.0);
    }

    #[test]
    fn hazard_entry_costs_one_in_binary_mode() {
        let layout = WorldLayout {
            hazards: vec![Disc { center: [0.0, 0.0], radius: 0.3 }],
            ..Default::default()
        };
        let costs = contact_costs([0.1, 0.0], 0.18, &layout, &CostConfig::default());
        assert_eq!(costs.hazards, 1.0);
        assert_eq!(costs.total, 1.0);
        // center outside the hazard circle: no cost even if discs overlap
        let costs = contact_costs([0.35, 0.0], 0.18, &layout, &CostConfig::default());
        assert_eq!(costs.total, 0.0);
    }

    #[test]
    fn simultaneous_contacts_squash_to_one() {
        let layout = one_hazard_one_pillar();
        let costs = contact_costs([0.05, 0.0], 0.18, &layout, &CostConfig::default());
        assert_eq!(costs.hazards, 1.0);
        assert_eq!(costs.pillars, 1.0);
        assert_eq!(costs.total, 1.0);

        let continuous = contact_costs([0.05, 0.0], 0.18, &layout, &CostConfig::continuous());
        assert_eq!(continuous.total, 2.0);
    }

    #[test]
    fn moving_vase_charges_in_continuous_mode_only() {
        let layout = WorldLayout {
            vases: vec![Disc { center: [10.0, 0.0], radius: 0.12 }],
            vase_speeds: vec![0.5],
            ..Default::default()
        };
        let binary = contact_costs([0.0, 0.0], 0.18, &layout, &CostConfig::default());
        assert_eq!(binary.vases, 0.0);
        let continuous = contact_costs([0.0, 0.0], 0.18, &layout, &CostConfig::continuous());
        assert_eq!(continuous.vases, 0.5);
    }
}

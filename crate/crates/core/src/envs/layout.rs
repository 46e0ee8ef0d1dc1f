//! World layouts: positions and sizes of all task objects, rejection
//! sampling for initial placement, and goal resampling that keeps the rest
//! of the scene fixed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cmdp::EnvError;
use crate::scalar::Real;

/// A circular object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc<S: Real> {
    pub center: [S; 2],
    pub radius: S,
}

impl<S: Real> Disc<S> {
    pub fn distance_to(&self, point: [S; 2]) -> S {
        let dx = self.center[0] - point[0];
        let dy = self.center[1] - point[1];
        (dx * dx + dy * dy).sqrt()
    }

    pub fn overlaps_disc(&self, center: [S; 2], radius: S) -> bool {
        self.distance_to(center) < self.radius + radius
    }

    pub fn contains(&self, point: [S; 2]) -> bool {
        self.distance_to(point) < self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButtonObj<S: Real> {
    pub disc: Disc<S>,
    pub is_goal: bool,
}

/// Circular gremlin orbit; positions are a deterministic function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GremlinOrbit<S: Real> {
    pub center: [S; 2],
    pub orbit_radius: S,
    pub rate: S,
    pub phase: S,
    pub body_radius: S,
}

impl<S: Real> GremlinOrbit<S> {
    pub fn position_at(&self, time: S) -> [S; 2] {
        let angle = self.phase + self.rate * time;
        [
            self.center[0] + self.orbit_radius * angle.cos(),
            self.center[1] + self.orbit_radius * angle.sin(),
        ]
    }
}

/// Snapshot of every object in the scene plus the robot pose.
///
/// `vase_speeds` carries the per-vase displacement speed of the current
/// step so displacement costs can be charged in continuous mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WorldLayout<S: Real> {
    pub goal: Option<Disc<S>>,
    pub box_obj: Option<Disc<S>>,
    pub buttons: Vec<ButtonObj<S>>,
    pub hazards: Vec<Disc<S>>,
    pub pillars: Vec<Disc<S>>,
    pub vases: Vec<Disc<S>>,
    pub vase_speeds: Vec<S>,
    pub gremlins: Vec<Disc<S>>,
    pub gremlin_orbits: Vec<GremlinOrbit<S>>,
    pub sigwall_xlim: Option<S>,
    pub circle_radius: Option<S>,
    /// Robot (x, y, theta).
    pub robot_pose: [S; 3],
}

impl<S: Real> WorldLayout<S> {
    /// Move gremlins along their orbits; deterministic in `time`.
    pub fn advance_gremlins(&mut self, time: S) {
        for (g, orbit) in self.gremlins.iter_mut().zip(&self.gremlin_orbits) {
            g.center = orbit.position_at(time);
        }
    }

    /// Centers of every placed object, for separation checks.
    fn occupied_centers(&self) -> Vec<[S; 2]> {
        let mut centers = Vec::new();
        if let Some(g) = &self.goal {
            centers.push(g.center);
        }
        if let Some(b) = &self.box_obj {
            centers.push(b.center);
        }
        centers.extend(self.buttons.iter().map(|b| b.disc.center));
        centers.extend(self.hazards.iter().map(|h| h.center));
        centers.extend(self.pillars.iter().map(|p| p.center));
        centers.extend(self.vases.iter().map(|v| v.center));
        centers.extend(self.gremlin_orbits.iter().map(|o| o.center));
        centers.push([self.robot_pose[0], self.robot_pose[1]]);
        centers
    }

    pub fn goal_button_index(&self) -> Option<usize> {
        self.buttons.iter().position(|b| b.is_goal)
    }
}

/// Object counts and sizes a task wants placed.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSpec<S: Real> {
    pub arena_halfwidth: S,
    pub min_separation: S,
    /// Extra clearance between the robot spawn and every other object.
    pub robot_clearance: S,
    pub goal_radius: Option<S>,
    pub box_radius: Option<S>,
    pub n_buttons: usize,
    pub button_radius: S,
    pub n_hazards: usize,
    pub hazard_radius: S,
    pub n_pillars: usize,
    pub pillar_radius: S,
    pub n_vases: usize,
    pub vase_radius: S,
    pub n_gremlins: usize,
    pub gremlin_body_radius: S,
    pub gremlin_orbit_radius: S,
    pub gremlin_rate: S,
    pub sigwall_xlim: Option<S>,
    pub circle_radius: Option<S>,
}

impl<S: Real> LayoutSpec<S> {
    /// Spec with no objects, used as the base the tasks extend.
    pub fn empty(arena_halfwidth: S, min_separation: S) -> Self {
        Self {
            arena_halfwidth,
            min_separation,
            robot_clearance: S::c(0.8),
            goal_radius: None,
            box_radius: None,
            n_buttons: 0,
            button_radius: S::c(0.15),
            n_hazards: 0,
            hazard_radius: S::c(0.25),
            n_pillars: 0,
            pillar_radius: S::c(0.2),
            n_vases: 0,
            vase_radius: S::c(0.12),
            n_gremlins: 0,
            gremlin_body_radius: S::c(0.12),
            gremlin_orbit_radius: S::c(0.25),
            gremlin_rate: S::one(),
            sigwall_xlim: None,
            circle_radius: None,
        }
    }
}

const MAX_ATTEMPTS: usize = 10_000;

fn sample_point<S: Real>(halfwidth: S, margin: S, rng: &mut ChaCha8Rng) -> [S; 2] {
    let w = (halfwidth - margin).to_f64_c();
    [S::c(rng.gen_range(-w..=w)), S::c(rng.gen_range(-w..=w))]
}

fn far_enough<S: Real>(p: [S; 2], placed: &[[S; 2]], min_sep: S) -> bool {
    placed.iter().all(|q| {
        let dx = p[0] - q[0];
        let dy = p[1] - q[1];
        (dx * dx + dy * dy).sqrt() >= min_sep
    })
}

fn place<S: Real>(
    placed: &mut Vec<[S; 2]>,
    robot: [S; 2],
    spec: &LayoutSpec<S>,
    margin: S,
    rng: &mut ChaCha8Rng,
) -> Result<[S; 2], EnvError> {
    for _ in 0..MAX_ATTEMPTS {
        let p = sample_point(spec.arena_halfwidth, margin, rng);
        if far_enough(p, placed, spec.min_separation)
            && far_enough(p, &[robot], spec.min_separation.max(spec.robot_clearance))
        {
            placed.push(p);
            return Ok(p);
        }
    }
    Err(EnvError::LayoutSampling(MAX_ATTEMPTS))
}

/// Rejection-sample a fresh layout: object centers end up at least
/// `min_separation` apart and at least `robot_clearance` from the robot
/// spawn, or the sampler fails loudly after a bounded number of attempts.
pub fn sample_layout<S: Real>(
    spec: &LayoutSpec<S>,
    rng: &mut ChaCha8Rng,
) -> Result<WorldLayout<S>, EnvError> {
    let mut layout = WorldLayout::default();

    let robot = sample_point(spec.arena_halfwidth, S::c(0.2), rng);
    let heading = S::c(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
    layout.robot_pose = [robot[0], robot[1], heading];
    let mut placed: Vec<[S; 2]> = Vec::new();

    if let Some(r) = spec.goal_radius {
        let c = place(&mut placed, robot, spec, r, rng)?;
        layout.goal = Some(Disc { center: c, radius: r });
    }
    if let Some(r) = spec.box_radius {
        let c = place(&mut placed, robot, spec, r, rng)?;
        layout.box_obj = Some(Disc { center: c, radius: r });
    }
    for i in 0..spec.n_buttons {
        let c = place(&mut placed, robot, spec, spec.button_radius, rng)?;
        layout.buttons.push(ButtonObj {
            disc: Disc { center: c, radius: spec.button_radius },
            is_goal: false,
        });
        let _ = i;
    }
    if !layout.buttons.is_empty() {
        let goal_idx = rng.gen_range(0..layout.buttons.len());
        layout.buttons[goal_idx].is_goal = true;
    }
    for _ in 0..spec.n_hazards {
        let c = place(&mut placed, robot, spec, spec.hazard_radius, rng)?;
        layout.hazards.push(Disc { center: c, radius: spec.hazard_radius });
    }
    for _ in 0..spec.n_pillars {
        let c = place(&mut placed, robot, spec, spec.pillar_radius, rng)?;
        layout.pillars.push(Disc { center: c, radius: spec.pillar_radius });
    }
    for _ in 0..spec.n_vases {
        let c = place(&mut placed, robot, spec, spec.vase_radius, rng)?;
        layout.vases.push(Disc { center: c, radius: spec.vase_radius });
    }
    layout.vase_speeds = vec![S::zero(); spec.n_vases];
    for _ in 0..spec.n_gremlins {
        let margin = spec.gremlin_orbit_radius + spec.gremlin_body_radius;
        let c = place(&mut placed, robot, spec, margin, rng)?;
        let phase = S::c(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
        layout.gremlin_orbits.push(GremlinOrbit {
            center: c,
            orbit_radius: spec.gremlin_orbit_radius,
            rate: spec.gremlin_rate,
            phase,
            body_radius: spec.gremlin_body_radius,
        });
        layout.gremlins.push(Disc { center: c, radius: spec.gremlin_body_radius });
    }
    layout.advance_gremlins(S::zero());
    layout.sigwall_xlim = spec.sigwall_xlim;
    layout.circle_radius = spec.circle_radius;
    Ok(layout)
}

/// Resample only the goal position, keeping every other object exactly
/// where it is. Fails loudly after a bounded number of attempts.
pub fn resample_goal<S: Real>(
    layout: &mut WorldLayout<S>,
    spec: &LayoutSpec<S>,
    rng: &mut ChaCha8Rng,
) -> Result<(), EnvError> {
    let radius = layout.goal.as_ref().expect("resample_goal needs a goal").radius;
    let mut others = layout.occupied_centers();
    // the first occupied center is the goal itself
    others.remove(0);
    for _ in 0..MAX_ATTEMPTS {
        let c = sample_point(spec.arena_halfwidth, radius, rng);
        if far_enough(c, &others, spec.min_separation) {
            layout.goal = Some(Disc { center: c, radius });
            return Ok(());
        }
    }
    Err(EnvError::LayoutSampling(MAX_ATTEMPTS))
}

/// Reassign the goal flag to a different button, chosen uniformly.
pub fn reassign_goal_button<S: Real>(layout: &mut WorldLayout<S>, rng: &mut ChaCha8Rng) {
    let n = layout.buttons.len();
    if n < 2 {
        return;
    }
    let current = layout.goal_button_index().unwrap_or(0);
    let mut pick = rng.gen_range(0..n - 1);
    if pick >= current {
        pick += 1;
    }
    for (i, b) in layout.buttons.iter_mut().enumerate() {
        b.is_goal = i == pick;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn goal_spec() -> LayoutSpec<f64> {
        let mut spec = LayoutSpec::empty(2.0, 0.55);
        spec.goal_radius = Some(0.3);
        spec.n_hazards = 8;
        spec.n_vases = 1;
        spec
    }

    #[test]
    fn sampled_layout_respects_separation() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layout = sample_layout(&goal_spec(), &mut rng).unwrap();
            let centers = layout.occupied_centers();
            for i in 0..centers.len() {
                for j in 0..i {
                    let dx = centers[i][0] - centers[j][0];
                    let dy = centers[i][1] - centers[j][1];
                    let dist = (dx * dx + dy * dy).sqrt();
                    assert!(dist >= 0.55, "objects {i},{j} too close: {dist}");
                }
            }
            assert_eq!(layout.hazards.len(), 8);
            assert_eq!(layout.vases.len(), 1);
        }
    }

    #[test]
    fn impossible_spec_fails_loudly() {
        let mut spec = LayoutSpec::empty(0.5, 2.0); // cannot separate anything
        spec.n_hazards = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_layout(&spec, &mut rng), Err(EnvError::LayoutSampling(_))));
    }

    #[test]
    fn goal_resampling_keeps_other_objects() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = goal_spec();
        let mut layout = sample_layout(&spec, &mut rng).unwrap();
        let hazards_before = layout.hazards.clone();
        let vases_before = layout.vases.clone();
        let old_goal = layout.goal.unwrap();
        resample_goal(&mut layout, &spec, &mut rng).unwrap();
        assert_eq!(layout.hazards, hazards_before);
        assert_eq!(layout.vases, vases_before);
        assert_ne!(layout.goal.unwrap().center, old_goal.center);
    }

    #[test]
    fn exactly_one_goal_button() {
        let mut spec = LayoutSpec::empty(2.0, 0.5);
        spec.n_buttons = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut layout = sample_layout(&spec, &mut rng).unwrap();
        assert_eq!(layout.buttons.iter().filter(|b| b.is_goal).count(), 1);
        let before = layout.goal_button_index().unwrap();
        reassign_goal_button(&mut layout, &mut rng);
        assert_eq!(layout.buttons.iter().filter(|b| b.is_goal).count(), 1);
        assert_ne!(layout.goal_button_index().unwrap(), before);
    }

    #[test]
    fn gremlins_orbit_deterministically() {
        let orbit = GremlinOrbit {
            center: [1.0, -1.0],
            orbit_radius: 0.25,
            rate: 1.0,
            phase: 0.0,
            body_radius: 0.1,
        };
        let p0 = orbit.position_at(0.0);
        let p_pi = orbit.position_at(std::f64::consts::PI);
        // antipodal points on the orbit
        let mid = [(p0[0] + p_pi[0]) / 2.0, (p0[1] + p_pi[1]) / 2.0];
        assert!((mid[0] - 1.0).abs() < 1e-12 && (mid[1] + 1.0).abs() < 1e-12);
    }
}

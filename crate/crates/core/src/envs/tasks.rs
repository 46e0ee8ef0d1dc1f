//! Task semantics layered on top of the layouts: dense/sparse goal seeking,
//! box pushing, and button pressing with orbiting gremlins.

use rand_chacha::ChaCha8Rng;

use super::layout::{reassign_goal_button, resample_goal, Disc, LayoutSpec, WorldLayout};
use crate::scalar::Real;

/// Reward shaping constants shared by the navigation tasks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskConfig<S: Real> {
    /// Dense progress coefficient (per meter).
    pub beta: S,
    /// Progress coefficient for the box-to-goal distance in Push.
    pub beta_box: S,
    pub sparse_bonus: S,
}

impl<S: Real> Default for TaskConfig<S> {
    fn default() -> Self {
        Self { beta: S::one(), beta_box: S::one(), sparse_bonus: S::one() }
    }
}

fn dist<S: Real>(a: [S; 2], b: [S; 2]) -> S {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Goal task: dense progress toward the goal circle plus a sparse bonus on
/// entry, after which the goal resamples while the rest of the layout stays
/// fixed. `prev_dist` is updated to the distance toward the current
/// (possibly fresh) goal.
pub fn goal_task_step<S: Real>(
    robot_pos: [S; 2],
    layout: &mut WorldLayout<S>,
    prev_dist: &mut S,
    spec: &LayoutSpec<S>,
    cfg: &TaskConfig<S>,
    rng: &mut ChaCha8Rng,
) -> (S, bool) {
    let goal = layout.goal.expect("goal task without a goal");
    let cur = dist(robot_pos, goal.center);
    let mut reward = cfg.beta * (*prev_dist - cur);
    let reached = cur <= goal.radius;
    if reached {
        reward += cfg.sparse_bonus;
        resample_goal(layout, spec, rng).expect("goal resampling failed");
        *prev_dist = dist(robot_pos, layout.goal.unwrap().center);
    } else {
        *prev_dist = cur;
    }
    (reward, reached)
}

/// Push task: displace the box kinematically when the robot overlaps it,
/// reward progress of robot-to-box and box-to-goal, and grant the sparse
/// bonus (plus a goal resample) when the box reaches the goal circle.
/// `prev_dists` is (robot-to-box, box-to-goal).
pub fn push_task_step<S: Real>(
    robot_pos: [S; 2],
    robot_radius: S,
    layout: &mut WorldLayout<S>,
    prev_dists: &mut (S, S),
    spec: &LayoutSpec<S>,
    cfg: &TaskConfig<S>,
    rng: &mut ChaCha8Rng,
) -> (S, bool) {
    let goal = layout.goal.expect("push task without a goal");
    let mut box_obj = layout.box_obj.expect("push task without a box");

    // Kinematic push: restore separation along the contact normal.
    let d = dist(robot_pos, box_obj.center);
    let min_sep = robot_radius + box_obj.radius;
    if d < min_sep {
        if d > S::c(1e-9) {
            let scale = (min_sep - d) / d;
            box_obj.center[0] += (box_obj.center[0] - robot_pos[0]) * scale;
            box_obj.center[1] += (box_obj.center[1] - robot_pos[1]) * scale;
        } else {
            // robot exactly on the box center: push along +x
            box_obj.center[0] += min_sep;
        }
    }
    layout.box_obj = Some(box_obj);

    let cur_rb = dist(robot_pos, box_obj.center);
    let cur_bg = dist(box_obj.center, goal.center);
    let mut reward =
        cfg.beta * (prev_dists.0 - cur_rb) + cfg.beta_box * (prev_dists.1 - cur_bg);
    let delivered = cur_bg <= goal.radius;
    if delivered {
        reward += cfg.sparse_bonus;
        resample_goal(layout, spec, rng).expect("goal resampling failed");
        *prev_dists = (cur_rb, dist(box_obj.center, layout.goal.unwrap().center));
    } else {
        *prev_dists = (cur_rb, cur_bg);
    }
    (reward, delivered)
}

/// Button task: gremlins orbit deterministically in time, dense reward
/// tracks progress toward the highlighted button, pressing it grants the
/// sparse bonus and highlights another, and touching a non-goal button
/// returns a unit contact count (scaled by the cost config upstream).
pub fn button_task_step<S: Real>(
    robot_pos: [S; 2],
    robot_radius: S,
    layout: &mut WorldLayout<S>,
    time: S,
    prev_dist: &mut S,
    cfg: &TaskConfig<S>,
    rng: &mut ChaCha8Rng,
) -> (S, S, bool) {
    layout.advance_gremlins(time);

    let goal_idx = layout.goal_button_index().expect("button task without a goal button");
    let goal_disc = layout.buttons[goal_idx].disc;
    let cur = dist(robot_pos, goal_disc.center);
    let mut reward = cfg.beta * (*prev_dist - cur);

    let mut wrong_contacts = S::zero();
    for (i, b) in layout.buttons.iter().enumerate() {
        if i != goal_idx && b.disc.overlaps_disc(robot_pos, robot_radius) {
            wrong_contacts += S::one();
        }
    }

    let pressed = goal_disc.overlaps_disc(robot_pos, robot_radius);
    if pressed {
        reward += cfg.sparse_bonus;
        reassign_goal_button(layout, rng);
        let fresh = layout.buttons[layout.goal_button_index().unwrap()].disc;
        *prev_dist = dist(robot_pos, fresh.center);
    } else {
        *prev_dist = cur;
    }
    (reward, wrong_contacts, pressed)
}

/// Distance from the robot to the currently highlighted button.
pub fn goal_button_distance<S: Real>(robot_pos: [S; 2], layout: &WorldLayout<S>) -> S {
    let idx = layout.goal_button_index().expect("no goal button");
    dist(robot_pos, layout.buttons[idx].disc.center)
}

/// Distance helper for goal-bearing tasks.
pub fn goal_distance<S: Real>(robot_pos: [S; 2], goal: &Disc<S>) -> S {
    dist(robot_pos, goal.center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::layout::{sample_layout, ButtonObj};
    use rand::SeedableRng;

    fn goal_layout() -> (WorldLayout<f64>, LayoutSpec<f64>) {
        let mut spec = LayoutSpec::empty(2.0, 0.4);
        spec.goal_radius = Some(0.3);
        let layout = WorldLayout {
            goal: Some(Disc { center: [1.0, 0.0], radius: 0.3 }),
            ..Default::default()
        };
        (layout, spec)
    }

    #[test]
    fn dense_reward_equals_progress() {
        let (mut layout, spec) = goal_layout();
        let cfg = TaskConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut prev = 1.0; // robot was at origin
        let (r, reached) =
            goal_task_step([0.1, 0.0], &mut layout, &mut prev, &spec, &cfg, &mut rng);
        assert!((r - 0.1).abs() < 1e-12);
        assert!(!reached);
        assert_eq!(prev, 0.9);
    }

    #[test]
    fn stationary_robot_gets_zero() {
        let (mut layout, spec) = goal_layout();
        let cfg = TaskConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut prev = 1.0;
        let (r, _) = goal_task_step([0.0, 0.0], &mut layout, &mut prev, &spec, &cfg, &mut rng);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn entering_goal_pays_bonus_and_resamples() {
        let (mut layout, spec) = goal_layout();
        let cfg = TaskConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let before = layout.goal.unwrap().center;
        let mut prev = 0.5;
        let (r, reached) =
            goal_task_step([0.95, 0.1], &mut layout, &mut prev, &spec, &cfg, &mut rng);
        assert!(reached);
        assert!(r > cfg.sparse_bonus - 1e-9);
        assert_ne!(layout.goal.unwrap().center, before);
    }

    #[test]
    fn push_rewards_box_progress() {
        let mut layout = WorldLayout {
            goal: Some(Disc { center: [2.0, 0.0], radius: 0.3 }),
            box_obj: Some(Disc { center: [1.0, 0.0], radius: 0.18 }),
            ..Default::default()
        };
        let spec = LayoutSpec::empty(2.5, 0.4);
        let cfg = TaskConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // no contact, nothing moved
        let mut prev = (1.0f64, 1.0);
        let (r, _) =
            push_task_step([0.0, 0.0], 0.18, &mut layout, &mut prev, &spec, &cfg, &mut rng);
        assert!(r.abs() < 1e-12);

        // overlap pushes the box along the contact normal toward the goal
        let mut prev = (0.36, 1.0);
        let (r, _) =
            push_task_step([0.7, 0.0], 0.18, &mut layout, &mut prev, &spec, &cfg, &mut rng);
        let box_now = layout.box_obj.unwrap();
        assert!(box_now.center[0] > 1.0);
        assert!(r > 0.0);
    }

    #[test]
    fn box_in_goal_circle_resamples_goal() {
        let mut layout = WorldLayout {
            goal: Some(Disc { center: [1.05, 0.0], radius: 0.3 }),
            box_obj: Some(Disc { center: [1.0, 0.0], radius: 0.18 }),
            ..Default::default()
        };
        let spec = {
            let mut s = LayoutSpec::empty(2.0, 0.4);
            s.goal_radius = Some(0.3);
            s
        };
        let cfg = TaskConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let before = layout.goal.unwrap().center;
        let mut prev = (2.0, 0.05);
        let (r, delivered) =
            push_task_step([-1.0, 0.0], 0.18, &mut layout, &mut prev, &spec, &cfg, &mut rng);
        assert!(delivered);
        assert!(r >= cfg.sparse_bonus - 1e-9);
        assert_ne!(layout.goal.unwrap().center, before);
    }

    #[test]
    fn pressing_goal_button_reassigns_it() {
        let mut spec = LayoutSpec::empty(2.0, 0.5);
        spec.n_buttons = 4;
        spec.n_gremlins = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut layout = sample_layout(&spec, &mut rng).unwrap();
        let cfg = TaskConfig::default();
        let goal_idx = layout.goal_button_index().unwrap();
        let goal_center = layout.buttons[goal_idx].disc.center;
        let mut prev = 0.0;
        let (r, _, pressed) = button_task_step(
            goal_center,
            0.18,
            &mut layout,
            0.02,
            &mut prev,
            &cfg,
            &mut rng,
        );
        assert!(pressed);
        assert!(r >= cfg.sparse_bonus - 1e-9);
        assert_ne!(layout.goal_button_index().unwrap(), goal_idx);
        assert_eq!(layout.buttons.iter().filter(|b| b.is_goal).count(), 1);
    }

    #[test]
    fn wrong_button_contact_is_counted() {
        let buttons = vec![
            ButtonObj { disc: Disc { center: [0.0, 0.0], radius: 0.15 }, is_goal: false },
            ButtonObj { disc: Disc { center: [5.0, 0.0], radius: 0.15 }, is_goal: true },
        ];
        let mut layout = WorldLayout { buttons, ..Default::default() };
        let cfg = TaskConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut prev = 5.0;
        let (_, wrong, pressed) =
            button_task_step([0.1, 0.0], 0.18, &mut layout, 0.0, &mut prev, &cfg, &mut rng);
        assert_eq!(wrong, 1.0);
        assert!(!pressed);
    }
}

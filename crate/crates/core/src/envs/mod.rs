//! Desk-scale planar environment suite: Point/Car navigation tasks with
//! constraint objects and pseudo-lidar observations, plus mass-point
//! locomotion surrogates (single and cooperative multi-agent).

pub mod coop;
pub mod costs;
pub mod dynamics;
pub mod layout;
pub mod lidar;
pub mod mass;
pub mod nav;
pub mod registry;
pub mod tasks;

pub use coop::CoopMassPointEnv;
pub use costs::{circle_reward_cost, contact_costs, velocity_cost, ContactCosts, CostConfig};
pub use dynamics::{
    car_dynamics, mass_point_dynamics, point_dynamics, wrap_angle, CarState, DynamicsParams,
    MassPointState, PointState,
};
pub use layout::{
    resample_goal, sample_layout, ButtonObj, Disc, GremlinOrbit, LayoutSpec, WorldLayout,
};
pub use lidar::pseudo_lidar;
pub use mass::{MassPointEnv, MassTask};
pub use nav::{NavEnv, RobotKind, TaskKind};
pub use registry::{
    binary_cost_env_ids, make_cmg_env, make_env, registered_cmg_ids, registered_env_ids,
    CostMode, EnvConfig,
};
pub use tasks::{button_task_step, goal_task_step, push_task_step, TaskConfig};

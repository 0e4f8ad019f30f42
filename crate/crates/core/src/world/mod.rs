//! Grid world, obstacle scripting and the single-integrator expert.

mod basing;
mod env;
mod grid;
mod planner;

pub use basing::BasingSchedule;
pub use env::{
    generate_environment, generate_environment_with, Environment, GoalSet, MovingObstacleScript, ObstacleField,
    DEFAULT_OBSTACLE_SPEED, FREEZE_RADIUS, GOALS, MOVING_OBSTACLES, STATIC_OBSTACLES,
};
pub use grid::{
    cell_center, cell_col_row, cell_index, cell_of, corner_cells, dist, dist_inf, in_workspace, neighbors, Point,
    CELL_COUNT, CELL_SIZE, COLS, ROWS, X_MAX, X_MIN, Y_MAX, Y_MIN,
};
pub use planner::{
    anchor_goal, blocked_cells, bfs_goal_choice, expert_plan, obstacle_margin, path_distance, spec_robustness,
    spec_robustness_to, ExpertConfig, ExpertPlan, GoalChoice, SpecRobustness, MOVING_CLEARANCE, SPEC_HORIZON,
    STATIC_CLEARANCE,
};

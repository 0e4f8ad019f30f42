use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dynamics::{wrap_angle, UnicycleState};
use crate::error::{Error, Result};
use crate::signal::{Signal, GRID_TOL};

use super::env::{Environment, GoalSet};
use super::grid::{self, cell_center, cell_of, dist, dist_inf, Point, CELL_COUNT};

/// Required ∞-norm clearance from static obstacle centers.
pub const STATIC_CLEARANCE: f64 = 0.2;
/// Required Euclidean clearance from moving obstacles.
pub const MOVING_CLEARANCE: f64 = 0.18;
/// Look-ahead of the progress clause, seconds.
pub const SPEC_HORIZON: f64 = 10.0;

/// Goal picked by the cell-count BFS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalChoice {
    pub cell: usize,
    /// Cells from the start cell to `cell`, both inclusive.
    pub path: Vec<usize>,
}

impl GoalChoice {
    pub fn center(&self) -> Point {
        cell_center(self.cell)
    }

    /// Number of cell transitions on the path.
    pub fn path_len(&self) -> usize {
        self.path.len() - 1
    }
}

fn start_cell(start: Point) -> Result<usize> {
    cell_of(start).ok_or_else(|| {
        Error::InvalidEnvironment(format!("point ({}, {}) lies outside the workspace", start[0], start[1]))
    })
}

/// 4-connected BFS from the cell containing `start` over cells that are
/// neither static obstacles nor `blocked`; the goal with the fewest cell
/// transitions wins, ties going to the lowest cell index. `Ok(None)` when
/// no goal of the set is reachable.
pub fn bfs_goal_choice(
    env: &Environment,
    start: Point,
    set: GoalSet,
    blocked: &BTreeSet<usize>,
) -> Result<Option<GoalChoice>> {
    let from = start_cell(start)?;
    let mut closed = env.static_set();
    closed.extend(blocked.iter().copied());
    closed.remove(&from);
    let (hops, parent) = grid::bfs(from, &closed);
    let best = env
        .goal_cells(set)
        .iter()
        .filter_map(|g| hops[*g].map(|h| (h, *g)))
        .min();
    Ok(best.map(|(_, cell)| GoalChoice { cell, path: grid::backtrack(&parent, cell) }))
}

/// Path distance `‖w − c‖` with `c` chosen by BFS from `x0_proj` over the
/// static map.
pub fn path_distance(env: &Environment, w: Point, x0_proj: Point, set: GoalSet) -> Result<f64> {
    let choice = bfs_goal_choice(env, x0_proj, set, &BTreeSet::new())?
        .ok_or_else(|| Error::PlanFailed(format!("no {} goal reachable from the anchor", set.label())))?;
    Ok(dist(w, choice.center()))
}

/// Obstacle-avoidance margin at `p` with moving obstacles at `moving`.
pub fn obstacle_margin(env: &Environment, p: Point, moving: &[Point]) -> f64 {
    let stat = env
        .static_obstacles
        .iter()
        .map(|c| dist_inf(p, cell_center(*c)) - STATIC_CLEARANCE);
    let mov = moving.iter().map(|o| dist(p, *o) - MOVING_CLEARANCE);
    stat.chain(mov).fold(f64::INFINITY, f64::min)
}

/// Cells whose centers lie within `MOVING_CLEARANCE + margin` of a moving
/// obstacle.
pub fn blocked_cells(moving: &[Point], margin: f64) -> BTreeSet<usize> {
    (0..CELL_COUNT)
        .filter(|c| moving.iter().any(|o| dist(cell_center(*c), *o) < MOVING_CLEARANCE + margin))
        .collect()
}

/// Goal anchoring the progress clause: BFS from `x0` avoiding cells blocked
/// by the (frozen) moving obstacles, falling back to the static map when
/// that leaves every goal unreachable.
pub fn anchor_goal(
    env: &Environment,
    x0: Point,
    set: GoalSet,
    moving: &[Point],
    block_margin: f64,
) -> Result<GoalChoice> {
    if let Some(choice) = bfs_goal_choice(env, x0, set, &blocked_cells(moving, block_margin))? {
        return Ok(choice);
    }
    bfs_goal_choice(env, x0, set, &BTreeSet::new())?
        .ok_or_else(|| Error::PlanFailed(format!("no {} goal reachable from the anchor", set.label())))
}

/// Value of the experiment's robustness measure and its two terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRobustness {
    pub value: f64,
    pub delta_p: f64,
    pub min_oa: f64,
    pub goal: usize,
}

/// `min(ΔP, min_{t′∈[t,t+10]} OA(Πs(t′)))` against the goal `goal`, with
/// `ΔP = ‖Πx₀ − c‖ − ‖Πs(t+10) − c‖` and the moving obstacles frozen at
/// `moving`. The minimum runs over the grid points of `s` in the window.
pub fn spec_robustness_to(
    env: &Environment,
    moving: &[Point],
    s: &Signal,
    t: f64,
    x0: Point,
    goal: usize,
) -> Result<SpecRobustness> {
    if s.dim() < 2 {
        return Err(Error::DimensionMismatch { expected: 3, got: s.dim() });
    }
    let end = t + SPEC_HORIZON;
    let tol = GRID_TOL * s.dt();
    if t < s.t0() - tol || end > s.horizon() + tol {
        return Err(Error::OutOfHorizon { t: end, t0: s.t0(), horizon: s.horizon() });
    }
    let lo = s.index_of(t).ok_or(Error::OffGrid { t })?;
    let hi = s.index_of(end).ok_or(Error::OffGrid { t: end })?;
    let c = cell_center(goal);
    let w_end = s.sample(hi);
    let delta_p = dist(x0, c) - dist([w_end[0], w_end[1]], c);
    let min_oa = (lo..=hi)
        .map(|k| {
            let w = s.sample(k);
            obstacle_margin(env, [w[0], w[1]], moving)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(SpecRobustness { value: delta_p.min(min_oa), delta_p, min_oa, goal })
}

/// Robustness of `s` at `t` for the goal set selected by `basing`, the goal
/// anchored at `x0` as in [`anchor_goal`] with the default blocking margin.
pub fn spec_robustness(
    env: &Environment,
    moving: &[Point],
    s: &Signal,
    t: f64,
    basing: bool,
    x0: Point,
) -> Result<SpecRobustness> {
    let goal = anchor_goal(env, x0, GoalSet::from_basing(basing), moving, ExpertConfig::default().block_margin)?;
    spec_robustness_to(env, moving, s, t, x0, goal.cell)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpertConfig {
    /// Cruise speed of the single integrator, m/s.
    pub speed: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Extra verification attempts with inflated blocking margins.
    pub retries: usize,
    /// Clearance beyond `MOVING_CLEARANCE` for blocking a cell.
    pub block_margin: f64,
    pub margin_step: f64,
    /// Rate used to size the initial dwell that lets a unicycle turn onto
    /// the first segment, rad/s.
    pub align_rate: f64,
    /// Heading error tolerated without a dwell, rad.
    pub align_tolerance: f64,
}

impl Default for ExpertConfig {
    fn default() -> Self {
        Self {
            speed: 0.15,
            horizon: SPEC_HORIZON,
            dt: 1.0 / 30.0,
            retries: 3,
            block_margin: 0.2,
            margin_step: 0.1,
            align_rate: 0.7,
            align_tolerance: 0.25,
        }
    }
}

impl ExpertConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.speed, self.horizon, self.dt, self.align_rate];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("expert speed, horizon, dt and align rate must be positive".into()));
        }
        if self.horizon < SPEC_HORIZON - GRID_TOL {
            return Err(Error::Config(format!("expert horizon must cover {SPEC_HORIZON} s")));
        }
        if !(self.block_margin >= 0.0 && self.margin_step >= 0.0 && self.align_tolerance >= 0.0) {
            return Err(Error::Config("expert margins must be non-negative".into()));
        }
        Ok(())
    }

    fn samples(&self) -> usize {
        (self.horizon / self.dt - GRID_TOL).ceil() as usize + 1
    }
}

/// A verified expert signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertPlan {
    pub signal: Signal,
    pub robustness: SpecRobustness,
    pub goal: GoalChoice,
    /// Verification attempts used (1 = first try).
    pub attempts: usize,
    /// The plan holds position because no path verified.
    pub holding: bool,
}

/// Single-integrator rollout through `waypoints` at constant speed after
/// `dwell` idle samples, lifted to `(w, θ)`.
fn rollout(start: Point, theta0: f64, waypoints: &[Point], dwell: usize, cfg: &ExpertConfig) -> Result<Signal> {
    let n = cfg.samples();
    let mut pos = Vec::with_capacity(n);
    let mut p = start;
    let mut next = 0;
    for k in 0..n {
        pos.push(p);
        if k < dwell {
            continue;
        }
        let mut budget = cfg.speed * cfg.dt;
        while budget > 0.0 && next < waypoints.len() {
            let d = dist(p, waypoints[next]);
            if d <= budget {
                p = waypoints[next];
                budget -= d;
                next += 1;
            } else {
                let f = budget / d;
                p = [p[0] + f * (waypoints[next][0] - p[0]), p[1] + f * (waypoints[next][1] - p[1])];
                budget = 0.0;
            }
        }
    }
    let headings = lift_headings(&pos, theta0);
    let data = pos.iter().zip(&headings).flat_map(|(p, th)| [p[0], p[1], *th]).collect();
    Signal::from_flat(0.0, cfg.dt, 3, data)
}

/// `θ_k = atan2` of the forward difference; held through stationary
/// stretches, with any leading stationary stretch taking the first moving
/// heading (or `theta0` if the signal never moves).
fn lift_headings(pos: &[Point], theta0: f64) -> Vec<f64> {
    let n = pos.len();
    let mut raw: Vec<Option<f64>> = (0..n)
        .map(|k| {
            let (a, b) = if k + 1 < n { (pos[k], pos[k + 1]) } else { (pos[k.saturating_sub(1)], pos[k]) };
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            (dx.hypot(dy) > 1e-12).then(|| dy.atan2(dx))
        })
        .collect();
    let first = raw.iter().flatten().next().copied().unwrap_or(theta0);
    let mut held = first;
    for r in raw.iter_mut() {
        held = r.unwrap_or(held);
        *r = Some(held);
    }
    raw.into_iter().map(|r| wrap_angle(r.unwrap_or(first))).collect()
}

/// Queries the single-integrator expert from `x_now` toward the active goal
/// set and verifies the result against the robustness measure; see
/// [`ExpertConfig`] for the knobs. Falls back to holding position when no
/// path verifies. Fails when even holding does not satisfy the measure or
/// no goal is reachable on the static map.
pub fn expert_plan(
    env: &Environment,
    moving: &[Point],
    x_now: &UnicycleState,
    basing: bool,
    cfg: &ExpertConfig,
) -> Result<ExpertPlan> {
    cfg.validate()?;
    let set = GoalSet::from_basing(basing);
    let x0 = x_now.position();
    let from = start_cell(x0)?;
    let goal = anchor_goal(env, x0, set, moving, cfg.block_margin)?;
    let mut attempts = 0;
    for k in 0..=cfg.retries {
        let margin = cfg.block_margin + k as f64 * cfg.margin_step;
        let mut closed = env.static_set();
        closed.extend(blocked_cells(moving, margin));
        closed.remove(&from);
        let (hops, parent) = grid::bfs(from, &closed);
        if hops[goal.cell].is_none() {
            break;
        }
        attempts += 1;
        let path = grid::backtrack(&parent, goal.cell);
        let waypoints: Vec<Point> = match path.as_slice() {
            [only] => vec![cell_center(*only)],
            cells => cells[1..].iter().map(|c| cell_center(*c)).collect(),
        };
        let first = waypoints[0];
        let heading = (first[1] - x0[1]).atan2(first[0] - x0[0]);
        let moving_far = dist(x0, first) > 1e-9;
        let misalign = if moving_far { wrap_angle(heading - x_now.theta).abs() } else { 0.0 };
        let dwell_s = (misalign - cfg.align_tolerance).max(0.0) / cfg.align_rate;
        let dwell = (dwell_s / cfg.dt).round() as usize;
        let signal = rollout(x0, x_now.theta, &waypoints, dwell, cfg)?;
        let robustness = spec_robustness_to(env, moving, &signal, 0.0, x0, goal.cell)?;
        if robustness.value >= 0.0 {
            let goal = GoalChoice { cell: goal.cell, path };
            return Ok(ExpertPlan { signal, robustness, goal, attempts, holding: false });
        }
    }
    let signal = Signal::constant(&x_now.to_vec(), 0.0, cfg.dt, cfg.samples())?;
    let robustness = spec_robustness_to(env, moving, &signal, 0.0, x0, goal.cell)?;
    if robustness.value >= 0.0 {
        return Ok(ExpertPlan { signal, robustness, goal, attempts: attempts + 1, holding: true });
    }
    Err(Error::PlanFailed(format!(
        "no satisfying expert after {} attempts (hold robustness {:.4})",
        attempts + 1,
        robustness.value
    )))
}

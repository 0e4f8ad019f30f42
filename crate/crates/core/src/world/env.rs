use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::UnicycleState;
use crate::error::{Error, Result};

use super::grid::{self, cell_center, cell_of, corner_cells, dist, neighbors, Point, CELL_COUNT};

pub const STATIC_OBSTACLES: usize = 8;
pub const MOVING_OBSTACLES: usize = 4;
pub const GOALS: usize = 3;
pub const FREEZE_RADIUS: f64 = 0.2;
pub const DEFAULT_OBSTACLE_SPEED: f64 = 0.1;
const MAX_ATTEMPTS: usize = 10_000;
const TOUR_STEPS: usize = 12;

/// Scripted moving obstacle: a ping-pong tour through adjacent free cell
/// centers at constant speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingObstacleScript {
    pub waypoints: Vec<usize>,
    pub speed: f64,
    pub freeze_radius: f64,
}

/// Active goal set: the generated goals `G` or the home corners `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GoalSet {
    #[serde(rename = "G")]
    Goals,
    #[serde(rename = "H")]
    Homes,
}

impl GoalSet {
    pub fn from_basing(basing: bool) -> Self {
        if basing {
            Self::Homes
        } else {
            Self::Goals
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Goals => "G",
            Self::Homes => "H",
        }
    }
}

/// Grid world on `[−1.6, 1.6] × [−1, 1]` with an 8 × 5 grid of 0.4 m cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub static_obstacles: Vec<usize>,
    pub moving_obstacles: Vec<MovingObstacleScript>,
    pub goals: Vec<usize>,
    pub homes: Vec<usize>,
    pub ego_init: UnicycleState,
}

impl Environment {
    /// Assembles an environment from explicit parts, checking structural
    /// consistency only (cell indices in range, scripts avoiding static
    /// cells). Counts are not enforced, so hand-built fixtures may use
    /// fewer obstacles.
    pub fn from_parts(
        static_obstacles: Vec<usize>,
        moving_obstacles: Vec<MovingObstacleScript>,
        goals: Vec<usize>,
        ego_init: UnicycleState,
    ) -> Result<Self> {
        let env = Self { seed: 0, static_obstacles, moving_obstacles, goals, homes: corner_cells(), ego_init };
        env.check_structure()?;
        Ok(env)
    }

    fn check_structure(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidEnvironment(msg));
        let cells = self
            .static_obstacles
            .iter()
            .chain(&self.goals)
            .chain(&self.homes)
            .chain(self.moving_obstacles.iter().flat_map(|m| &m.waypoints));
        if let Some(c) = cells.into_iter().find(|c| **c >= CELL_COUNT) {
            return bad(format!("cell index {c} out of range"));
        }
        let statics = self.static_set();
        for (i, m) in self.moving_obstacles.iter().enumerate() {
            if m.waypoints.is_empty() || !(m.speed > 0.0) {
                return bad(format!("moving obstacle {i} needs waypoints and a positive speed"));
            }
            if m.waypoints.iter().any(|c| statics.contains(c)) {
                return bad(format!("moving obstacle {i} tours through a static obstacle"));
            }
            if m.waypoints.windows(2).any(|w| !neighbors(w[0]).any(|n| n == w[1])) {
                return bad(format!("moving obstacle {i} tour skips between non-adjacent cells"));
            }
        }
        match cell_of(self.ego_init.position()) {
            Some(c) if statics.contains(&c) => bad("ego starts inside a static obstacle".into()),
            Some(_) => Ok(()),
            None => bad("ego starts outside the workspace".into()),
        }
    }

    pub fn static_set(&self) -> BTreeSet<usize> {
        self.static_obstacles.iter().copied().collect()
    }

    pub fn static_centers(&self) -> Vec<Point> {
        self.static_obstacles.iter().map(|c| cell_center(*c)).collect()
    }

    pub fn goal_cells(&self, set: GoalSet) -> &[usize] {
        match set {
            GoalSet::Goals => &self.goals,
            GoalSet::Homes => &self.homes,
        }
    }

    pub fn ego_cell(&self) -> usize {
        cell_of(self.ego_init.position()).expect("validated on construction")
    }

    /// Re-checks the placement conditions: 8 distinct static cells; ego and
    /// 4 moving-obstacle starts in distinct non-static cells; 3 distinct
    /// non-static goal cells; a feasible path from the ego cell to a goal;
    /// homes at the corners.
    pub fn check_conditions(&self) -> Result<()> {
        self.check_structure()?;
        let bad = |msg: &str| Err(Error::InvalidEnvironment(msg.to_string()));
        let statics = self.static_set();
        if self.static_obstacles.len() != STATIC_OBSTACLES || statics.len() != STATIC_OBSTACLES {
            return bad("need 8 static obstacles in distinct cells");
        }
        if self.moving_obstacles.len() != MOVING_OBSTACLES {
            return bad("need 4 moving obstacles");
        }
        let mut starts: BTreeSet<usize> = self.moving_obstacles.iter().map(|m| m.waypoints[0]).collect();
        starts.insert(self.ego_cell());
        if starts.len() != MOVING_OBSTACLES + 1 || starts.iter().any(|c| statics.contains(c)) {
            return bad("moving obstacles and ego must start in distinct free cells");
        }
        let goals: BTreeSet<usize> = self.goals.iter().copied().collect();
        if self.goals.len() != GOALS || goals.len() != GOALS || goals.iter().any(|g| statics.contains(g)) {
            return bad("need 3 distinct goal cells outside static obstacles");
        }
        if self.homes != corner_cells() {
            return bad("homes must be the four corner cells");
        }
        let (hops, _) = grid::bfs(self.ego_cell(), &statics);
        if !self.goals.iter().any(|g| hops[*g].is_some()) {
            return bad("no feasible path from the ego cell to a goal");
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Self = serde_json::from_str(text)?;
        env.check_structure()?;
        Ok(env)
    }
}

/// Random walk over cells outside `avoid`, avoiding immediate backtracking
/// when another neighbour is available.
fn random_tour(rng: &mut ChaCha8Rng, start: usize, avoid: &BTreeSet<usize>) -> Vec<usize> {
    let mut tour = vec![start];
    for _ in 0..TOUR_STEPS {
        let cur = *tour.last().expect("non-empty");
        let prev = tour.len().checked_sub(2).map(|i| tour[i]);
        let free: Vec<usize> = neighbors(cur).filter(|n| !avoid.contains(n)).collect();
        let forward: Vec<usize> = free.iter().copied().filter(|n| Some(*n) != prev).collect();
        let pool = if forward.is_empty() { &free } else { &forward };
        match pool.as_slice() {
            [] => break,
            cells => tour.push(cells[rng.random_range(0..cells.len())]),
        }
    }
    tour
}

/// Rejection-samples an environment; deterministic in `seed`.
pub fn generate_environment(seed: u64) -> Result<Environment> {
    generate_environment_with(seed, DEFAULT_OBSTACLE_SPEED)
}

pub fn generate_environment_with(seed: u64, obstacle_speed: f64) -> Result<Environment> {
    if !(obstacle_speed > 0.0) {
        return Err(Error::Config(format!("obstacle speed must be positive, got {obstacle_speed}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<usize> = (0..CELL_COUNT).collect();
    for _ in 0..MAX_ATTEMPTS {
        cells.shuffle(&mut rng);
        let mut statics = cells[..STATIC_OBSTACLES].to_vec();
        let free = &cells[STATIC_OBSTACLES..];
        let ego = free[0];
        let moving_starts = free[1..=MOVING_OBSTACLES].to_vec();
        let mut goal_pool: Vec<usize> = free.iter().copied().filter(|c| *c != ego).collect();
        goal_pool.shuffle(&mut rng);
        let mut goals = goal_pool[..GOALS].to_vec();
        statics.sort_unstable();
        goals.sort_unstable();
        let static_set: BTreeSet<usize> = statics.iter().copied().collect();
        let (hops, _) = grid::bfs(ego, &static_set);
        if !goals.iter().any(|g| hops[*g].is_some()) {
            continue;
        }
        // tours stay clear of the ego start, goal and home cells
        let mut avoid = static_set.clone();
        avoid.insert(ego);
        avoid.extend(goals.iter().copied());
        avoid.extend(corner_cells());
        let moving_obstacles = moving_starts
            .iter()
            .map(|s| MovingObstacleScript {
                waypoints: random_tour(&mut rng, *s, &avoid),
                speed: obstacle_speed,
                freeze_radius: FREEZE_RADIUS,
            })
            .collect();
        let [px, py] = cell_center(ego);
        let theta = rng.random_range(-PI..PI);
        let env = Environment {
            seed,
            static_obstacles: statics,
            moving_obstacles,
            goals,
            homes: corner_cells(),
            ego_init: UnicycleState::new(px, py, theta),
        };
        env.check_conditions()?;
        return Ok(env);
    }
    Err(Error::Generation { attempts: MAX_ATTEMPTS })
}

/// Runtime state of the moving obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleField {
    scripts: Vec<MovingObstacleScript>,
    positions: Vec<Point>,
    targets: Vec<usize>,
    forward: Vec<bool>,
}

impl ObstacleField {
    pub fn new(env: &Environment) -> Self {
        let scripts = env.moving_obstacles.clone();
        let positions = scripts.iter().map(|s| cell_center(s.waypoints[0])).collect();
        let targets = scripts.iter().map(|s| usize::from(s.waypoints.len() > 1)).collect();
        let forward = vec![true; scripts.len()];
        Self { scripts, positions, targets, forward }
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Advances every obstacle by `speed·dt` along its tour unless it is
    /// within its freeze radius of `ego`.
    pub fn advance(&mut self, dt: f64, ego: Point) {
        for i in 0..self.scripts.len() {
            let script = &self.scripts[i];
            if script.waypoints.len() < 2 || dist(self.positions[i], ego) <= script.freeze_radius {
                continue;
            }
            let mut budget = script.speed * dt;
            while budget > 0.0 {
                let goal = cell_center(script.waypoints[self.targets[i]]);
                let d = dist(self.positions[i], goal);
                if d <= budget {
                    self.positions[i] = goal;
                    budget -= d;
                    let last = script.waypoints.len() - 1;
                    let t = self.targets[i];
                    if (self.forward[i] && t == last) || (!self.forward[i] && t == 0) {
                        self.forward[i] = !self.forward[i];
                    }
                    self.targets[i] = if self.forward[i] { self.targets[i] + 1 } else { self.targets[i] - 1 };
                } else {
                    let p = self.positions[i];
                    let f = budget / d;
                    self.positions[i] = [p[0] + f * (goal[0] - p[0]), p[1] + f * (goal[1] - p[1])];
                    budget = 0.0;
                }
            }
        }
    }
}

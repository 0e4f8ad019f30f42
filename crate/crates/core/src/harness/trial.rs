use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::barrier::TimeVaryingBarrier;
use crate::dynamics::{lyapunov_nominal, step, unicycle_system, Integrator, UnicycleState};
use crate::error::{Error, Result};
use crate::signal::{WeightMatrix, GRID_TOL};
use crate::stl::LipschitzCertificate;
use crate::world::{
    dist, expert_plan, generate_environment_with, obstacle_margin, BasingSchedule, Environment, ExpertConfig,
    GoalSet, ObstacleField, Point, DEFAULT_OBSTACLE_SPEED, SPEC_HORIZON,
};

/// Distance to the chosen goal center at which a trial counts as arrived.
pub const GOAL_TOLERANCE: f64 = 0.2;
/// Constraint residual below which an applied input counts as saturated.
pub const SAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    pub seed: u64,
    pub duration: f64,
    pub dt: f64,
    pub replan_period: f64,
    pub alpha_gain: f64,
    pub lyapunov_gain: f64,
    pub basing: BasingSchedule,
    pub integrator: Integrator,
    pub obstacle_speed: f64,
    pub expert: ExpertConfig,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            duration: 60.0,
            dt: 1.0 / 30.0,
            replan_period: 0.25,
            alpha_gain: 2.0,
            lyapunov_gain: 2.0,
            basing: BasingSchedule::default(),
            integrator: Integrator::Rk4,
            obstacle_speed: DEFAULT_OBSTACLE_SPEED,
            expert: ExpertConfig::default(),
        }
    }
}

impl TrialConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Sets the control period and keeps the expert on the same grid.
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self.expert.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.dt, self.duration, self.replan_period, self.alpha_gain, self.lyapunov_gain];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("dt, duration, replan period and gains must be positive".into()));
        }
        if self.replan_period < self.dt * (1.0 - GRID_TOL) {
            return Err(Error::Config("replan period shorter than dt".into()));
        }
        if self.duration <= self.replan_period {
            return Err(Error::Config("duration must exceed the replan period".into()));
        }
        if !(self.obstacle_speed > 0.0 && self.obstacle_speed.is_finite()) {
            return Err(Error::Config("obstacle speed must be positive".into()));
        }
        if ((self.expert.dt - self.dt) / self.dt).abs() > GRID_TOL {
            return Err(Error::Config("expert dt must equal the control dt".into()));
        }
        self.expert.validate()
    }

    /// Steps between replans: the first step at or after each period mark.
    pub fn replan_steps(&self) -> usize {
        ((self.replan_period / self.dt) - GRID_TOL).ceil().max(1.0) as usize
    }

    pub fn max_steps(&self) -> usize {
        ((self.duration / self.dt) - GRID_TOL).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    Timeout,
    Violation,
    NumericError,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Self::GoalReached => "goal_reached",
            Self::Timeout => "timeout",
            Self::Violation => "violation",
            Self::NumericError => "numeric_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub px: f64,
    pub py: f64,
    pub theta: f64,
    pub v_nom: f64,
    pub w_nom: f64,
    pub v: f64,
    pub w: f64,
    /// The applied (boxed) input violates the barrier constraint.
    pub sat: bool,
    /// The box projection changed the filtered input.
    pub clamped: bool,
    pub h: Option<f64>,
    pub oa: f64,
    pub p: Option<f64>,
    pub goalset: GoalSet,
    /// Index into the replan records of the plan whose barrier is active.
    pub epoch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplanRecord {
    pub t: f64,
    pub success: bool,
    pub rho: Option<f64>,
    pub delta_p: Option<f64>,
    pub min_oa: Option<f64>,
    pub goal: Option<usize>,
    pub goalset: GoalSet,
    pub holding: bool,
    pub attempts: usize,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub seed: u64,
    pub config: TrialConfig,
    pub steps: Vec<StepRecord>,
    pub replans: Vec<ReplanRecord>,
    pub outcome: Outcome,
    pub t_end: f64,
    pub message: Option<String>,
}

pub const CSV_COLUMNS: [&str; 13] = ["t", "px", "py", "theta", "v_nom", "w_nom", "v", "w", "sat", "h", "oa", "p", "goalset"];

impl TrialLog {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per step, columns as in [`CSV_COLUMNS`]; `sat` is 0/1 and
    /// missing `h`/`p` values are empty.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_COLUMNS)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for s in &self.steps {
            w.write_record([
                s.t.to_string(),
                s.px.to_string(),
                s.py.to_string(),
                s.theta.to_string(),
                s.v_nom.to_string(),
                s.w_nom.to_string(),
                s.v.to_string(),
                s.w.to_string(),
                u8::from(s.sat).to_string(),
                opt(s.h),
                s.oa.to_string(),
                opt(s.p),
                s.goalset.label().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn write_json_path(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }

    pub fn read_json_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Certificate of the experiment's robustness measure: `L = 1` over
/// `[0, 10]` with the planar weights `diag(1, 1, 0)`.
pub fn spec_certificate() -> LipschitzCertificate {
    LipschitzCertificate {
        lipschitz: 1.0,
        window: [0.0, SPEC_HORIZON],
        weights: WeightMatrix::new(vec![1.0, 1.0, 0.0]).expect("valid weights"),
    }
}

struct ActivePlan {
    barrier: TimeVaryingBarrier,
    t_r: f64,
    goal: Point,
    epoch: usize,
}

/// Generates the environment for `cfg.seed` and runs the trial.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialLog> {
    cfg.validate()?;
    let env = generate_environment_with(cfg.seed, cfg.obstacle_speed)?;
    run_trial_in(&env, cfg)
}

/// Closed loop: replan every [`TrialConfig::replan_steps`] steps, filter
/// the Lyapunov input through the current barrier, step the plant, then
/// advance the obstacles.
pub fn run_trial_in(env: &Environment, cfg: &TrialConfig) -> Result<TrialLog> {
    cfg.validate()?;
    let sys = unicycle_system();
    let cert = spec_certificate();
    let mut field = ObstacleField::new(env);
    let mut x = env.ego_init;
    let mut plan: Option<ActivePlan> = None;
    let mut steps = Vec::new();
    let mut replans = Vec::new();
    let replan_every = cfg.replan_steps();
    let max_steps = cfg.max_steps();

    let finish = |steps, replans, outcome, t_end, message| TrialLog {
        seed: cfg.seed,
        config: cfg.clone(),
        steps,
        replans,
        outcome,
        t_end,
        message,
    };

    for k in 0..max_steps {
        let t = k as f64 * cfg.dt;
        let basing = cfg.basing.at(t);
        let goalset = GoalSet::from_basing(basing);
        if k % replan_every == 0 {
            match expert_plan(env, field.positions(), &x, basing, &cfg.expert) {
                Ok(p) => {
                    let r = &p.robustness;
                    replans.push(ReplanRecord {
                        t,
                        success: true,
                        rho: Some(r.value),
                        delta_p: Some(r.delta_p),
                        min_oa: Some(r.min_oa),
                        goal: Some(p.goal.cell),
                        goalset,
                        holding: p.holding,
                        attempts: p.attempts,
                        message: None,
                    });
                    let goal = p.goal.center();
                    let barrier = TimeVaryingBarrier::synthesize(p.signal, r.value, &cert)?;
                    plan = Some(ActivePlan { barrier, t_r: t, goal, epoch: replans.len() - 1 });
                }
                Err(Error::Numeric(msg)) => {
                    return Ok(finish(steps, replans, Outcome::NumericError, t, Some(msg)));
                }
                Err(e) => replans.push(ReplanRecord {
                    t,
                    success: false,
                    rho: None,
                    delta_p: None,
                    min_oa: None,
                    goal: None,
                    goalset,
                    holding: false,
                    attempts: cfg.expert.retries + 1,
                    message: Some(e.to_string()),
                }),
            }
        }

        let pos = x.position();
        let oa = obstacle_margin(env, pos, field.positions());
        let control = plan.as_ref().map(|a| -> Result<_> {
            let s = a.barrier.expert();
            let tau = (t - a.t_r).clamp(0.0, s.horizon());
            let s_t = s.sample_at(tau)?;
            let rate = a.barrier.expert_velocity(tau)?;
            let u_nom = lyapunov_nominal(&x, &s_t, &rate, cfg.lyapunov_gain)?;
            let filtered = a.barrier.filter_input(&sys, &x.to_vec(), tau, &u_nom, cfg.alpha_gain)?;
            let h = a.barrier.value(&x.to_vec(), tau)?;
            Ok((u_nom, filtered, h))
        });
        let (u_nom, u, sat, clamped, h) = match control.transpose() {
            Ok(Some((u_nom, f, h))) => {
                let sat = f.residual(&f.u) < -SAT_TOLERANCE;
                (u_nom, [f.u[0], f.u[1]], sat, f.clamped, Some(h))
            }
            Ok(None) => ([0.0; 2], [0.0; 2], false, false, None),
            Err(e) => return Ok(finish(steps, replans, Outcome::NumericError, t, Some(e.to_string()))),
        };
        let p = plan.as_ref().map(|a| dist(pos, a.goal));
        steps.push(StepRecord {
            t,
            px: x.px,
            py: x.py,
            theta: x.theta,
            v_nom: u_nom[0],
            w_nom: u_nom[1],
            v: u[0],
            w: u[1],
            sat,
            clamped,
            h,
            oa,
            p,
            goalset,
            epoch: plan.as_ref().map(|a| a.epoch),
        });

        if oa <= 0.0 {
            return Ok(finish(steps, replans, Outcome::Violation, t, None));
        }
        if p.is_some_and(|p| p <= GOAL_TOLERANCE) && !cfg.basing.pending_after(t) {
            return Ok(finish(steps, replans, Outcome::GoalReached, t, None));
        }
        match step(&sys, &x.to_vec(), &u, cfg.dt, cfg.integrator).and_then(|n| UnicycleState::from_slice(&n)) {
            Ok(next) => x = next,
            Err(e) => return Ok(finish(steps, replans, Outcome::NumericError, t, Some(e.to_string()))),
        }
        field.advance(cfg.dt, x.position());
    }
    Ok(finish(steps, replans, Outcome::Timeout, max_steps as f64 * cfg.dt, None))
}

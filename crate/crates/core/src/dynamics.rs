//! Plant and expert models plus fixed-step zero-order-hold integration.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::barrier::{ControlAffine, InputBox};
use crate::error::{Error, Result};
use crate::signal::check_dim;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Planar pose `(p_x, p_y, θ)` of a unicycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnicycleState {
    pub px: f64,
    pub py: f64,
    pub theta: f64,
}

impl UnicycleState {
    pub fn new(px: f64, py: f64, theta: f64) -> Self {
        Self { px, py, theta: wrap_angle(theta) }
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        check_dim(3, x.len())?;
        Ok(Self::new(x[0], x[1], x[2]))
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.px, self.py, self.theta]
    }

    pub fn position(&self) -> [f64; 2] {
        [self.px, self.py]
    }
}

/// `ẋ = [cos θ, 0; sin θ, 0; 0, 1] u` with `u = (v, ω)`.
#[derive(Debug, Clone)]
pub struct Unicycle {
    input_box: InputBox,
}

impl Default for Unicycle {
    fn default() -> Self {
        Self { input_box: InputBox::symmetric(&[0.2, FRAC_PI_4]).expect("valid box") }
    }
}

impl Unicycle {
    pub fn with_input_box(input_box: InputBox) -> Result<Self> {
        check_dim(2, input_box.bounds().len())?;
        Ok(Self { input_box })
    }
}

/// The unicycle with `𝒰 = [−0.2, 0.2] × [−π/4, π/4]`.
pub fn unicycle_system() -> Unicycle {
    Unicycle::default()
}

impl ControlAffine for Unicycle {
    fn state_dim(&self) -> usize {
        3
    }
    fn input_dim(&self) -> usize {
        2
    }
    fn drift(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; 3]
    }
    fn forcing(&self, x: &[f64]) -> DMatrix<f64> {
        let (s, c) = x[2].sin_cos();
        DMatrix::from_row_slice(3, 2, &[c, 0.0, s, 0.0, 0.0, 1.0])
    }
    fn input_box(&self) -> &InputBox {
        &self.input_box
    }
    fn normalize(&self, x: &mut [f64]) {
        x[2] = wrap_angle(x[2]);
    }
}

/// Planar single integrator `ẋ = u` with a per-axis speed cap.
#[derive(Debug, Clone)]
pub struct SingleIntegrator {
    input_box: InputBox,
}

impl SingleIntegrator {
    pub fn new(speed_cap: f64) -> Result<Self> {
        if !(speed_cap > 0.0) {
            return Err(Error::Config(format!("speed cap must be positive, got {speed_cap}")));
        }
        Ok(Self { input_box: InputBox::symmetric(&[speed_cap, speed_cap])? })
    }
}

impl Default for SingleIntegrator {
    fn default() -> Self {
        Self::new(0.2).expect("valid cap")
    }
}

pub fn single_integrator() -> SingleIntegrator {
    SingleIntegrator::default()
}

impl ControlAffine for SingleIntegrator {
    fn state_dim(&self) -> usize {
        2
    }
    fn input_dim(&self) -> usize {
        2
    }
    fn drift(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; 2]
    }
    fn forcing(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(2, 2)
    }
    fn input_box(&self) -> &InputBox {
        &self.input_box
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub integrator: Integrator,
    pub duration: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1.0 / 30.0, integrator: Integrator::Rk4, duration: 60.0 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration >= self.dt) {
            return Err(Error::Config(format!("duration {} shorter than dt {}", self.duration, self.dt)));
        }
        Ok(())
    }
}

/// One integration step of length `dt` with `u` held constant.
pub fn step(
    sys: &dyn ControlAffine,
    x: &[f64],
    u: &[f64],
    dt: f64,
    integrator: Integrator,
) -> Result<Vec<f64>> {
    check_dim(sys.state_dim(), x.len())?;
    check_dim(sys.input_dim(), u.len())?;
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let mut next = match integrator {
        Integrator::Euler => axpy(x, &sys.vector_field(x, u), dt),
        Integrator::Rk4 => {
            let k1 = sys.vector_field(x, u);
            let k2 = sys.vector_field(&axpy(x, &k1, dt / 2.0), u);
            let k3 = sys.vector_field(&axpy(x, &k2, dt / 2.0), u);
            let k4 = sys.vector_field(&axpy(x, &k3, dt), u);
            x.iter()
                .enumerate()
                .map(|(i, xi)| xi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        }
    };
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("integration produced {next:?} from x = {x:?}, u = {u:?}")));
    }
    sys.normalize(&mut next);
    Ok(next)
}

/// Minimum-norm input whose velocity best approximates the contraction
/// `ẋ = ṡ − gain·(x − s)`, i.e. `g(x)†(ṡ − gain·(x − s))`. The heading
/// error is wrapped before use. Unclamped.
pub fn lyapunov_nominal(x: &UnicycleState, s_t: &[f64], s_rate: &[f64], gain: f64) -> Result<[f64; 2]> {
    check_dim(3, s_t.len())?;
    check_dim(3, s_rate.len())?;
    if !(gain > 0.0) {
        return Err(Error::Config(format!("Lyapunov gain must be positive, got {gain}")));
    }
    let err = [x.px - s_t[0], x.py - s_t[1], wrap_angle(x.theta - s_t[2])];
    let target = DVector::from_iterator(3, (0..3).map(|i| s_rate[i] - gain * err[i]));
    let g = unicycle_system().forcing(&x.to_vec());
    let pinv = g
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::Numeric(format!("pseudo-inverse failed: {e}")))?;
    let u = pinv * target;
    Ok([u[0], u[1]])
}

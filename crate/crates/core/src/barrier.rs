//! Time-varying control barrier functions built around one expert signal,
//! and the single-constraint CBF-QP input filter.
//!
//! The barrier is
//!
//! ```text
//! h(x, t) = ρ₀² − L² (x − s(t))ᵀ Q (x − s(t))
//! ```
//!
//! where `s` is the expert, `ρ₀ = ρ_ψ(s, 0) ≥ 0` and `(L, Q)` come from the
//! specification's Lipschitz certificate. Its zero-superlevel set is a tube
//! of radius `ρ₀ / L` around the expert.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{check_dim, Signal, WeightMatrix};
use crate::stl::LipschitzCertificate;

/// Per-coordinate input bounds `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBox {
    bounds: Vec<(f64, f64)>,
}

impl InputBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::Config(format!("empty input box {bounds:?}")));
        }
        Ok(Self { bounds })
    }

    /// `[-r, r]` in every coordinate.
    pub fn symmetric(radii: &[f64]) -> Result<Self> {
        Self::new(radii.iter().map(|r| (-r, *r)).collect())
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.bounds.len() && u.iter().zip(&self.bounds).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Coordinate-wise projection onto the box.
    pub fn clamp(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.bounds).map(|(v, (lo, hi))| v.clamp(*lo, *hi)).collect()
    }
}

/// `ẋ = f(x) + g(x) u`.
pub trait ControlAffine: Send + Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn drift(&self, x: &[f64]) -> Vec<f64>;
    /// `n × m` forcing matrix.
    fn forcing(&self, x: &[f64]) -> DMatrix<f64>;
    fn input_box(&self) -> &InputBox;

    /// Canonicalizes a state after integration (e.g. wraps angles).
    fn normalize(&self, _x: &mut [f64]) {}

    fn vector_field(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let g = self.forcing(x);
        let mut dx = self.drift(x);
        for (i, d) in dx.iter_mut().enumerate() {
            *d += (0..u.len()).map(|j| g[(i, j)] * u[j]).sum::<f64>();
        }
        dx
    }
}

pub type DriftFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ForcingFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A control-affine system given by closures.
#[derive(Clone)]
pub struct ControlAffineSystem {
    n: usize,
    m: usize,
    drift: DriftFn,
    forcing: ForcingFn,
    input_box: InputBox,
}

impl ControlAffineSystem {
    pub fn new(
        n: usize,
        m: usize,
        drift: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        forcing: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        input_box: InputBox,
    ) -> Result<Self> {
        check_dim(m, input_box.bounds().len())?;
        Ok(Self { n, m, drift: Arc::new(drift), forcing: Arc::new(forcing), input_box })
    }
}

impl std::fmt::Debug for ControlAffineSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ControlAffineSystem")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("input_box", &self.input_box)
            .finish_non_exhaustive()
    }
}

impl ControlAffine for ControlAffineSystem {
    fn state_dim(&self) -> usize {
        self.n
    }
    fn input_dim(&self) -> usize {
        self.m
    }
    fn drift(&self, x: &[f64]) -> Vec<f64> {
        (self.drift)(x)
    }
    fn forcing(&self, x: &[f64]) -> DMatrix<f64> {
        (self.forcing)(x)
    }
    fn input_box(&self) -> &InputBox {
        &self.input_box
    }
}

/// Partial derivatives of the barrier.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierGradients {
    pub dx: Vec<f64>,
    pub dt: f64,
}

/// Result of [`TimeVaryingBarrier::filter_input`].
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredInput {
    /// Filtered input after projection onto the input box.
    pub u: Vec<f64>,
    /// Minimizer of `‖u − u_nom‖` subject to the barrier constraint, before
    /// the box projection.
    pub unclamped: Vec<f64>,
    /// Whether the constraint modified the nominal input.
    pub active: bool,
    /// Whether the box projection changed the input.
    pub clamped: bool,
    /// Constraint `a·u + c ≥ 0` with `a = gᵀ∂h/∂x`.
    pub a: Vec<f64>,
    pub c: f64,
}

impl FilteredInput {
    /// `a·u + c` for an arbitrary input.
    pub fn residual(&self, u: &[f64]) -> f64 {
        self.a.iter().zip(u).map(|(a, v)| a * v).sum::<f64>() + self.c
    }
}

/// `h(x,t) = ρ₀² − L²(x − s(t))ᵀQ(x − s(t))` around an expert signal `s`.
#[derive(Debug, Clone)]
pub struct TimeVaryingBarrier {
    expert: Signal,
    expert_rate: Signal,
    rho0: f64,
    lipschitz: f64,
    weights: WeightMatrix,
}

impl TimeVaryingBarrier {
    /// Builds the barrier from an expert whose robustness is `rho0`.
    pub fn synthesize(expert: Signal, rho0: f64, cert: &LipschitzCertificate) -> Result<Self> {
        Self::from_parts(expert, rho0, cert.lipschitz, cert.weights.clone())
    }

    pub fn from_parts(expert: Signal, rho0: f64, lipschitz: f64, weights: WeightMatrix) -> Result<Self> {
        if rho0.is_nan() || rho0 < 0.0 {
            return Err(Error::UnsatisfyingExpert { rho0 });
        }
        if !rho0.is_finite() || !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::Numeric(format!("rho0 = {rho0}, L = {lipschitz}")));
        }
        check_dim(expert.dim(), weights.dim())?;
        let expert_rate = expert.derivative();
        Ok(Self { expert, expert_rate, rho0, lipschitz, weights })
    }

    pub fn expert(&self) -> &Signal {
        &self.expert
    }

    pub fn expert_rate(&self) -> &Signal {
        &self.expert_rate
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    fn offset(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        check_dim(self.expert.dim(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite state {x:?}")));
        }
        let s = self.expert.sample_at(t)?;
        Ok(x.iter().zip(&s).map(|(a, b)| a - b).collect())
    }

    /// Expert velocity at `t`: the central difference at grid times, the
    /// slope of the interpolating segment in between.
    pub fn expert_velocity(&self, t: f64) -> Result<Vec<f64>> {
        let s = &self.expert;
        if let Some(k) = s.index_of(t) {
            return Ok(self.expert_rate.sample(k).to_vec());
        }
        if t < s.t0() || t > s.horizon() {
            return Err(Error::OutOfHorizon { t, t0: s.t0(), horizon: s.horizon() });
        }
        let k = (((t - s.t0()) / s.dt()).floor() as usize).min(s.len() - 2);
        Ok(s.sample(k + 1).iter().zip(s.sample(k)).map(|(b, a)| (b - a) / s.dt()).collect())
    }

    pub fn value(&self, x: &[f64], t: f64) -> Result<f64> {
        let e = self.offset(x, t)?;
        Ok(self.rho0 * self.rho0 - self.lipschitz * self.lipschitz * self.weights.norm_squared(&e)?)
    }

    /// `∂h/∂x = −2L²Q(x − s(t))`, `∂h/∂t = 2L²(x − s(t))ᵀQ ṡ(t)`.
    pub fn gradients(&self, x: &[f64], t: f64) -> Result<BarrierGradients> {
        let e = self.offset(x, t)?;
        let rate = self.expert_velocity(t)?;
        let l2 = self.lipschitz * self.lipschitz;
        let q = self.weights.diag();
        let dx = e.iter().zip(q).map(|(ei, qi)| -2.0 * l2 * qi * ei).collect();
        let dt = 2.0 * l2 * e.iter().zip(q).zip(&rate).map(|((ei, qi), ri)| ei * qi * ri).sum::<f64>();
        Ok(BarrierGradients { dx, dt })
    }

    /// Minimal-deviation input enforcing `ḣ(x,t,u) ≥ −α·h(x,t)`, then
    /// projected onto the input box.
    pub fn filter_input(
        &self,
        sys: &dyn ControlAffine,
        x: &[f64],
        t: f64,
        u_nom: &[f64],
        alpha_gain: f64,
    ) -> Result<FilteredInput> {
        if !(alpha_gain > 0.0 && alpha_gain.is_finite()) {
            return Err(Error::Config(format!("alpha gain must be positive, got {alpha_gain}")));
        }
        check_dim(sys.state_dim(), x.len())?;
        check_dim(sys.input_dim(), u_nom.len())?;
        let h = self.value(x, t)?;
        let grad = self.gradients(x, t)?;
        let f = sys.drift(x);
        let g = sys.forcing(x);
        if f.iter().chain(g.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite dynamics at x = {x:?}")));
        }
        let a: Vec<f64> = (0..sys.input_dim())
            .map(|j| (0..sys.state_dim()).map(|i| g[(i, j)] * grad.dx[i]).sum())
            .collect();
        let c = grad.dx.iter().zip(&f).map(|(d, fi)| d * fi).sum::<f64>() + grad.dt + alpha_gain * h;
        let dot = |u: &[f64]| a.iter().zip(u).map(|(ai, ui)| ai * ui).sum::<f64>();
        let slack = dot(u_nom) + c;
        let a_sq = dot(&a);
        let (unclamped, active) = if slack >= 0.0 || a_sq == 0.0 {
            (u_nom.to_vec(), false)
        } else {
            let step = slack / a_sq;
            (u_nom.iter().zip(&a).map(|(u, ai)| u - step * ai).collect(), true)
        };
        if unclamped.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite filtered input {unclamped:?}")));
        }
        let u = sys.input_box().clamp(&unclamped);
        let clamped = u != unclamped;
        Ok(FilteredInput { u, unclamped, active, clamped, a, c })
    }

    /// Writes the barrier as JSON plus a CSV file holding the expert.
    pub fn save(&self, json_path: impl AsRef<Path>, csv_path: impl AsRef<Path>) -> Result<()> {
        let csv_path = csv_path.as_ref();
        self.expert.write_csv_path(csv_path)?;
        let file = BarrierFile {
            rho0: self.rho0,
            lipschitz: self.lipschitz,
            weights: self.weights.clone(),
            expert: csv_path.to_path_buf(),
        };
        std::fs::write(json_path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    /// Loads a barrier; a relative expert path resolves against the JSON
    /// file's directory.
    pub fn load(json_path: impl AsRef<Path>) -> Result<Self> {
        let json_path = json_path.as_ref();
        let file: BarrierFile = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
        let csv = if file.expert.is_relative() {
            json_path.parent().unwrap_or(Path::new(".")).join(&file.expert)
        } else {
            file.expert.clone()
        };
        Self::from_parts(Signal::read_csv_path(csv)?, file.rho0, file.lipschitz, file.weights)
    }
}

/// On-disk form: `{rho0, L, weights, expert: <csv-path>}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarrierFile {
    pub rho0: f64,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    pub weights: WeightMatrix,
    pub expert: PathBuf,
}

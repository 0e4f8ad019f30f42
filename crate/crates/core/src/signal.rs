//! Uniformly sampled, finite-horizon signals in ℝⁿ.
//!
//! A [`Signal`] is evaluated by linear interpolation between samples, which
//! keeps the Lipschitz constant of the sampled data intact. Windowed
//! (semi)norms take a supremum over the sample grid plus the interpolated
//! window endpoints.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance (in units of `dt`) used to snap times onto the grid.
pub(crate) const GRID_TOL: f64 = 1e-9;

/// A value together with a flag recording whether a time window had to be
/// clamped to the signal horizon while computing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped<T> {
    pub value: T,
    pub clamped: bool,
}

/// Diagonal, non-negative weight matrix `Q` defining `‖v‖_Q = √(vᵀQv)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightMatrix {
    diag: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidWeights("empty diagonal".into()));
        }
        if diag.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "entries must be finite and non-negative: {diag:?}"
            )));
        }
        if diag.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidWeights("at least one entry must be positive".into()));
        }
        Ok(Self { diag })
    }

    pub fn identity(n: usize) -> Self {
        Self { diag: vec![1.0; n] }
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `√(Σᵢ Qᵢ vᵢ²)`.
    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        Ok(self.norm_squared(v)?.sqrt())
    }

    pub fn norm_squared(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.diag.len(), v.len())?;
        Ok(self.diag.iter().zip(v).map(|(q, x)| q * x * x).sum())
    }
}

impl TryFrom<Vec<f64>> for WeightMatrix {
    type Error = Error;

    fn try_from(diag: Vec<f64>) -> Result<Self> {
        Self::new(diag)
    }
}

impl From<WeightMatrix> for Vec<f64> {
    fn from(w: WeightMatrix) -> Self {
        w.diag
    }
}

/// Weighted Euclidean norm of a single vector.
pub fn weighted_norm(v: &[f64], weights: &WeightMatrix) -> Result<f64> {
    weights.norm(v)
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// A uniformly sampled trajectory `s: [t0, horizon] → ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    t0: f64,
    dt: f64,
    dim: usize,
    data: Vec<f64>,
}

impl Signal {
    pub fn new(t0: f64, dt: f64, samples: Vec<Vec<f64>>) -> Result<Self> {
        let dim = samples.first().map_or(0, Vec::len);
        if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        Self::from_flat(t0, dt, dim, samples.into_iter().flatten().collect())
    }

    /// Builds a signal from row-major sample data (`len · dim` values).
    pub fn from_flat(t0: f64, dt: f64, dim: usize, data: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidSignal(format!("dt must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidSignal(format!("t0 must be finite, got {t0}")));
        }
        if dim == 0 {
            return Err(Error::InvalidSignal("samples must have dimension ≥ 1".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::InvalidSignal(format!(
                "{} values do not divide into samples of dimension {dim}",
                data.len()
            )));
        }
        if data.len() / dim < 2 {
            return Err(Error::InvalidSignal("a signal needs at least 2 samples".into()));
        }
        Ok(Self { t0, dt, dim, data })
    }

    /// Samples `f` at `t0 + k·dt` for `k = 0..len`.
    pub fn from_fn(
        t0: f64,
        dt: f64,
        len: usize,
        mut f: impl FnMut(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let samples = (0..len).map(|k| f(t0 + k as f64 * dt)).collect();
        Self::new(t0, dt, samples)
    }

    pub fn constant(value: &[f64], t0: f64, dt: f64, len: usize) -> Result<Self> {
        Self::from_fn(t0, dt, len, |_| value.to_vec())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.time_at(self.len() - 1)
    }

    pub fn time_at(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Grid index of `t` if it lies on the sample grid (within tolerance).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let u = (t - self.t0) / self.dt;
        let k = u.round();
        if (u - k).abs() <= GRID_TOL && k >= 0.0 && (k as usize) < self.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    fn horizon_error(&self, t: f64) -> Error {
        Error::OutOfHorizon { t, t0: self.t0, horizon: self.horizon() }
    }

    /// Evaluates the signal at `t` by linear interpolation. Grid times return
    /// the stored sample exactly.
    pub fn sample_at(&self, t: f64) -> Result<Vec<f64>> {
        if !t.is_finite() {
            return Err(self.horizon_error(t));
        }
        if let Some(k) = self.index_of(t) {
            return Ok(self.sample(k).to_vec());
        }
        let u = (t - self.t0) / self.dt;
        let last = (self.len() - 1) as f64;
        if u < 0.0 || u > last {
            return Err(self.horizon_error(t));
        }
        let k = (u.floor() as usize).min(self.len() - 2);
        let frac = u - k as f64;
        let (lo, hi) = (self.sample(k), self.sample(k + 1));
        Ok(lo.iter().zip(hi).map(|(a, b)| a + frac * (b - a)).collect())
    }

    /// Sample times covering `[a, b]`: the endpoints plus every grid point
    /// strictly between them. The window is clamped to the horizon.
    fn window_times(&self, a: f64, b: f64) -> Result<Clamped<Vec<f64>>> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(Error::InvalidWindow { a, b, reason: "a > b" });
        }
        let horizon = self.horizon();
        let tol = GRID_TOL * self.dt;
        if a > horizon + tol || b < self.t0 - tol {
            return Err(Error::InvalidWindow { a, b, reason: "window lies outside the signal horizon" });
        }
        let clamped = a < self.t0 - tol || b > horizon + tol;
        let lo = a.max(self.t0).min(horizon);
        let hi = b.min(horizon).max(self.t0);
        let mut times = vec![lo];
        let first = ((lo - self.t0) / self.dt - GRID_TOL).ceil().max(0.0) as usize;
        for k in first..self.len() {
            let tk = self.time_at(k);
            if tk > hi + tol {
                break;
            }
            if tk > lo + tol && tk < hi - tol {
                times.push(tk);
            }
        }
        if hi > lo {
            times.push(hi);
        }
        Ok(Clamped { value: times, clamped })
    }

    /// Windowed weighted (semi)norm `sup_{t∈[a,b]} ‖s(t)‖_Q`.
    pub fn semi_norm(&self, a: f64, b: f64, weights: &WeightMatrix) -> Result<Clamped<f64>> {
        check_dim(self.dim, weights.dim())?;
        let times = self.window_times(a, b)?;
        let mut best = 0.0_f64;
        for t in &times.value {
            best = best.max(weights.norm(&self.sample_at(*t)?)?);
        }
        Ok(Clamped { value: best, clamped: times.clamped })
    }

    /// Applies `f` to every sample, keeping the grid.
    pub fn map(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Signal> {
        let samples = self.samples().map(&mut f).collect();
        Signal::new(self.t0, self.dt, samples)
    }

    pub fn scaled(&self, factor: f64) -> Signal {
        Signal { data: self.data.iter().map(|v| v * factor).collect(), ..self.clone() }
    }

    /// Restricts the signal to the grid points inside `[a, b]`.
    pub fn slice(&self, a: f64, b: f64) -> Result<Signal> {
        let first = ((a - self.t0) / self.dt - GRID_TOL).ceil().max(0.0) as usize;
        let last = (((b - self.t0) / self.dt + GRID_TOL).floor() as usize).min(self.len() - 1);
        if a > b || first >= last {
            return Err(Error::InvalidWindow { a, b, reason: "fewer than two samples in window" });
        }
        Signal::from_flat(
            self.time_at(first),
            self.dt,
            self.dim,
            self.data[first * self.dim..(last + 1) * self.dim].to_vec(),
        )
    }

    /// Central finite-difference derivative on the same grid (one-sided at
    /// the ends).
    pub fn derivative(&self) -> Signal {
        let n = self.len();
        let mut data = Vec::with_capacity(self.data.len());
        for k in 0..n {
            let (lo, hi) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            let span = (hi - lo) as f64 * self.dt;
            data.extend(self.sample(hi).iter().zip(self.sample(lo)).map(|(b, a)| (b - a) / span));
        }
        Signal { data, ..self.clone() }
    }

    /// Reads a signal from CSV with header `t,x1,...,xn`.
    pub fn read_csv(reader: impl Read) -> Result<Signal> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("t") || headers.len() < 2 {
            return Err(Error::InvalidSignal("CSV header must be `t,x1,...,xn`".into()));
        }
        let dim = headers.len() - 1;
        let mut times = Vec::new();
        let mut data = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let mut values = row.iter().map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSignal(format!("not a number: `{field}`")))
            });
            times.push(values.next().transpose()?.unwrap_or(f64::NAN));
            for v in values {
                data.push(v?);
            }
            if data.len() != times.len() * dim {
                return Err(Error::InvalidSignal(format!("row {} has the wrong width", times.len())));
            }
        }
        if times.len() < 2 {
            return Err(Error::InvalidSignal("a signal needs at least 2 samples".into()));
        }
        let t0 = times[0];
        let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
        for (k, t) in times.iter().enumerate() {
            if !((t - (t0 + k as f64 * dt)).abs() <= GRID_TOL * dt) {
                return Err(Error::InvalidSignal(format!(
                    "non-uniform sample spacing at row {k} (t = {t})"
                )));
            }
        }
        Signal::from_flat(t0, dt, dim, data)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Signal> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|i| format!("x{i}")));
        wtr.write_record(&header)?;
        for (k, s) in self.samples().enumerate() {
            let mut row = vec![self.time_at(k).to_string()];
            row.extend(s.iter().map(f64::to_string));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Pointwise difference `s − z` on the overlap of the two horizons,
/// resampled onto the finer of the two grids.
pub fn signal_difference(s: &Signal, z: &Signal) -> Result<Signal> {
    check_dim(s.dim, z.dim)?;
    let start = s.t0.max(z.t0);
    let end = s.horizon().min(z.horizon());
    let dt = s.dt.min(z.dt);
    if end - start < dt * (1.0 - GRID_TOL) {
        return Err(Error::InvalidSignal(format!(
            "horizons [{}, {}] and [{}, {}] do not overlap",
            s.t0,
            s.horizon(),
            z.t0,
            z.horizon()
        )));
    }
    let len = ((end - start) / dt + GRID_TOL).floor() as usize + 1;
    Signal::from_fn(start, dt, len, |t| {
        let a = s.sample_at(t).expect("inside overlap");
        let b = z.sample_at(t).expect("inside overlap");
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Signal {
        Signal::from_fn(0.0, 0.5, 5, |t| vec![t, 0.0]).unwrap()
    }

    #[test]
    fn sample_at_interpolates_and_rejects_out_of_range() {
        let s = Signal::new(0.0, 1.0, vec![vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(s.sample_at(0.5).unwrap(), vec![1.0]);
        assert!(matches!(s.sample_at(2.0), Err(Error::OutOfHorizon { .. })));
        assert!(s.sample_at(-0.1).is_err());

        let c = Signal::constant(&[1.0, 2.0], 0.0, 0.1, 11).unwrap();
        for t in [0.0, 0.05, 0.33, 1.0] {
            assert_eq!(c.sample_at(t).unwrap(), vec![1.0, 2.0]);
        }
    }

    #[test]
    fn construction_errors() {
        assert!(Signal::new(0.0, 0.0, vec![vec![1.0], vec![2.0]]).is_err());
        assert!(Signal::new(0.0, 1.0, vec![vec![1.0]]).is_err());
        assert!(matches!(
            Signal::new(0.0, 1.0, vec![vec![1.0], vec![2.0, 3.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn weighted_norm_examples() {
        let q = WeightMatrix::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(weighted_norm(&[3.0, 4.0, 7.0], &q).unwrap(), 5.0);
        assert_eq!(weighted_norm(&[0.0, 0.0, 0.0], &q).unwrap(), 0.0);
        assert_eq!(weighted_norm(&[3.0, 4.0], &WeightMatrix::identity(2)).unwrap(), 5.0);
        assert!(weighted_norm(&[3.0, 4.0], &q).is_err());
        assert!(WeightMatrix::new(vec![0.0, 0.0]).is_err());
        assert!(WeightMatrix::new(vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn semi_norm_examples() {
        let q = WeightMatrix::identity(2);
        let c = Signal::constant(&[3.0, 4.0], 0.0, 0.25, 21).unwrap();
        assert_eq!(c.semi_norm(0.0, 5.0, &q).unwrap().value, 5.0);

        let s = ramp();
        let r = s.semi_norm(0.0, 2.0, &q).unwrap();
        assert_eq!(r.value, 2.0);
        assert!(!r.clamped);

        // interpolated endpoint inside the grid
        assert!((s.semi_norm(0.0, 1.2, &q).unwrap().value - 1.2).abs() < 1e-12);
        assert!(s.semi_norm(1.0, 0.5, &q).is_err());
        assert!(s.semi_norm(3.0, 4.0, &q).is_err());
    }

    #[test]
    fn semi_norm_clamps_past_horizon() {
        let r = ramp().semi_norm(1.0, 10.0, &WeightMatrix::identity(2)).unwrap();
        assert!(r.clamped);
        assert_eq!(r.value, 2.0);
    }

    #[test]
    fn difference_examples() {
        let s = Signal::constant(&[2.0], 0.0, 0.1, 11).unwrap();
        let z = Signal::constant(&[1.0], 0.0, 0.1, 11).unwrap();
        let d = signal_difference(&s, &z).unwrap();
        assert!(d.samples().all(|v| v == [1.0]));
        assert!(signal_difference(&s, &s).unwrap().samples().all(|v| v == [0.0]));

        let wide = Signal::constant(&[1.0, 1.0], 0.0, 0.1, 11).unwrap();
        assert!(signal_difference(&s, &wide).is_err());
        let later = Signal::constant(&[1.0], 5.0, 0.1, 11).unwrap();
        assert!(signal_difference(&s, &later).is_err());
    }

    #[test]
    fn difference_resamples_onto_finer_grid() {
        let s = Signal::from_fn(0.0, 0.5, 5, |t| vec![t]).unwrap();
        let z = Signal::from_fn(0.5, 0.25, 5, |_| vec![0.0]).unwrap();
        let d = signal_difference(&s, &z).unwrap();
        assert_eq!(d.dt(), 0.25);
        assert_eq!(d.t0(), 0.5);
        assert_eq!(d.len(), 5);
        assert!((d.sample_at(0.75).unwrap()[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_ramp() {
        let d = ramp().derivative();
        assert!(d.samples().all(|v| (v[0] - 1.0).abs() < 1e-12 && v[1] == 0.0));
    }

    #[test]
    fn csv_round_trip_and_spacing_check() {
        let s = Signal::from_fn(0.0, 1.0 / 30.0, 40, |t| vec![t.sin(), t.cos()]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = Signal::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), s.len());
        assert_eq!(back.dim(), 2);
        for (a, b) in s.samples().zip(back.samples()) {
            assert_eq!(a, b);
        }

        let bad = "t,x1\n0,1\n1,2\n2.5,3\n";
        assert!(Signal::read_csv(bad.as_bytes()).is_err());
        let bad_header = "time,x1\n0,1\n1,2\n";
        assert!(Signal::read_csv(bad_header.as_bytes()).is_err());
    }
}

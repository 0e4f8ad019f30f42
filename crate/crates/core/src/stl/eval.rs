//! Boolean and quantitative semantics on the sample grid.
//!
//! Both evaluators compute the value of every subformula at every grid
//! index bottom-up. Temporal windows `[t+a, t+b]` become index ranges; a
//! window that runs past the last sample is clamped to it, and the result
//! is flagged. An index whose clamped window is empty has no value.
//!
//! For `φ₁ U[a,b] φ₂` both semantics quantify `φ₁` over `[t+a, t′]`, so the
//! sign of the robustness always agrees with Boolean satisfaction away from
//! zero.

use crate::error::{Error, Result};
use crate::signal::{Clamped, Signal, GRID_TOL};

use super::formula::{Formula, Interval};

/// Index offsets covered by `interval` on a grid of spacing `dt`.
fn offsets(interval: &Interval, dt: f64) -> Result<(usize, usize)> {
    let lo = (interval.lo() / dt - GRID_TOL).ceil().max(0.0) as usize;
    let hi = (interval.hi() / dt + GRID_TOL).floor() as usize;
    if lo > hi {
        return Err(Error::InvalidInterval {
            a: interval.lo(),
            b: interval.hi(),
            reason: "interval contains no sample time",
        });
    }
    Ok((lo, hi))
}

/// Operations shared by the two semantics.
trait Semantics {
    type V: Copy;
    fn top() -> Self::V;
    fn atom(f: &Formula, x: &[f64]) -> Self::V;
    fn neg(v: Self::V) -> Self::V;
    fn meet(a: Self::V, b: Self::V) -> Self::V;
    fn join(a: Self::V, b: Self::V) -> Self::V;
    fn bottom() -> Self::V;
}

struct Quantitative;
struct Qualitative;

impl Semantics for Quantitative {
    type V = f64;
    fn top() -> f64 {
        f64::INFINITY
    }
    fn bottom() -> f64 {
        f64::NEG_INFINITY
    }
    fn atom(f: &Formula, x: &[f64]) -> f64 {
        match f {
            Formula::Atom(p) => p.margin_unchecked(x),
            _ => unreachable!(),
        }
    }
    fn neg(v: f64) -> f64 {
        -v
    }
    fn meet(a: f64, b: f64) -> f64 {
        a.min(b)
    }
    fn join(a: f64, b: f64) -> f64 {
        a.max(b)
    }
}

impl Semantics for Qualitative {
    type V = bool;
    fn top() -> bool {
        true
    }
    fn bottom() -> bool {
        false
    }
    fn atom(f: &Formula, x: &[f64]) -> bool {
        Quantitative::atom(f, x) >= 0.0
    }
    fn neg(v: bool) -> bool {
        !v
    }
    fn meet(a: bool, b: bool) -> bool {
        a && b
    }
    fn join(a: bool, b: bool) -> bool {
        a || b
    }
}

fn trace<S: Semantics>(f: &Formula, s: &Signal) -> Result<Vec<Option<S::V>>> {
    let n = s.len();
    Ok(match f {
        Formula::True => vec![Some(S::top()); n],
        Formula::Atom(_) => s.samples().map(|x| Some(S::atom(f, x))).collect(),
        Formula::Not(g) => trace::<S>(g, s)?.into_iter().map(|v| v.map(S::neg)).collect(),
        Formula::And(l, r) | Formula::Or(l, r) => {
            let op = if matches!(f, Formula::And(..)) { S::meet } else { S::join };
            let (l, r) = (trace::<S>(l, s)?, trace::<S>(r, s)?);
            l.into_iter().zip(r).map(|(a, b)| Some(op(a?, b?))).collect()
        }
        Formula::Until { interval, left, right } => {
            let (lo, hi) = offsets(interval, s.dt())?;
            let (l, r) = (trace::<S>(left, s)?, trace::<S>(right, s)?);
            (0..n)
                .map(|i| {
                    let start = i + lo;
                    if start >= n {
                        return None;
                    }
                    let end = (i + hi).min(n - 1);
                    let mut prefix = S::top();
                    let mut best = S::bottom();
                    for k in start..=end {
                        prefix = S::meet(prefix, l[k]?);
                        best = S::join(best, S::meet(r[k]?, prefix));
                    }
                    Some(best)
                })
                .collect()
        }
    })
}

fn locate(f: &Formula, s: &Signal, t: f64) -> Result<(usize, bool)> {
    if let Some(dim) = f.dim() {
        f.check_dims(dim)?;
        crate::signal::check_dim(dim, s.dim())?;
    }
    if t < s.t0() - GRID_TOL * s.dt() || t > s.horizon() + GRID_TOL * s.dt() {
        return Err(Error::OutOfHorizon { t, t0: s.t0(), horizon: s.horizon() });
    }
    let k = s.index_of(t).ok_or(Error::OffGrid { t })?;
    let clamped = t + f.lookahead() > s.horizon() + GRID_TOL * s.dt();
    Ok((k, clamped))
}

fn at<V>(values: Vec<Option<V>>, k: usize, f: &Formula, s: &Signal, t: f64) -> Result<V>
where
    V: Copy,
{
    values[k].ok_or(Error::OutOfHorizon { t: t + f.lookahead(), t0: s.t0(), horizon: s.horizon() })
}

/// Boolean satisfaction `(s, t) ⊨ φ`.
pub fn eval_boolean(f: &Formula, s: &Signal, t: f64) -> Result<Clamped<bool>> {
    let (k, clamped) = locate(f, s, t)?;
    let value = at(trace::<Qualitative>(f, s)?, k, f, s, t)?;
    Ok(Clamped { value, clamped })
}

/// Robustness `ρ_φ(s, t)`. `TRUE` contributes `+∞`.
pub fn eval_robustness(f: &Formula, s: &Signal, t: f64) -> Result<Clamped<f64>> {
    let (k, clamped) = locate(f, s, t)?;
    let value = at(trace::<Quantitative>(f, s)?, k, f, s, t)?;
    Ok(Clamped { value, clamped })
}

/// Robustness at every sample time (`None` where the formula's windows run
/// entirely past the horizon).
pub fn robustness_trace(f: &Formula, s: &Signal) -> Result<Vec<Option<f64>>> {
    if let Some(dim) = f.dim() {
        crate::signal::check_dim(dim, s.dim())?;
    }
    trace::<Quantitative>(f, s)
}

/// For a formula rooted at `Until`, the earliest grid time `t′` attaining
/// the maximum in its robustness at time `t`.
pub fn until_witness(f: &Formula, s: &Signal, t: f64) -> Result<Option<f64>> {
    let Formula::Until { interval, left, right } = f else {
        return Ok(None);
    };
    let (k, _) = locate(f, s, t)?;
    let (lo, hi) = offsets(interval, s.dt())?;
    let (l, r) = (trace::<Quantitative>(left, s)?, trace::<Quantitative>(right, s)?);
    let n = s.len();
    if k + lo >= n {
        return Ok(None);
    }
    let mut prefix = f64::INFINITY;
    let mut best: Option<(f64, usize)> = None;
    for j in k + lo..=(k + hi).min(n - 1) {
        let (Some(lj), Some(rj)) = (l[j], r[j]) else { return Ok(None) };
        prefix = prefix.min(lj);
        let v = rj.min(prefix);
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, j));
        }
    }
    Ok(best.map(|(_, j)| s.time_at(j)))
}

//! Random generators and brute-force reference evaluators shared by the
//! integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stl_shield::stl::{Formula, Predicate, PredicateKind};
use stl_shield::Signal;

pub use rand::SeedableRng;

pub mod world;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_predicates(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Arc<Predicate>> {
    let point = |rng: &mut ChaCha8Rng| (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect::<Vec<f64>>();
    (0..4)
        .map(|i| {
            let id = format!("p{i}");
            let p = match rng.random_range(0..3) {
                0 => {
                    let mut normal = point(rng);
                    normal[0] += 0.1;
                    Predicate::halfspace(id, normal, rng.random_range(-1.0..1.0))
                }
                1 => Predicate::ball(id, point(rng), rng.random_range(0.3..2.0)),
                _ => Predicate::box_inf(id, point(rng), rng.random_range(0.3..2.0)),
            };
            Arc::new(p.unwrap())
        })
        .collect()
}

/// Random formula of depth ≤ `depth` with grid-aligned intervals.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize, preds: &[Arc<Predicate>], dt: f64) -> Formula {
    let atom = |rng: &mut ChaCha8Rng| Formula::atom(preds[rng.random_range(0..preds.len())].clone());
    if depth == 0 {
        return if rng.random_bool(0.05) { Formula::True } else { atom(rng) };
    }
    let interval = |rng: &mut ChaCha8Rng| {
        let a = rng.random_range(0..5) as f64 * dt;
        (a, a + rng.random_range(0..8) as f64 * dt)
    };
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, depth - 1, preds, dt);
    match rng.random_range(0..7) {
        0 => atom(rng),
        1 => Formula::not(sub(rng)),
        2 => Formula::and(sub(rng), sub(rng)),
        3 => Formula::or(sub(rng), sub(rng)),
        4 => {
            let (a, b) = interval(rng);
            Formula::until(a, b, sub(rng), sub(rng)).unwrap()
        }
        5 => {
            let (a, b) = interval(rng);
            Formula::eventually(a, b, sub(rng)).unwrap()
        }
        _ => {
            let (a, b) = interval(rng);
            Formula::always(a, b, sub(rng)).unwrap()
        }
    }
}

/// Bounded random walk in `[-2, 2]ⁿ`.
pub fn random_signal(rng: &mut ChaCha8Rng, len: usize, dim: usize, dt: f64) -> Signal {
    let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut data = Vec::with_capacity(len * dim);
    for _ in 0..len {
        data.extend_from_slice(&x);
        for v in x.iter_mut() {
            *v = (*v + rng.random_range(-0.4..0.4)).clamp(-2.0, 2.0);
        }
    }
    Signal::from_flat(0.0, dt, dim, data).unwrap()
}

/// `s` plus a uniform perturbation of at most `eps` per coordinate.
pub fn perturbed(rng: &mut ChaCha8Rng, s: &Signal, eps: f64) -> Signal {
    let data = s.samples().flat_map(|x| x.to_vec()).map(|v| v + rng.random_range(-eps..=eps)).collect();
    Signal::from_flat(s.t0(), s.dt(), s.dim(), data).unwrap()
}

fn margin(p: &Predicate, x: &[f64]) -> f64 {
    match p.kind() {
        PredicateKind::Halfspace { normal, offset } => offset - normal.iter().zip(x).map(|(n, v)| n * v).sum::<f64>(),
        PredicateKind::Ball { center, radius } => {
            radius - center.iter().zip(x).map(|(c, v)| (v - c).powi(2)).sum::<f64>().sqrt()
        }
        PredicateKind::BoxInf { center, radius } => {
            radius - center.iter().zip(x).map(|(c, v)| (v - c).abs()).fold(0.0, f64::max)
        }
        PredicateKind::Custom { .. } => p.margin(x).unwrap(),
    }
}

/// Sample indices whose times fall in `[t_i + a, t_i + b]`, clamped to the
/// signal; `None` when the window starts past the last sample.
fn window(s: &Signal, i: usize, a: f64, b: f64) -> Option<Vec<usize>> {
    let (t, eps) = (s.time_at(i), 1e-9 * s.dt());
    if t + a > s.horizon() + eps {
        return None;
    }
    Some((0..s.len()).filter(|k| s.time_at(*k) >= t + a - eps && s.time_at(*k) <= t + b + eps).collect())
}

/// Reference robustness by direct recursion on the definition, O(T²) per
/// Until node and time.
pub fn naive_rho(f: &Formula, s: &Signal, i: usize) -> Option<f64> {
    match f {
        Formula::True => Some(f64::INFINITY),
        Formula::Atom(p) => Some(margin(p, s.sample(i))),
        Formula::Not(g) => naive_rho(g, s, i).map(|v| -v),
        Formula::And(l, r) => Some(naive_rho(l, s, i)?.min(naive_rho(r, s, i)?)),
        Formula::Or(l, r) => Some(naive_rho(l, s, i)?.max(naive_rho(r, s, i)?)),
        Formula::Until { interval, left, right } => {
            let ks = window(s, i, interval.lo(), interval.hi())?;
            let mut best = f64::NEG_INFINITY;
            for (j, &k) in ks.iter().enumerate() {
                let mut inner = naive_rho(right, s, k)?;
                for &m in &ks[..=j] {
                    inner = inner.min(naive_rho(left, s, m)?);
                }
                best = best.max(inner);
            }
            Some(best)
        }
    }
}

/// Reference Boolean semantics by direct recursion.
pub fn naive_sat(f: &Formula, s: &Signal, i: usize) -> Option<bool> {
    match f {
        Formula::True => Some(true),
        Formula::Atom(p) => Some(margin(p, s.sample(i)) >= 0.0),
        Formula::Not(g) => naive_sat(g, s, i).map(|v| !v),
        Formula::And(l, r) => Some(naive_sat(l, s, i)? && naive_sat(r, s, i)?),
        Formula::Or(l, r) => Some(naive_sat(l, s, i)? || naive_sat(r, s, i)?),
        Formula::Until { interval, left, right } => {
            let ks = window(s, i, interval.lo(), interval.hi())?;
            let mut any = false;
            for (j, &k) in ks.iter().enumerate() {
                let mut ok = naive_sat(right, s, k)?;
                for &m in &ks[..=j] {
                    ok &= naive_sat(left, s, m)?;
                }
                any |= ok;
            }
            Some(any)
        }
    }
}

/// Sup over the window of the weighted norm of `s − z`, sampled on the
/// shared grid.
pub fn naive_seminorm(s: &Signal, z: &Signal, a: f64, b: f64, q: &[f64]) -> f64 {
    let eps = 1e-9 * s.dt();
    (0..s.len())
        .filter(|k| s.time_at(*k) >= a - eps && s.time_at(*k) <= b + eps)
        .map(|k| {
            let d: f64 = s.sample(k).iter().zip(z.sample(k)).zip(q).map(|((x, y), w)| w * (x - y).powi(2)).sum();
            d.sqrt()
        })
        .fold(0.0, f64::max)
}

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::check_dim;

pub type MarginFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Geometry of an atomic proposition. `μ(x)` holds iff the margin is ≥ 0.
#[derive(Clone)]
pub enum PredicateKind {
    /// `offset − normal·x` with a unit normal.
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// `radius − ‖x − center‖₂`.
    Ball { center: Vec<f64>, radius: f64 },
    /// `radius − ‖x − center‖∞`.
    BoxInf { center: Vec<f64>, radius: f64 },
    /// User-supplied margin with an asserted Lipschitz constant.
    Custom { margin: MarginFn, lipschitz: f64 },
}

impl fmt::Debug for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Halfspace { normal, offset } => {
                f.debug_struct("Halfspace").field("normal", normal).field("offset", offset).finish()
            }
            Self::Ball { center, radius } => {
                f.debug_struct("Ball").field("center", center).field("radius", radius).finish()
            }
            Self::BoxInf { center, radius } => {
                f.debug_struct("BoxInf").field("center", center).field("radius", radius).finish()
            }
            Self::Custom { lipschitz, .. } => {
                f.debug_struct("Custom").field("lipschitz", lipschitz).finish_non_exhaustive()
            }
        }
    }
}

/// A named atomic proposition over ℝⁿ.
#[derive(Debug, Clone)]
pub struct Predicate {
    id: String,
    dim: usize,
    kind: PredicateKind,
}

impl Predicate {
    pub fn halfspace(id: impl Into<String>, normal: Vec<f64>, offset: f64) -> Result<Self> {
        let id = id.into();
        let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(len > 0.0 && len.is_finite() && offset.is_finite()) {
            return Err(Error::InvalidPredicate { id, reason: "normal must be non-zero and finite".into() });
        }
        let dim = normal.len();
        let kind = PredicateKind::Halfspace {
            normal: normal.iter().map(|v| v / len).collect(),
            offset: offset / len,
        };
        Ok(Self { id, dim, kind })
    }

    pub fn ball(id: impl Into<String>, center: Vec<f64>, radius: f64) -> Result<Self> {
        let id = id.into();
        Self::check_center(&id, &center, radius)?;
        Ok(Self { id, dim: center.len(), kind: PredicateKind::Ball { center, radius } })
    }

    pub fn box_inf(id: impl Into<String>, center: Vec<f64>, radius: f64) -> Result<Self> {
        let id = id.into();
        Self::check_center(&id, &center, radius)?;
        Ok(Self { id, dim: center.len(), kind: PredicateKind::BoxInf { center, radius } })
    }

    /// A predicate with a caller-asserted Lipschitz constant. Debug builds
    /// spot-check the constant on random point pairs and log a warning when
    /// it is violated.
    pub fn custom(
        id: impl Into<String>,
        dim: usize,
        lipschitz: f64,
        margin: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let id = id.into();
        if !(lipschitz > 0.0 && lipschitz.is_finite()) || dim == 0 {
            return Err(Error::InvalidPredicate {
                id,
                reason: "custom predicates need dim ≥ 1 and a positive Lipschitz constant".into(),
            });
        }
        let p = Self { id, dim, kind: PredicateKind::Custom { margin: Arc::new(margin), lipschitz } };
        if cfg!(debug_assertions) {
            let worst = p.lipschitz_spot_check(256, 10.0, 0);
            if worst > lipschitz * (1.0 + 1e-9) {
                log::warn!(
                    "predicate `{}` declares Lipschitz constant {lipschitz} but a sampled ratio reached {worst}",
                    p.id
                );
            }
        }
        Ok(p)
    }

    fn check_center(id: &str, center: &[f64], radius: f64) -> Result<()> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) || !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidPredicate {
                id: id.to_string(),
                reason: "center must be non-empty and finite, radius finite and ≥ 0".into(),
            });
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PredicateKind {
        &self.kind
    }

    /// Lipschitz constant of the margin with respect to the 2-norm.
    pub fn lipschitz(&self) -> f64 {
        match &self.kind {
            PredicateKind::Custom { lipschitz, .. } => *lipschitz,
            _ => 1.0,
        }
    }

    /// Signed margin: non-negative exactly when the proposition holds.
    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.margin_unchecked(x))
    }

    pub(crate) fn margin_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PredicateKind::Halfspace { normal, offset } => {
                offset - normal.iter().zip(x).map(|(n, v)| n * v).sum::<f64>()
            }
            PredicateKind::Ball { center, radius } => {
                radius - center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum::<f64>().sqrt()
            }
            PredicateKind::BoxInf { center, radius } => {
                radius - center.iter().zip(x).map(|(c, v)| (v - c).abs()).fold(0.0, f64::max)
            }
            PredicateKind::Custom { margin, .. } => margin(x),
        }
    }

    /// Largest observed ratio `|h(x) − h(y)| / ‖x − y‖` over `pairs` random
    /// point pairs in `[-extent, extent]ⁿ`.
    pub fn lipschitz_spot_check(&self, pairs: usize, extent: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..pairs {
            let x: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-extent..=extent)).collect();
            let y: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-extent..=extent)).collect();
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if dist > 0.0 {
                let ratio = (self.margin_unchecked(&x) - self.margin_unchecked(&y)).abs() / dist;
                worst = worst.max(ratio);
            }
        }
        worst
    }
}

/// Free-function form of [`Predicate::margin`].
pub fn predicate_margin(p: &Predicate, x: &[f64]) -> Result<f64> {
    p.margin(x)
}

/// JSON declaration of a builtin predicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredicateDecl {
    Halfspace { id: String, normal: Vec<f64>, offset: f64 },
    Ball { id: String, center: Vec<f64>, radius: f64 },
    BoxInf { id: String, center: Vec<f64>, radius: f64 },
}

impl PredicateDecl {
    pub fn build(self) -> Result<Predicate> {
        match self {
            Self::Halfspace { id, normal, offset } => Predicate::halfspace(id, normal, offset),
            Self::Ball { id, center, radius } => Predicate::ball(id, center, radius),
            Self::BoxInf { id, center, radius } => Predicate::box_inf(id, center, radius),
        }
    }
}

/// Declared predicates, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct PredicateTable {
    entries: BTreeMap<String, Arc<Predicate>>,
}

impl PredicateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: Predicate) -> Arc<Predicate> {
        let p = Arc::new(p);
        self.entries.insert(p.id.clone(), Arc::clone(&p));
        p
    }

    pub fn with(mut self, p: Predicate) -> Self {
        self.insert(p);
        self
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Predicate>> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses a JSON array of `{id, kind, params…}` objects.
    pub fn from_json(text: &str) -> Result<Self> {
        let decls: Vec<PredicateDecl> = serde_json::from_str(text)?;
        let mut table = Self::new();
        for decl in decls {
            let p = decl.build()?;
            if table.get(p.id()).is_some() {
                return Err(Error::InvalidPredicate { id: p.id, reason: "declared twice".into() });
            }
            table.insert(p);
        }
        Ok(table)
    }
}

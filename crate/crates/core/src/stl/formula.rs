use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::predicate::Predicate;

/// Closed time interval `[a, b]` with `0 ≤ a ≤ b < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInterval { a, b, reason: "bounds must be finite" });
        }
        if a < 0.0 {
            return Err(Error::InvalidInterval { a, b, reason: "lower bound must be ≥ 0" });
        }
        if a > b {
            return Err(Error::InvalidInterval { a, b, reason: "a > b" });
        }
        Ok(Self { a, b })
    }

    pub fn lo(&self) -> f64 {
        self.a
    }

    pub fn hi(&self) -> f64 {
        self.b
    }
}

/// STL abstract syntax. `Eventually` and `Always` are sugar and only exist
/// as constructors.
#[derive(Debug, Clone)]
pub enum Formula {
    True,
    Atom(Arc<Predicate>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until { interval: Interval, left: Box<Formula>, right: Box<Formula> },
}

impl Formula {
    pub fn atom(p: Arc<Predicate>) -> Self {
        Self::Atom(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Self::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Self::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Self::Or(Box::new(l), Box::new(r))
    }

    pub fn until(a: f64, b: f64, l: Formula, r: Formula) -> Result<Self> {
        Ok(Self::Until { interval: Interval::new(a, b)?, left: Box::new(l), right: Box::new(r) })
    }

    /// `F[a,b] φ ≡ ⊤ U[a,b] φ`.
    pub fn eventually(a: f64, b: f64, f: Formula) -> Result<Self> {
        Self::until(a, b, Self::True, f)
    }

    /// `G[a,b] φ ≡ ¬F[a,b] ¬φ`.
    pub fn always(a: f64, b: f64, f: Formula) -> Result<Self> {
        Ok(Self::not(Self::eventually(a, b, Self::not(f))?))
    }

    /// Common state dimension of the atoms, if any atom is present.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::True => None,
            Self::Atom(p) => Some(p.dim()),
            Self::Not(f) => f.dim(),
            Self::And(l, r) | Self::Or(l, r) | Self::Until { left: l, right: r, .. } => {
                l.dim().or_else(|| r.dim())
            }
        }
    }

    /// How far past the evaluation time the formula reads the signal.
    pub fn lookahead(&self) -> f64 {
        match self {
            Self::True | Self::Atom(_) => 0.0,
            Self::Not(f) => f.lookahead(),
            Self::And(l, r) | Self::Or(l, r) => l.lookahead().max(r.lookahead()),
            Self::Until { interval, left, right } => {
                interval.hi() + left.lookahead().max(right.lookahead())
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::True | Self::Atom(_) => 0,
            Self::Not(f) => 1 + f.depth(),
            Self::And(l, r) | Self::Or(l, r) | Self::Until { left: l, right: r, .. } => {
                1 + l.depth().max(r.depth())
            }
        }
    }

    pub(crate) fn check_dims(&self, dim: usize) -> Result<()> {
        match self {
            Self::True => Ok(()),
            Self::Atom(p) if p.dim() == dim => Ok(()),
            Self::Atom(p) => Err(Error::DimensionMismatch { expected: dim, got: p.dim() }),
            Self::Not(f) => f.check_dims(dim),
            Self::And(l, r) | Self::Or(l, r) | Self::Until { left: l, right: r, .. } => {
                l.check_dims(dim)?;
                r.check_dims(dim)
            }
        }
    }
}

/// Structural equality; atoms compare by predicate id.
impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::True, Self::True) => true,
            (Self::Atom(a), Self::Atom(b)) => a.id() == b.id(),
            (Self::Not(a), Self::Not(b)) => a == b,
            (Self::And(a1, a2), Self::And(b1, b2)) | (Self::Or(a1, a2), Self::Or(b1, b2)) => {
                a1 == b1 && a2 == b2
            }
            (
                Self::Until { interval: i, left: l1, right: r1 },
                Self::Until { interval: j, left: l2, right: r2 },
            ) => i == j && l1 == l2 && r1 == r2,
            _ => false,
        }
    }
}

/// Prints in the concrete grammar accepted by [`super::parse`], fully
/// parenthesized.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::True => write!(f, "TRUE"),
            Self::Atom(p) => write!(f, "{}", p.id()),
            Self::Not(g) => write!(f, "!({g})"),
            Self::And(l, r) => write!(f, "({l} & {r})"),
            Self::Or(l, r) => write!(f, "({l} | {r})"),
            Self::Until { interval, left, right } => {
                write!(f, "({left} U[{:?},{:?}] {right})", interval.lo(), interval.hi())
            }
        }
    }
}

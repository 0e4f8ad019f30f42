use serde::{Deserialize, Serialize};

use crate::signal::WeightMatrix;

use super::formula::Formula;

/// A Lipschitz bound `|ρ(s,0) − ρ(z,0)| ≤ L · ‖s − z‖_[a,b]` where the
/// signal seminorm uses `weights`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCertificate {
    #[serde(rename = "L")]
    pub lipschitz: f64,
    pub window: [f64; 2],
    pub weights: WeightMatrix,
}

impl LipschitzCertificate {
    pub fn window_lo(&self) -> f64 {
        self.window[0]
    }

    pub fn window_hi(&self) -> f64 {
        self.window[1]
    }
}

/// `(L, a, b)` by structural recursion over the formula.
fn bound(f: &Formula) -> (f64, f64, f64) {
    match f {
        // constant robustness
        Formula::True => (0.0, 0.0, 0.0),
        Formula::Atom(p) => (p.lipschitz(), 0.0, 0.0),
        Formula::Not(g) => bound(g),
        Formula::And(l, r) | Formula::Or(l, r) => {
            let (l1, a1, b1) = bound(l);
            let (l2, a2, b2) = bound(r);
            (l1.max(l2), a1.min(a2), b1.max(b2))
        }
        Formula::Until { interval, left, right } => {
            let (l1, a1, b1) = bound(left);
            let (l2, a2, b2) = bound(right);
            (l1.max(l2), a1.min(a2 + interval.lo()), interval.hi() + b1.max(b2))
        }
    }
}

/// Compositional Lipschitz certificate for `f`. Atom constants are taken
/// with respect to the 2-norm, so the bound is sound for any `weights`
/// that dominate the identity on the coordinates the atoms read.
pub fn certify(f: &Formula, weights: &WeightMatrix) -> LipschitzCertificate {
    let (lipschitz, a, b) = bound(f);
    LipschitzCertificate { lipschitz, window: [a, b], weights: weights.clone() }
}

use serde::{Deserialize, Serialize};

use crate::world::SPEC_HORIZON;

use super::trial::{Outcome, TrialLog};

/// Slack allowed on barrier values in the invariance check.
pub const H_TOLERANCE: f64 = 1e-6;

/// Outcome of the per-trial metric checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// (a) steps with `h < −1e-6` although no saturated step occurred
    /// since the active barrier was synthesized.
    pub invariance_failures: usize,
    /// Steps that entered check (a).
    pub invariance_checked: usize,
    /// Smallest `h` over the steps of check (a).
    pub min_clean_h: Option<f64>,
    /// (b) steps with `OA ≤ 0`.
    pub oa_failures: usize,
    /// (c) successful replans with `ρ < 0`.
    pub rho_failures: usize,
    /// (d) 10 s windows from a successful replan, with the goal set
    /// unchanged, over which the logged path distance grew.
    pub progress_failures: usize,
    pub progress_checked: usize,
}

impl MetricReport {
    pub fn passed(&self) -> bool {
        self.invariance_failures == 0 && self.oa_failures == 0 && self.rho_failures == 0 && self.progress_failures == 0
    }
}

pub fn check_metrics(log: &TrialLog) -> MetricReport {
    let mut report = MetricReport {
        invariance_failures: 0,
        invariance_checked: 0,
        min_clean_h: None,
        oa_failures: 0,
        rho_failures: 0,
        progress_failures: 0,
        progress_checked: 0,
    };

    let mut epoch = None;
    let mut dirty = false;
    for s in &log.steps {
        if s.epoch != epoch {
            epoch = s.epoch;
            dirty = false;
        }
        if let (Some(h), false) = (s.h, dirty) {
            report.invariance_checked += 1;
            report.min_clean_h = Some(report.min_clean_h.map_or(h, |m: f64| m.min(h)));
            if h < -H_TOLERANCE {
                report.invariance_failures += 1;
            }
        }
        dirty |= s.sat;
        if s.oa <= 0.0 && log.outcome != Outcome::NumericError {
            report.oa_failures += 1;
        }
    }

    report.rho_failures = log.replans.iter().filter(|r| r.success && r.rho.is_some_and(|v| v < 0.0)).count();

    let dt = log.config.dt;
    let index = |t: f64| ((t / dt).round() as usize).min(log.steps.len());
    for r in log.replans.iter().filter(|r| r.success) {
        let lo = index(r.t);
        let hi = index(r.t + SPEC_HORIZON);
        if hi >= log.steps.len() || lo >= hi {
            continue;
        }
        if log.steps[lo..=hi].iter().any(|s| s.goalset != r.goalset) {
            continue;
        }
        let (Some(p0), Some(p1)) = (log.steps[lo].p, log.steps[hi].p) else { continue };
        report.progress_checked += 1;
        if p1 > p0 + 1e-9 {
            report.progress_failures += 1;
        }
    }
    report
}

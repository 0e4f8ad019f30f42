use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::metrics::{check_metrics, MetricReport};
use super::trial::{run_trial, Outcome, TrialConfig, TrialLog};

/// One row of a batch table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub seed: u64,
    /// `None` when the trial could not be set up.
    pub outcome: Option<Outcome>,
    pub t_end: f64,
    pub steps: usize,
    pub replans: usize,
    pub plan_failures: usize,
    pub sat_steps: usize,
    pub min_oa: Option<f64>,
    pub min_h: Option<f64>,
    pub initial_p: Option<f64>,
    pub final_p: Option<f64>,
    pub metrics: Option<MetricReport>,
    pub error: Option<String>,
}

impl TrialSummary {
    pub fn from_log(log: &TrialLog) -> Self {
        let min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
        Self {
            seed: log.seed,
            outcome: Some(log.outcome),
            t_end: log.t_end,
            steps: log.steps.len(),
            replans: log.replans.len(),
            plan_failures: log.replans.iter().filter(|r| !r.success).count(),
            sat_steps: log.steps.iter().filter(|s| s.sat).count(),
            min_oa: min(&mut log.steps.iter().map(|s| s.oa)),
            min_h: min(&mut log.steps.iter().filter_map(|s| s.h)),
            initial_p: log.steps.iter().find_map(|s| s.p),
            final_p: log.steps.iter().rev().find_map(|s| s.p),
            metrics: Some(check_metrics(log)),
            error: None,
        }
    }

    fn failed(seed: u64, e: &Error) -> Self {
        Self {
            seed,
            outcome: None,
            t_end: 0.0,
            steps: 0,
            replans: 0,
            plan_failures: 0,
            sat_steps: 0,
            min_oa: None,
            min_h: None,
            initial_p: None,
            final_p: None,
            metrics: None,
            error: Some(e.to_string()),
        }
    }
}

/// Runs one trial per seed (the seed overriding `cfg.seed`) on a pool of
/// `jobs` threads (`0` = rayon's default). Rows come back in seed order.
pub fn run_batch(seeds: &[u64], cfg: &TrialConfig, jobs: usize) -> Result<Vec<TrialSummary>> {
    run_batch_with(seeds, cfg, jobs, |_| Ok(()))
}

/// As [`run_batch`], handing each finished log to `sink` (e.g. to export
/// it). A sink error is recorded in that trial's row.
pub fn run_batch_with(
    seeds: &[u64],
    cfg: &TrialConfig,
    jobs: usize,
    sink: impl Fn(&TrialLog) -> Result<()> + Sync,
) -> Result<Vec<TrialSummary>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        seeds
            .par_iter()
            .map(|seed| {
                let cfg = TrialConfig { seed: *seed, ..cfg.clone() };
                match run_trial(&cfg) {
                    Ok(log) => {
                        let mut row = TrialSummary::from_log(&log);
                        if let Err(e) = sink(&log) {
                            row.error = Some(e.to_string());
                        }
                        row
                    }
                    Err(e) => TrialSummary::failed(*seed, &e),
                }
            })
            .collect()
    }))
}

pub const SUMMARY_COLUMNS: [&str; 16] = [
    "seed",
    "outcome",
    "t_end",
    "steps",
    "replans",
    "plan_failures",
    "sat_steps",
    "min_oa",
    "min_h",
    "initial_p",
    "final_p",
    "invariance_failures",
    "oa_failures",
    "rho_failures",
    "progress_failures",
    "error",
];

pub fn write_summary_csv(rows: &[TrialSummary], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let m = r.metrics.as_ref();
        let count = |f: fn(&MetricReport) -> usize| m.map(|m| f(m).to_string()).unwrap_or_default();
        w.write_record([
            r.seed.to_string(),
            r.outcome.map(|o| o.label().to_string()).unwrap_or_else(|| "error".into()),
            r.t_end.to_string(),
            r.steps.to_string(),
            r.replans.to_string(),
            r.plan_failures.to_string(),
            r.sat_steps.to_string(),
            opt(r.min_oa),
            opt(r.min_h),
            opt(r.initial_p),
            opt(r.final_p),
            count(|m| m.invariance_failures),
            count(|m| m.oa_failures),
            count(|m| m.rho_failures),
            count(|m| m.progress_failures),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv_path(rows: &[TrialSummary], path: impl AsRef<Path>) -> Result<()> {
    write_summary_csv(rows, std::fs::File::create(path)?)
}

pub fn write_summary_json_path(rows: &[TrialSummary], path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, serde_json::to_string_pretty(rows)?)?)
}

//! Closed-loop trials of the filtered unicycle in generated worlds, metric
//! checks over their logs, and parallel batches.

mod batch;
mod metrics;
mod trial;

pub use batch::{
    run_batch, run_batch_with, write_summary_csv, write_summary_csv_path, write_summary_json_path, TrialSummary,
    SUMMARY_COLUMNS,
};
pub use metrics::{check_metrics, MetricReport, H_TOLERANCE};
pub use trial::{
    run_trial, run_trial_in, spec_certificate, Outcome, ReplanRecord, StepRecord, TrialConfig, TrialLog, CSV_COLUMNS,
    GOAL_TOLERANCE, SAT_TOLERANCE,
};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde_json::json;
use stl_shield::harness::{
    run_batch_with, run_trial, write_summary_csv_path, write_summary_json_path, Outcome, TrialConfig, TrialLog,
    TrialSummary,
};
use stl_shield::stl::{certify, eval_boolean, eval_robustness, parse, Formula, PredicateTable};
use stl_shield::world::{generate_environment, BasingSchedule};
use stl_shield::{Error, Result, Signal, WeightMatrix};

use crate::{BatchArgs, CertifyArgs, Command, EnvCommand, EvalArgs, FormulaArgs, Format, SimulateArgs, TrialArgs};

const VIOLATED: u8 = 1;
const INPUT_ERROR: u8 = 2;
const NUMERIC_ERROR: u8 = 3;

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout(), "{text}");
}

pub fn error_code(e: &Error) -> ExitCode {
    match e {
        Error::Numeric(_) => ExitCode::from(NUMERIC_ERROR),
        _ => ExitCode::from(INPUT_ERROR),
    }
}

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Eval(args) => eval(args),
        Command::Certify(args) => certify_cmd(args),
        Command::Env(EnvCommand::Gen { seed, out }) => env_gen(seed, out),
        Command::Simulate(args) => simulate(args),
        Command::Batch(args) => batch(args),
    }
}

fn load_formula(args: &FormulaArgs) -> Result<Formula> {
    let table = PredicateTable::from_json(&fs::read_to_string(&args.predicates)?)?;
    let path = Path::new(&args.formula);
    let text = if path.is_file() { fs::read_to_string(path)? } else { args.formula.clone() };
    parse(text.trim(), &table)
}

fn eval(args: EvalArgs) -> Result<ExitCode> {
    let formula = load_formula(&args.formula)?;
    let signal = Signal::read_csv_path(&args.signal)?;
    let t = args.time.unwrap_or(signal.t0());
    let rho = eval_robustness(&formula, &signal, t)?;
    let sat = eval_boolean(&formula, &signal, t)?;
    let report = json!({
        "formula": formula.to_string(),
        "time": t,
        "robustness": rho.value,
        "satisfied": sat.value,
        "clamped": rho.clamped,
    });
    emit(report);
    Ok(if sat.value { ExitCode::SUCCESS } else { ExitCode::from(VIOLATED) })
}

fn certify_cmd(args: CertifyArgs) -> Result<ExitCode> {
    let formula = load_formula(&args.formula)?;
    let weights = match args.weights {
        Some(w) => WeightMatrix::new(w)?,
        None => WeightMatrix::identity(formula.dim().unwrap_or(1)),
    };
    if let Some(dim) = formula.dim() {
        if dim != weights.dim() {
            return Err(Error::DimensionMismatch { expected: dim, got: weights.dim() });
        }
    }
    emit(serde_json::to_string(&certify(&formula, &weights))?);
    Ok(ExitCode::SUCCESS)
}

fn env_gen(seed: u64, out: Option<PathBuf>) -> Result<ExitCode> {
    let json = generate_environment(seed)?.to_json()?;
    match out {
        Some(path) => fs::write(path, json)?,
        None => emit(json),
    }
    Ok(ExitCode::SUCCESS)
}

fn trial_config(seed: u64, args: &TrialArgs) -> Result<TrialConfig> {
    let mut cfg = TrialConfig::with_seed(seed);
    if let Some(dt) = args.dt {
        cfg = cfg.with_dt(dt);
    }
    if let Some(d) = args.duration {
        cfg.duration = d;
    }
    if let Some(times) = &args.basing {
        cfg.basing = BasingSchedule::new(times.clone(), false)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_log(log: &TrialLog, dir: &Path, format: Format) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = match format {
        Format::Csv => dir.join(format!("trial_{}.csv", log.seed)),
        Format::Json => dir.join(format!("trial_{}.json", log.seed)),
    };
    match format {
        Format::Csv => log.write_csv_path(&path)?,
        Format::Json => log.write_json_path(&path)?,
    }
    Ok(path)
}

fn outcome_code(outcomes: impl IntoIterator<Item = Option<Outcome>>) -> ExitCode {
    let mut numeric = false;
    for o in outcomes {
        match o {
            Some(Outcome::Violation) => return ExitCode::from(VIOLATED),
            Some(Outcome::NumericError) => numeric = true,
            _ => {}
        }
    }
    if numeric {
        ExitCode::from(NUMERIC_ERROR)
    } else {
        ExitCode::SUCCESS
    }
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let cfg = trial_config(args.seed, &args.trial)?;
    let log = run_trial(&cfg)?;
    if let Some(dir) = &args.out {
        write_log(&log, dir, args.format)?;
    }
    let summary = TrialSummary::from_log(&log);
    emit(serde_json::to_string_pretty(&summary)?);
    Ok(outcome_code([Some(log.outcome)]))
}

/// `a..b` and `a..=b` are inclusive; otherwise a comma-separated list.
fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("cannot parse seeds {text:?}"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(num).collect()
}

fn batch(args: BatchArgs) -> Result<ExitCode> {
    let seeds = parse_seeds(&args.seeds)?;
    let cfg = trial_config(0, &args.trial)?;
    fs::create_dir_all(&args.out)?;
    let trials = args.out.join("trials");
    let rows = run_batch_with(&seeds, &cfg, args.jobs, |log| write_log(log, &trials, args.format).map(drop))?;
    match args.format {
        Format::Csv => write_summary_csv_path(&rows, args.out.join("summary.csv"))?,
        Format::Json => write_summary_json_path(&rows, args.out.join("summary.json"))?,
    }
    let count = |o: Outcome| rows.iter().filter(|r| r.outcome == Some(o)).count();
    let report = json!({
        "trials": rows.len(),
        "goal_reached": count(Outcome::GoalReached),
        "timeout": count(Outcome::Timeout),
        "violation": count(Outcome::Violation),
        "numeric_error": count(Outcome::NumericError),
        "setup_error": rows.iter().filter(|r| r.outcome.is_none()).count(),
    });
    emit(report);
    Ok(outcome_code(rows.iter().map(|r| r.outcome)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seeds("2..=4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_seeds("7,1, 9").unwrap(), vec![7, 1, 9]);
        assert_eq!(parse_seeds("").unwrap(), Vec::<u64>::new());
        assert!(parse_seeds("5..1").is_err());
        assert!(parse_seeds("x").is_err());
    }
}

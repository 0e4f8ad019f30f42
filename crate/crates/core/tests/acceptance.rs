//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use stl_shield::barrier::{ControlAffineSystem, InputBox, TimeVaryingBarrier};
use stl_shield::harness::{run_batch, Outcome, TrialConfig};
use stl_shield::stl::{certify, eval_boolean, eval_robustness, robustness_trace, Formula, Predicate};
use stl_shield::world::generate_environment;
use stl_shield::{signal_difference, Signal, WeightMatrix};

use common::{naive_rho, perturbed, random_formula, random_predicates, random_signal, rng};

type Verdict = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn soundness() -> Verdict {
    let start = Instant::now();
    let mut bad = 0;
    let n = 600;
    for seed in 0..n {
        let mut r = rng(seed);
        let preds = random_predicates(&mut r, 2);
        let depth = r.random_range(0..4);
        let f = random_formula(&mut r, depth, &preds, 0.1);
        let s = random_signal(&mut r, 60, 2, 0.1);
        let rho = eval_robustness(&f, &s, 0.0).map_err(|e| e.to_string())?.value;
        let sat = eval_boolean(&f, &s, 0.0).map_err(|e| e.to_string())?.value;
        if (rho > 1e-9 && !sat) || (rho < -1e-9 && sat) {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(bad == 0 && secs < 10.0, format!("{n} pairs, {bad} disagreements, {secs:.2} s"))
}

fn example_one() -> Verdict {
    let ball = Formula::atom(Arc::new(Predicate::ball("b", vec![0.0], 2.0).unwrap()));
    let g = Formula::always(0.0, 2.0, ball).unwrap();
    let mut got = Vec::new();
    for c in [0.0, 1.5, 2.0, 2.5] {
        let s = Signal::constant(&[c], 0.0, 0.1, 31).unwrap();
        got.push(eval_robustness(&g, &s, 0.0).map_err(|e| e.to_string())?.value);
    }
    ensure(got == [2.0, 0.5, 0.0, -0.5], format!("robustness {got:?}"))
}

fn lipschitz() -> Verdict {
    let q = WeightMatrix::identity(2);
    let n = 600;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..n {
        let mut r = rng(10_000 + seed);
        let preds = random_predicates(&mut r, 2);
        let depth = r.random_range(0..4);
        let f = random_formula(&mut r, depth, &preds, 0.1);
        let s = random_signal(&mut r, 60, 2, 0.1);
        let eps = r.random_range(0.0..0.6);
        let z = perturbed(&mut r, &s, eps);
        let cert = certify(&f, &q);
        let a = eval_robustness(&f, &s, 0.0).unwrap().value;
        let b = eval_robustness(&f, &z, 0.0).unwrap().value;
        let gap = if a == b { 0.0 } else { (a - b).abs() };
        let norm = signal_difference(&s, &z).unwrap().semi_norm(cert.window[0], cert.window[1], &q).unwrap().value;
        worst = worst.max(gap - cert.lipschitz * norm);
    }
    ensure(worst <= 1e-9, format!("{n} instances, worst excess {worst:.3e}"))
}

fn until_equivalence() -> Verdict {
    let mut mismatches = 0;
    let mut samples = 0;
    for seed in 0..200 {
        let mut r = rng(20_000 + seed);
        let preds = random_predicates(&mut r, 2);
        let a = r.random_range(0..20) as f64 * 0.1;
        let b = a + r.random_range(0..60) as f64 * 0.1;
        let (dl, dr) = (r.random_range(0..2), r.random_range(0..2));
        let left = random_formula(&mut r, dl, &preds, 0.1);
        let right = random_formula(&mut r, dr, &preds, 0.1);
        let f = Formula::until(a, b, left, right).unwrap();
        let len = r.random_range(2..=300);
        let s = random_signal(&mut r, len, 2, 0.1);
        let trace = robustness_trace(&f, &s).unwrap();
        let mut idx: Vec<usize> = (0..8).map(|_| r.random_range(0..len)).collect();
        idx.extend([0, len - 1]);
        for i in idx {
            samples += 1;
            if trace[i] != naive_rho(&f, &s, i) {
                mismatches += 1;
            }
        }
        if eval_robustness(&f, &s, 0.0).ok().map(|c| c.value) != naive_rho(&f, &s, 0) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, format!("200 instances, {samples} evaluation times, {mismatches} mismatches"))
}

fn qp_optimality() -> Verdict {
    let mut r = rng(30_000);
    let (half, n) = (3.0, 201);
    let cell = 2.0 * half / (n - 1) as f64;
    let diag = cell * 2f64.sqrt();
    let expert = Signal::constant(&[0.0, 0.0], 0.0, 0.1, 3).unwrap();
    let barrier = TimeVaryingBarrier::from_parts(expert, 0.5, 1.0, WeightMatrix::identity(2)).unwrap();
    let (mut done, mut bad, mut worst_gap, mut worst_resid) = (0, 0, 0.0f64, f64::INFINITY);
    while done < 200 {
        let g: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let f = vec![r.random_range(-0.5..0.5), r.random_range(-0.5..0.5)];
        let sys = ControlAffineSystem::new(
            2,
            2,
            move |_| f.clone(),
            move |_| nalgebra::DMatrix::from_row_slice(2, 2, &g),
            InputBox::symmetric(&[10.0, 10.0]).unwrap(),
        )
        .unwrap();
        let x = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let un = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let out = barrier.filter_input(&sys, &x, 0.1, &un, 2.0).map_err(|e| e.to_string())?;
        // violated instances whose projection lies well inside the search box
        let a_norm = out.a[0].hypot(out.a[1]);
        let slack = out.residual(&un);
        if slack >= 0.0 || a_norm == 0.0 || -slack / a_norm > half - 2.0 * diag {
            continue;
        }
        done += 1;
        let j = |u: &[f64]| (u[0] - un[0]).hypot(u[1] - un[1]);
        let mut best = (f64::INFINITY, [0.0; 2]);
        for i in 0..n {
            for k in 0..n {
                let u = [un[0] - half + i as f64 * cell, un[1] - half + k as f64 * cell];
                if out.residual(&u) >= 0.0 && j(&u) < best.0 {
                    best = (j(&u), u);
                }
            }
        }
        let jq = j(&out.unclamped);
        let resid = out.residual(&out.unclamped);
        let offset = (best.1[0] - out.unclamped[0]).hypot(best.1[1] - out.unclamped[1]);
        let offset_bound = (2.0 * jq * diag + diag * diag).sqrt() + 1e-12;
        worst_gap = worst_gap.max(best.0 - jq);
        worst_resid = worst_resid.min(resid);
        if resid < -1e-9 || jq > best.0 + 1e-12 || best.0 - jq > diag || offset > offset_bound {
            bad += 1;
        }
    }
    ensure(
        bad == 0,
        format!("200 violated instances, {bad} bad, grid excess ≤ {worst_gap:.4} (cell diagonal {diag:.4}), min residual {worst_resid:.2e}"),
    )
}

fn gradient() -> Verdict {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let mut r = rng(40_000 + seed);
        let s = random_signal(&mut r, 40, 3, 0.1);
        let b = TimeVaryingBarrier::from_parts(
            s,
            r.random_range(0.05..1.0),
            r.random_range(0.5..2.0),
            WeightMatrix::new(vec![1.0, 1.0, 0.0]).unwrap(),
        )
        .unwrap();
        let t = (r.random_range(0..38) as f64 + r.random_range(0.02..0.98)) * 0.1;
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
        let g = b.gradients(&x, t).unwrap();
        let h = 1e-6;
        let rel = |fd: f64, an: f64| (fd - an).abs() / an.abs().max(1.0);
        for i in 0..3 {
            let (mut hi, mut lo) = (x.clone(), x.clone());
            hi[i] += h;
            lo[i] -= h;
            let fd = (b.value(&hi, t).unwrap() - b.value(&lo, t).unwrap()) / (2.0 * h);
            worst = worst.max(rel(fd, g.dx[i]));
        }
        let fd = (b.value(&x, t + h).unwrap() - b.value(&x, t - h).unwrap()) / (2.0 * h);
        worst = worst.max(rel(fd, g.dt));
    }
    ensure(worst <= 1e-5, format!("100 points, worst relative error {worst:.2e}"))
}

struct Batch {
    rows: Vec<stl_shield::harness::TrialSummary>,
    secs: f64,
}

fn trials() -> Result<Batch, String> {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..20).collect();
    let rows = run_batch(&seeds, &TrialConfig::default(), 0).map_err(|e| e.to_string())?;
    Ok(Batch { rows, secs: start.elapsed().as_secs_f64() })
}

fn forward_invariance(b: &Batch) -> Verdict {
    let mut failures = 0;
    let mut checked = 0;
    let mut min_h = f64::INFINITY;
    for row in &b.rows {
        let m = row.metrics.as_ref().ok_or(format!("seed {} did not run", row.seed))?;
        failures += m.invariance_failures;
        checked += m.invariance_checked;
        min_h = min_h.min(m.min_clean_h.unwrap_or(f64::INFINITY));
    }
    ensure(
        failures == 0 && b.secs < 60.0,
        format!("20 trials, {checked} steps checked, {failures} below -1e-6, min h {min_h:.2e}, {:.2} s", b.secs),
    )
}

fn replan_robustness(b: &Batch) -> Verdict {
    let bad: usize = b.rows.iter().filter_map(|r| r.metrics.as_ref()).map(|m| m.rho_failures).sum();
    let replans: usize = b.rows.iter().map(|r| r.replans - r.plan_failures).sum();
    ensure(bad == 0, format!("{replans} successful replans, {bad} with negative robustness"))
}

fn no_collisions(b: &Batch) -> Verdict {
    let clean = b
        .rows
        .iter()
        .filter(|r| r.outcome != Some(Outcome::Violation) && r.min_oa.is_some_and(|v| v > 0.0))
        .count();
    ensure(clean == 20, format!("{clean}/20 trials with positive clearance throughout"))
}

fn convergence(b: &Batch) -> Verdict {
    let reached = b
        .rows
        .iter()
        .filter(|r| r.outcome == Some(Outcome::GoalReached) && r.final_p.is_some_and(|p| (0.0..=0.2).contains(&p)))
        .count();
    let rest_ok = b.rows.iter().all(|r| match r.outcome {
        Some(Outcome::GoalReached) => r.final_p.is_some_and(|p| (0.0..=0.2).contains(&p)),
        Some(Outcome::Timeout) => matches!((r.initial_p, r.final_p), (Some(a), Some(z)) if z < a),
        _ => false,
    });
    ensure(reached >= 18 && rest_ok, format!("{reached}/20 reached a goal with final P in [0, 0.2]"))
}

fn environments() -> Verdict {
    for seed in 0..1000 {
        let env = generate_environment(seed).map_err(|e| format!("seed {seed}: {e}"))?;
        common::world::validate(&env).map_err(|e| format!("seed {seed}: {e}"))?;
        let again = generate_environment(seed).unwrap();
        if env.to_json().unwrap() != again.to_json().unwrap() {
            return Err(format!("seed {seed}: regenerated JSON differs"));
        }
    }
    Ok("1000 seeds valid, JSON regenerates byte-identically".into())
}

fn certificates() -> Verdict {
    let atom = |id: &str| Formula::atom(Arc::new(Predicate::ball(id, vec![0.0], 1.0).unwrap()));
    let q = WeightMatrix::identity(1);
    let cases = [
        (atom("p"), 1.0, [0.0, 0.0]),
        (Formula::until(0.0, 2.0, atom("p"), atom("q")).unwrap(), 1.0, [0.0, 2.0]),
        (
            Formula::and(
                Formula::always(0.0, 10.0, atom("p")).unwrap(),
                Formula::eventually(5.0, 20.0, atom("q")).unwrap(),
            ),
            1.0,
            [0.0, 20.0],
        ),
    ];
    for (f, l, w) in &cases {
        let c = certify(f, &q);
        if c.lipschitz != *l || c.window != *w {
            return Err(format!("{f}: got L={} window {:?}", c.lipschitz, c.window));
        }
    }
    Ok("3 worked examples match".into())
}

fn main() {
    let mut results: Vec<(&str, Verdict)> = vec![
        ("robustness soundness", soundness()),
        ("example 1 oracle", example_one()),
        ("Lipschitz certification", lipschitz()),
        ("until brute-force equivalence", until_equivalence()),
        ("QP filter optimality", qp_optimality()),
        ("barrier gradient check", gradient()),
    ];
    match trials() {
        Ok(b) => {
            results.push(("forward invariance", forward_invariance(&b)));
            results.push(("replans satisfy the specification", replan_robustness(&b)));
            results.push(("no collisions", no_collisions(&b)));
            results.push(("goal convergence", convergence(&b)));
        }
        Err(e) => results.push(("closed-loop trials", Err(e))),
    }
    results.push(("environment validity", environments()));
    results.push(("certificate arithmetic", certificates()));

    let mut failed = 0;
    for (name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

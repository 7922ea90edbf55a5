//! Acceptance suite. Runs without the libtest harness so each criterion prints
//! exactly one PASS/FAIL line; the process fails if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ambuplan::engine::{solve_lp, LpStatus, SolveOptions, INTEGRALITY_TOL};
use ambuplan::oracle::{min_shortage_model1, min_shortage_model2};
use ambuplan::{
    brute_force_model1, brute_force_model2, build_model2, evaluate_model1, evaluate_model2, generate, preset,
    report_model1, report_model2, solve_model1, solve_model2, tiny_instance, Instance, SolveStatus,
};

const ORACLE_CASES: u64 = 200;
const ORACLE_SEED: u64 = 1;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const INTEGRALITY_CASES: u64 = 100;
const ROOT_TOL: f64 = 1e-6;
const MAX_ROOT_NODES: u64 = 1;
const SCALE_BUDGET: Duration = Duration::from_secs(60);
const MONOTONE_CASES: u64 = 50;
const DETERMINISM_RUNS: usize = 3;

type Verdict = Result<String, String>;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn tiny_corpus() -> Vec<Instance> {
    (0..ORACLE_CASES).map(|case| tiny_instance(ORACLE_SEED, case)).collect()
}

fn oracle_equivalence(model: u8) -> Verdict {
    let started = Instant::now();
    let mut matched = 0;
    let mut failures = Vec::new();
    for (case, inst) in tiny_corpus().iter().enumerate() {
        let (engine, oracle) = if model == 1 {
            let a = solve_model1(inst, &opts()).map_err(|e| e.to_string())?;
            let b = brute_force_model1(inst).map_err(|e| e.to_string())?;
            ((a.status, a.objective), (b.status, b.objective))
        } else {
            let a = solve_model2(inst, &opts()).map_err(|e| e.to_string())?;
            let b = brute_force_model2(inst).map_err(|e| e.to_string())?;
            ((a.status, a.objective), (b.status, b.objective))
        };
        if engine == oracle {
            matched += 1;
        } else {
            failures.push(format!("case {case}: solver {engine:?}, oracle {oracle:?}"));
        }
    }
    let elapsed = started.elapsed();
    let summary = format!("{matched}/{ORACLE_CASES} exact matches in {:.2}s", elapsed.as_secs_f64());
    if failures.is_empty() && elapsed < ORACLE_BUDGET {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.first().map_or("over time budget", String::as_str)))
    }
}

fn flow_integrality() -> Verdict {
    let params = preset(1).map_err(|e| e.to_string())?;
    assert!(ROOT_TOL >= INTEGRALITY_TOL);
    let mut worst_nodes = 0;
    for seed in 0..INTEGRALITY_CASES {
        let inst = generate(&params, seed).map_err(|e| e.to_string())?;
        let (lp, _) = build_model2(&inst).map_err(|e| e.to_string())?;
        let root = solve_lp(&lp).map_err(|e| e.to_string())?;
        if root.status != LpStatus::Optimal {
            return Err(format!("seed {seed}: root relaxation {:?}", root.status));
        }
        if let Some((k, v)) =
            root.values.iter().enumerate().find(|(_, v)| (*v - v.round()).abs() > ROOT_TOL)
        {
            return Err(format!("seed {seed}: root value x{k} = {v} is fractional"));
        }
        let out = solve_model2(&inst, &opts()).map_err(|e| e.to_string())?;
        worst_nodes = worst_nodes.max(out.stats.nodes);
        if out.status != SolveStatus::Optimal || out.stats.nodes > MAX_ROOT_NODES {
            return Err(format!("seed {seed}: {:?} after {} nodes", out.status, out.stats.nodes));
        }
    }
    Ok(format!("{INTEGRALITY_CASES}/{INTEGRALITY_CASES} integral roots, at most {worst_nodes} node"))
}

fn scale_parity() -> Verdict {
    let params = preset(5).map_err(|e| e.to_string())?;
    let inst = generate(&params, 7).map_err(|e| e.to_string())?;
    if (inst.fleet_size, inst.num_slots, inst.num_stations, inst.num_zones) != (200, 24, 20, 60) {
        return Err("preset 5 has the wrong dimensions".into());
    }
    let started = Instant::now();
    let o1 = solve_model1(&inst, &opts()).map_err(|e| e.to_string())?;
    let t1 = started.elapsed();
    let started = Instant::now();
    let o2 = solve_model2(&inst, &opts()).map_err(|e| e.to_string())?;
    let t2 = started.elapsed();

    let mut notes = Vec::new();
    match &o1.plan {
        Some(plan) if o1.status == SolveStatus::Optimal => {
            let eval = evaluate_model1(&inst, plan).map_err(|e| e.to_string())?;
            let table = report_model1(&inst, plan).map_err(|e| e.to_string())?;
            let reported: Vec<i64> = table.rows.iter().map(|r| r.shortage).collect();
            if plan.shortage != eval.slot_shortage || reported != eval.slot_shortage {
                return Err("allocation model shortages disagree with the evaluator".into());
            }
        }
        _ if o1.status == SolveStatus::Infeasible => notes.push("allocation model infeasible"),
        _ => return Err(format!("allocation model ended {:?}", o1.status)),
    }
    let Some(plan) = o2.plan.as_ref().filter(|_| o2.status == SolveStatus::Optimal) else {
        return Err(format!("transfer model ended {:?}", o2.status));
    };
    let eval = evaluate_model2(&inst, plan).map_err(|e| e.to_string())?;
    let table = report_model2(&inst, plan).map_err(|e| e.to_string())?;
    let per_slot: Vec<i64> =
        (0..inst.num_slots).map(|t| (0..inst.num_zones).map(|i| plan.shortage[i][t]).sum()).collect();
    let reported: Vec<i64> = table.rows.iter().map(|r| r.shortage).collect();
    if per_slot != eval.slot_shortage || reported != eval.slot_shortage {
        return Err("transfer model shortages disagree with the evaluator".into());
    }
    let summary = format!(
        "allocation {:.2}s, transfer {:.2}s{}",
        t1.as_secs_f64(),
        t2.as_secs_f64(),
        notes.iter().map(|n| format!(" ({n})")).collect::<String>()
    );
    if t1 < SCALE_BUDGET && t2 < SCALE_BUDGET {
        Ok(summary)
    } else {
        Err(format!("{summary}, over the time budget"))
    }
}

/// `None` when infeasible.
fn optimum(model: u8, inst: &Instance) -> Result<Option<i64>, String> {
    let (status, objective) = if model == 1 {
        let o = solve_model1(inst, &opts()).map_err(|e| e.to_string())?;
        (o.status, o.objective)
    } else {
        let o = solve_model2(inst, &opts()).map_err(|e| e.to_string())?;
        (o.status, o.objective)
    };
    match status {
        SolveStatus::Optimal => Ok(objective),
        SolveStatus::Infeasible => Ok(None),
        SolveStatus::NodeLimitReached => Err("node limit without a limit set".into()),
    }
}

fn monotonicity() -> Verdict {
    let mut params = preset(1).map_err(|e| e.to_string())?;
    let mut violations = Vec::new();
    let mut compared = 0;
    for seed in 0..MONOTONE_CASES {
        // One penalty for all three variants, valid for the doubled fleet.
        params.big_m = None;
        let base = generate(&params, seed).map_err(|e| e.to_string())?;
        let mut doubled_fleet = base.clone();
        doubled_fleet.fleet_size *= 2;
        let big_m = (doubled_fleet.big_m_floor() + 1) as i64;
        let mut base = base;
        base.big_m = big_m;
        doubled_fleet.big_m = big_m;
        let mut doubled_capacity = base.clone();
        for row in &mut doubled_capacity.capacity {
            for v in row {
                *v *= 2;
            }
        }
        for model in [1u8, 2] {
            let before = optimum(model, &base)?;
            for (label, variant) in [("fleet", &doubled_fleet), ("capacity", &doubled_capacity)] {
                let after = optimum(model, variant)?;
                compared += 1;
                let worse = match (before, after) {
                    (None, _) => false,
                    (Some(_), None) => true,
                    (Some(b), Some(a)) => a > b,
                };
                if worse {
                    violations.push(format!("seed {seed} model {model} doubled {label}: {before:?} -> {after:?}"));
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{compared} comparisons, 0 violations"))
    } else {
        Err(format!("{} violations, first: {}", violations.len(), violations[0]))
    }
}

fn shortage_semantics() -> Verdict {
    let mut checked = 0;
    for (case, inst) in tiny_corpus().iter().enumerate() {
        if min_shortage_model1(inst).map_err(|e| e.to_string())? == Some(0) {
            checked += 1;
            let out = solve_model1(inst, &opts()).map_err(|e| e.to_string())?;
            let plan = out.plan.ok_or(format!("case {case}: allocation model returned no plan"))?;
            let eval = evaluate_model1(inst, &plan).map_err(|e| e.to_string())?;
            if eval.slot_shortage.iter().any(|&l| l != 0) {
                return Err(format!("case {case}: allocation plan has shortage {:?}", eval.slot_shortage));
            }
        }
        if min_shortage_model2(inst).map_err(|e| e.to_string())? == Some(0) {
            checked += 1;
            let out = solve_model2(inst, &opts()).map_err(|e| e.to_string())?;
            let plan = out.plan.ok_or(format!("case {case}: transfer model returned no plan"))?;
            let eval = evaluate_model2(inst, &plan).map_err(|e| e.to_string())?;
            if eval.slot_shortage.iter().any(|&l| l != 0) {
                return Err(format!("case {case}: transfer plan has shortage {:?}", eval.slot_shortage));
            }
        }
    }
    Ok(format!("{checked} zero-shortage-attainable solves, 0 violations"))
}

fn cli(args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ambuplan")).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn determinism(dir: &Path) -> Verdict {
    let mut instances = Vec::new();
    for run in 0..DETERMINISM_RUNS {
        let path = dir.join(format!("gen{run}.json"));
        let (code, _) = cli(&["generate", "--preset", "1", "--seed", "42", "--out", path.to_str().unwrap()])?;
        if code != 0 {
            return Err(format!("generate exited {code}"));
        }
        instances.push(read(&path)?);
    }
    if instances.windows(2).any(|w| w[0] != w[1]) {
        return Err("generated files differ".into());
    }
    let instance = dir.join("gen0.json");
    for model in ["1", "2"] {
        let mut plans = Vec::new();
        for run in 0..DETERMINISM_RUNS {
            let path = dir.join(format!("plan{model}-{run}.json"));
            let (code, _) = cli(&[
                "solve",
                "--model",
                model,
                "--instance",
                instance.to_str().unwrap(),
                "--out",
                path.to_str().unwrap(),
                "--workers",
                "1",
                "--deterministic",
            ])?;
            if code == 3 {
                break;
            }
            if code != 0 {
                return Err(format!("solve --model {model} exited {code}"));
            }
            plans.push(read(&path)?);
        }
        if plans.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("model {model} plan files differ"));
        }
    }
    Ok(format!("{DETERMINISM_RUNS} identical instance files and plan files"))
}

fn format_parity(dir: &Path) -> Verdict {
    let instance = dir.join("fmt-instance.json");
    let plan = dir.join("fmt-plan.json");
    let (code, _) = cli(&["generate", "--preset", "1", "--seed", "42", "--out", instance.to_str().unwrap()])?;
    if code != 0 {
        return Err(format!("generate exited {code}"));
    }
    let (code, _) = cli(&[
        "solve",
        "--model",
        "2",
        "--instance",
        instance.to_str().unwrap(),
        "--out",
        plan.to_str().unwrap(),
    ])?;
    if code != 0 {
        return Err(format!("solve exited {code}"));
    }
    let (code, csv) = cli(&[
        "report",
        "--instance",
        instance.to_str().unwrap(),
        "--plan",
        plan.to_str().unwrap(),
        "--format",
        "csv",
    ])?;
    if code != 0 {
        return Err(format!("report exited {code}"));
    }
    let lines: Vec<&str> = csv.lines().collect();
    let header: Vec<&str> = lines.first().map_or(vec![], |h| h.split(',').collect());
    let data: Vec<Vec<&str>> = lines[1..].iter().map(|l| l.split(',').collect()).collect();
    // label column, 20 zone columns, Shortage
    let zone_cols = header.len().saturating_sub(2);
    let expected_header: Vec<String> =
        ["Slot".to_string()].into_iter().chain((1..=20).map(|i| format!("Z{i}"))).chain(["Shortage".into()]).collect();
    if header != expected_header || data.len() != 4 || data.iter().any(|r| r.len() != header.len()) {
        return Err(format!("got {} rows x {zone_cols} zone columns", data.len()));
    }
    Ok(format!("{} rows x ({zone_cols} zone columns + Shortage)", data.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("oracle equivalence, allocation model", Box::new(|| oracle_equivalence(1))),
        ("oracle equivalence, transfer model", Box::new(|| oracle_equivalence(2))),
        ("flow integrality", Box::new(flow_integrality)),
        ("scale parity", Box::new(scale_parity)),
        ("monotonicity", Box::new(monotonicity)),
        ("shortage semantics", Box::new(shortage_semantics)),
        ("determinism", Box::new(|| determinism(dir.path()))),
        ("format parity", Box::new(|| format_parity(dir.path()))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Command-line front end. Every command returns its exit code instead of
//! exiting, so the commands can be driven from tests.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::engine::SolveOptions;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::instgen::{generate, preset, tiny_instance, GenParams};
use crate::io::{instance_to_json, load_instance, load_plan, plan_to_json, write_atomic, Plan, PlanFile};
use crate::model1::solve_model1;
use crate::model2::solve_model2;
use crate::oracle::{brute_force_model1, brute_force_model2};
use crate::outcome::{SolveOutcome, SolveStatus};
use crate::report::{report_model1, report_model2};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NODE_LIMIT: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "ambuplan", version, about = "Multi-period ambulance location planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random instance
    #[command(group(ArgGroup::new("source").required(true).args(["preset", "params"])))]
    Generate {
        /// Size preset, 1 to 5
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=5))]
        preset: Option<u32>,
        /// Generator parameters as JSON
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance and write the plan
    Solve {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        model: u8,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        node_limit: Option<u64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        workers: u64,
        /// Reproducible search order when running several workers
        #[arg(long)]
        deterministic: bool,
    },
    /// Print the per-slot shortage table of a plan
    Report {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare the solver with the exhaustive oracle on random tiny instances
    Check {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        model: u8,
        #[arg(long, default_value_t = 200)]
        max_cases: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_BAD_INPUT
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Generate { preset, params, seed, out: path } => cmd_generate(preset, params.as_deref(), seed, &path),
        Command::Solve { model, instance, out: path, node_limit, workers, deterministic } => {
            let opts = SolveOptions { node_limit, workers: workers as usize, deterministic };
            cmd_solve(model, &instance, &path, &opts, out)
        }
        Command::Report { instance, plan, format } => cmd_report(&instance, &plan, format, out),
        Command::Check { model, max_cases, seed } => {
            let engine = move |inst: &Instance| engine_objective(model, inst);
            Ok(cmd_check(model, max_cases, seed, &engine, out))
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_BAD_INPUT
        }
    }
}

pub fn cmd_generate(preset_k: Option<u32>, params: Option<&Path>, seed: u64, out: &Path) -> Result<i32> {
    let params = match (preset_k, params) {
        (Some(k), _) => preset(k)?,
        (None, Some(path)) => serde_json::from_str::<GenParams>(&std::fs::read_to_string(path)?)?,
        (None, None) => return Err(Error::InvalidParams("either a preset or a params file is required".into())),
    };
    let inst = generate(&params, seed)?;
    write_atomic(out, &instance_to_json(&inst))?;
    Ok(EXIT_OK)
}

fn summarize<P>(outcome: &SolveOutcome<P>, shortage: Option<i64>, started: Instant) -> String {
    let show = |v: Option<i64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
    format!(
        "status={} objective={} shortage={} time={:.3}s nodes={}",
        outcome.status,
        show(outcome.objective),
        show(shortage),
        started.elapsed().as_secs_f64(),
        outcome.stats.nodes
    )
}

/// Solves and writes the plan when there is one. Infeasible instances and
/// node limits without an incumbent leave `out` untouched.
pub fn cmd_solve(model: u8, instance: &Path, path: &Path, opts: &SolveOptions, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let inst = load_instance(instance)?;
    let (status, file, line) = match model {
        1 => {
            let o = solve_model1(&inst, opts)?;
            let shortage = o.plan.as_ref().map(|p| p.total_shortage());
            let file = o.plan.clone().map(|p| (o.objective.expect("plan has objective"), Plan::Allocation(p)));
            (o.status, file, summarize(&o, shortage, started))
        }
        2 => {
            let o = solve_model2(&inst, opts)?;
            let shortage = o.plan.as_ref().map(|p| p.total_shortage());
            let file = o.plan.clone().map(|p| (o.objective.expect("plan has objective"), Plan::Transfer(p)));
            (o.status, file, summarize(&o, shortage, started))
        }
        other => return Err(Error::InvalidParams(format!("model {other} is not 1 or 2"))),
    };
    if let Some((objective, plan)) = file {
        write_atomic(path, &plan_to_json(&PlanFile { status, objective, plan })?)?;
    }
    writeln!(out, "{line}")?;
    Ok(match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::NodeLimitReached => EXIT_NODE_LIMIT,
    })
}

pub fn cmd_report(instance: &Path, plan: &Path, format: Format, out: &mut dyn Write) -> Result<i32> {
    let inst = load_instance(instance)?;
    let table = match load_plan(plan)?.plan {
        Plan::Allocation(p) => report_model1(&inst, &p)?,
        Plan::Transfer(p) => report_model2(&inst, &p)?,
    };
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Text => table.to_text(),
    };
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}

/// Objective of the in-crate solver, `None` when infeasible.
pub fn engine_objective(model: u8, inst: &Instance) -> Result<Option<i64>> {
    let opts = SolveOptions::default();
    let outcome = match model {
        1 => solve_model1(inst, &opts)?.objective,
        _ => solve_model2(inst, &opts)?.objective,
    };
    Ok(outcome)
}

pub fn oracle_objective(model: u8, inst: &Instance) -> Result<Option<i64>> {
    Ok(match model {
        1 => brute_force_model1(inst)?.objective,
        _ => brute_force_model2(inst)?.objective,
    })
}

/// Runs `max_cases` tiny instances through `engine` and the oracle. Prints the
/// first mismatching instance as JSON.
pub fn cmd_check(
    model: u8,
    max_cases: u64,
    seed: u64,
    engine: &dyn Fn(&Instance) -> Result<Option<i64>>,
    out: &mut dyn Write,
) -> i32 {
    let mut matched = 0u64;
    let mut first_failure: Option<(u64, String, Instance)> = None;
    for case in 0..max_cases {
        let inst = tiny_instance(seed, case);
        let verdict = match (engine(&inst), oracle_objective(model, &inst)) {
            (Ok(a), Ok(b)) if a == b => None,
            (Ok(a), Ok(b)) => Some(format!("solver {a:?}, oracle {b:?}")),
            (Err(e), _) => Some(format!("solver error: {e}")),
            (_, Err(e)) => Some(format!("oracle error: {e}")),
        };
        match verdict {
            None => matched += 1,
            Some(why) => {
                if first_failure.is_none() {
                    first_failure = Some((case, why, inst));
                }
            }
        }
    }
    let _ = writeln!(out, "{matched}/{max_cases} match");
    match first_failure {
        None => EXIT_OK,
        Some((case, why, inst)) => {
            let _ = writeln!(out, "first mismatch at case {case}: {why}");
            let _ = out.write_all(instance_to_json(&inst).as_bytes());
            EXIT_MISMATCH
        }
    }
}

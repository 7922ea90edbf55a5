//! JSON files for instances and plans.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::instance::{validate_instance, Instance};
use crate::outcome::SolveStatus;
use crate::plan::{AllocationPlan, TransferPlan};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    schema_version: u32,
    stations: usize,
    zones: usize,
    slots: usize,
    fleet: i64,
    coverage: Vec<Vec<i64>>,
    capacity: Vec<Vec<i64>>,
    hold_cost: Vec<Vec<i64>>,
    dispatch_cost: Vec<Vec<i64>>,
    demand: Vec<Vec<i64>>,
    big_m: i64,
    transfer_cost: i64,
}

fn check_version(found: u32) -> Result<()> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::Format(format!("schema_version {found} is not supported, expected {SCHEMA_VERSION}")))
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    let file = InstanceFile {
        schema_version: SCHEMA_VERSION,
        stations: inst.num_stations,
        zones: inst.num_zones,
        slots: inst.num_slots,
        fleet: inst.fleet_size,
        coverage: inst.coverage.clone(),
        capacity: inst.capacity.clone(),
        hold_cost: inst.hold_cost.clone(),
        dispatch_cost: inst.dispatch_cost.clone(),
        demand: inst.demand.clone(),
        big_m: inst.big_m,
        transfer_cost: inst.transfer_cost,
    };
    to_document(&file)
}

/// Parses an instance without validating it.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let f: InstanceFile = serde_json::from_str(text)?;
    check_version(f.schema_version)?;
    Ok(Instance {
        num_stations: f.stations,
        num_zones: f.zones,
        num_slots: f.slots,
        fleet_size: f.fleet,
        coverage: f.coverage,
        capacity: f.capacity,
        hold_cost: f.hold_cost,
        dispatch_cost: f.dispatch_cost,
        demand: f.demand,
        big_m: f.big_m,
        transfer_cost: f.transfer_cost,
    })
}

/// Reads, parses and validates an instance file.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let inst = instance_from_json(&fs::read_to_string(path)?)?;
    let violations = validate_instance(&inst);
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(Error::InvalidInstance(violations))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Allocation(AllocationPlan),
    Transfer(TransferPlan),
}

impl Plan {
    pub fn model(&self) -> u8 {
        match self {
            Plan::Allocation(_) => 1,
            Plan::Transfer(_) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanFile {
    pub status: SolveStatus,
    pub objective: i64,
    pub plan: Plan,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlanFile {
    schema_version: u32,
    model: u8,
    status: String,
    objective: i64,
    plan: Value,
}

pub fn plan_to_json(file: &PlanFile) -> Result<String> {
    let plan = match &file.plan {
        Plan::Allocation(p) => serde_json::to_value(p)?,
        Plan::Transfer(p) => serde_json::to_value(p)?,
    };
    Ok(to_document(&RawPlanFile {
        schema_version: SCHEMA_VERSION,
        model: file.plan.model(),
        status: file.status.as_str().to_string(),
        objective: file.objective,
        plan,
    }))
}

pub fn plan_from_json(text: &str) -> Result<PlanFile> {
    let raw: RawPlanFile = serde_json::from_str(text)?;
    check_version(raw.schema_version)?;
    let status = match raw.status.as_str() {
        "optimal" => SolveStatus::Optimal,
        "node_limit" => SolveStatus::NodeLimitReached,
        other => return Err(Error::Format(format!("plan status {other:?} is not one of optimal, node_limit"))),
    };
    let plan = match raw.model {
        1 => Plan::Allocation(serde_json::from_value(raw.plan)?),
        2 => Plan::Transfer(serde_json::from_value(raw.plan)?),
        other => return Err(Error::Format(format!("model {other} is not 1 or 2"))),
    };
    Ok(PlanFile { status, objective: raw.objective, plan })
}

pub fn load_plan(path: &Path) -> Result<PlanFile> {
    plan_from_json(&fs::read_to_string(path)?)
}

/// Writes `contents` next to `path` and renames it into place, so a failed
/// write never leaves a truncated file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

fn to_document<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("plain data serializes");
    let mut out = String::new();
    render(&value, 0, &mut out);
    out.push('\n');
    out
}

/// Pretty JSON that keeps arrays of scalars on one line, so matrices print one
/// row per line.
fn render(value: &Value, depth: usize, out: &mut String) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match value {
        Value::Array(items) if items.iter().any(|v| v.is_array() || v.is_object()) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                render(item, depth + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                render(item, depth + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
        scalar_or_flat => out.push_str(&scalar_or_flat.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tiny1;

    #[test]
    fn instance_round_trip() {
        let inst = tiny1();
        let text = instance_to_json(&inst);
        assert!(text.contains("\"coverage\": [\n    [1,0],\n    [1,1]\n  ]"));
        assert_eq!(instance_from_json(&text).unwrap(), inst);
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        let text = instance_to_json(&tiny1());
        let extra = text.replacen('{', "{\"colour\": 1,", 1);
        assert!(matches!(instance_from_json(&extra), Err(Error::Json(_))));
        let old = text.replace("\"schema_version\": 1", "\"schema_version\": 0");
        assert!(matches!(instance_from_json(&old), Err(Error::Format(_))));
    }

    #[test]
    fn plan_round_trip() {
        let inst = tiny1();
        for plan in [Plan::Allocation(AllocationPlan::zeros(&inst)), Plan::Transfer(TransferPlan::zeros(&inst))] {
            let file = PlanFile { status: SolveStatus::Optimal, objective: 0, plan };
            let text = plan_to_json(&file).unwrap();
            assert_eq!(plan_from_json(&text).unwrap(), file);
        }
    }

    #[test]
    fn plan_model_must_match_body() {
        let file = PlanFile {
            status: SolveStatus::Optimal,
            objective: 0,
            plan: Plan::Allocation(AllocationPlan::zeros(&tiny1())),
        };
        let text = plan_to_json(&file).unwrap().replace("\"model\": 1", "\"model\": 2");
        assert!(plan_from_json(&text).is_err());
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/a.json"), "x").is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

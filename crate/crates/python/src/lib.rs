//! Python bindings. Plans cross the boundary as the same JSON documents the
//! command-line tool writes.

use ambuplan::engine::SolveOptions;
use ambuplan::io::{instance_from_json, instance_to_json, plan_from_json, plan_to_json, Plan, PlanFile};
use ambuplan::{Error, SolveOutcome};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn check_model(model: u8) -> PyResult<u8> {
    match model {
        1 | 2 => Ok(model),
        other => Err(PyValueError::new_err(format!("model must be 1 or 2, got {other}"))),
    }
}

/// A planning instance.
#[pyclass(name = "Instance", module = "ambuplan_py", frozen)]
struct PyInstance {
    inner: ambuplan::Instance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: instance_from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        instance_to_json(&self.inner)
    }

    /// Messages of every failed instance check; empty when valid.
    fn validate(&self) -> Vec<String> {
        ambuplan::validate_instance(&self.inner).into_iter().map(|v| v.message).collect()
    }

    #[getter]
    fn num_stations(&self) -> usize {
        self.inner.num_stations
    }

    #[getter]
    fn num_zones(&self) -> usize {
        self.inner.num_zones
    }

    #[getter]
    fn num_slots(&self) -> usize {
        self.inner.num_slots
    }

    #[getter]
    fn fleet_size(&self) -> i64 {
        self.inner.fleet_size
    }

    #[getter]
    fn big_m(&self) -> i64 {
        self.inner.big_m
    }

    #[getter]
    fn transfer_cost(&self) -> i64 {
        self.inner.transfer_cost
    }

    #[getter]
    fn coverage(&self) -> Vec<Vec<i64>> {
        self.inner.coverage.clone()
    }

    #[getter]
    fn capacity(&self) -> Vec<Vec<i64>> {
        self.inner.capacity.clone()
    }

    #[getter]
    fn demand(&self) -> Vec<Vec<i64>> {
        self.inner.demand.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(stations={}, zones={}, slots={}, fleet={})",
            self.inner.num_stations, self.inner.num_zones, self.inner.num_slots, self.inner.fleet_size
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Outcome of a solve. `plan_json` is `None` when there is no plan.
#[pyclass(name = "SolveResult", module = "ambuplan_py", frozen, get_all)]
struct PySolveResult {
    status: String,
    objective: Option<i64>,
    nodes: u64,
    lp_iterations: u64,
    seconds: f64,
    /// Unmet demand per slot, as recomputed by the evaluator.
    slot_shortage: Option<Vec<i64>>,
    plan_json: Option<String>,
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!("SolveResult(status={:?}, objective={:?}, nodes={})", self.status, self.objective, self.nodes)
    }
}

fn wrap<P>(
    inst: &ambuplan::Instance,
    outcome: SolveOutcome<P>,
    to_plan: impl Fn(P) -> Plan,
) -> Result<PySolveResult, Error> {
    let (slot_shortage, plan_json) = match (outcome.plan, outcome.objective) {
        (Some(plan), Some(objective)) => {
            let plan = to_plan(plan);
            let eval = match &plan {
                Plan::Allocation(p) => ambuplan::evaluate_model1(inst, p)?,
                Plan::Transfer(p) => ambuplan::evaluate_model2(inst, p)?,
            };
            let json = plan_to_json(&PlanFile { status: outcome.status, objective, plan })?;
            (Some(eval.slot_shortage), Some(json))
        }
        _ => (None, None),
    };
    Ok(PySolveResult {
        status: outcome.status.as_str().to_string(),
        objective: outcome.objective,
        nodes: outcome.stats.nodes,
        lp_iterations: outcome.stats.lp_iterations,
        seconds: outcome.stats.elapsed.as_secs_f64(),
        slot_shortage,
        plan_json,
    })
}

/// Random instance from a size preset (1 to 5) or a JSON parameter document.
#[pyfunction]
#[pyo3(signature = (seed, preset=None, params_json=None))]
fn generate(seed: u64, preset: Option<u32>, params_json: Option<&str>) -> PyResult<PyInstance> {
    let params = match (preset, params_json) {
        (Some(k), None) => ambuplan::preset(k).map_err(to_py)?,
        (None, Some(text)) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        _ => return Err(PyValueError::new_err("pass exactly one of preset and params_json")),
    };
    Ok(PyInstance { inner: ambuplan::generate(&params, seed).map_err(to_py)? })
}

#[pyfunction]
fn tiny_instance(seed: u64, case: u64) -> PyInstance {
    PyInstance { inner: ambuplan::tiny_instance(seed, case) }
}

#[pyfunction]
#[pyo3(signature = (instance, model, node_limit=None, workers=1, deterministic=true))]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    model: u8,
    node_limit: Option<u64>,
    workers: usize,
    deterministic: bool,
) -> PyResult<PySolveResult> {
    check_model(model)?;
    let inst = instance.inner.clone();
    let opts = SolveOptions { node_limit, workers: workers.max(1), deterministic };
    py.detach(move || match model {
        1 => wrap(&inst, ambuplan::solve_model1(&inst, &opts)?, Plan::Allocation),
        _ => wrap(&inst, ambuplan::solve_model2(&inst, &opts)?, Plan::Transfer),
    })
    .map_err(to_py)
}

/// Exhaustive optimum; refuses instances with too many points to enumerate.
#[pyfunction]
fn brute_force(py: Python<'_>, instance: &PyInstance, model: u8) -> PyResult<PySolveResult> {
    check_model(model)?;
    let inst = instance.inner.clone();
    py.detach(move || match model {
        1 => wrap(&inst, ambuplan::brute_force_model1(&inst)?, Plan::Allocation),
        _ => wrap(&inst, ambuplan::brute_force_model2(&inst)?, Plan::Transfer),
    })
    .map_err(to_py)
}

/// Exact objective and violation messages of a plan document.
#[pyfunction]
fn evaluate(instance: &PyInstance, plan_json: &str) -> PyResult<(i64, Vec<String>)> {
    let eval = match plan_from_json(plan_json).map_err(to_py)?.plan {
        Plan::Allocation(p) => ambuplan::evaluate_model1(&instance.inner, &p),
        Plan::Transfer(p) => ambuplan::evaluate_model2(&instance.inner, &p),
    }
    .map_err(to_py)?;
    Ok((eval.objective, eval.violations.into_iter().map(|v| v.message).collect()))
}

/// Per-slot shortage table as `"csv"` or `"text"`.
#[pyfunction]
#[pyo3(signature = (instance, plan_json, format="text"))]
fn report(instance: &PyInstance, plan_json: &str, format: &str) -> PyResult<String> {
    let table = match plan_from_json(plan_json).map_err(to_py)?.plan {
        Plan::Allocation(p) => ambuplan::report_model1(&instance.inner, &p),
        Plan::Transfer(p) => ambuplan::report_model2(&instance.inner, &p),
    }
    .map_err(to_py)?;
    match format {
        "csv" => Ok(table.to_csv()),
        "text" => Ok(table.to_text()),
        other => Err(PyValueError::new_err(format!("format must be \"csv\" or \"text\", got {other:?}"))),
    }
}

#[pymodule]
fn ambuplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(tiny_instance, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapped_result_carries_a_plan_document() {
        let inst = ambuplan::tiny_instance(1, 0);
        let outcome = ambuplan::solve_model2(&inst, &SolveOptions::default()).unwrap();
        let objective = outcome.objective;
        let result = wrap(&inst, outcome, Plan::Transfer).unwrap();
        assert_eq!(result.status, "optimal");
        let file = plan_from_json(result.plan_json.as_deref().unwrap()).unwrap();
        assert_eq!(Some(file.objective), objective);
        assert_eq!(result.slot_shortage.unwrap().len(), inst.num_slots);
    }

    #[test]
    fn infeasible_results_have_no_plan() {
        let mut inst = ambuplan::tiny_instance(1, 0);
        inst.coverage.iter_mut().for_each(|row| row.iter_mut().for_each(|a| *a = 0));
        inst.demand[0][0] = 1;
        let outcome = ambuplan::solve_model1(&inst, &SolveOptions::default()).unwrap();
        let result = wrap(&inst, outcome, Plan::Allocation).unwrap();
        assert_eq!(result.status, "infeasible");
        assert!(result.plan_json.is_none() && result.slot_shortage.is_none());
    }
}

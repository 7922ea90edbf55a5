//! Exact solver for the planning models: a bounded-variable primal simplex for
//! linear relaxations and best-bound branch-and-bound on top of it.

mod branch;
mod factor;
mod program;
mod simplex;

pub use branch::solve_milp;
pub use program::{Constraint, LinearProgram, Relation};

use crate::error::Result;

/// Row and bound feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Distance from the nearest integer below which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Pivot elements at or below this magnitude are never used.
pub const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
}

impl LpSolution {
    /// True when every value is within [`INTEGRALITY_TOL`] of an integer.
    pub fn is_integral(&self) -> bool {
        self.values.iter().all(|v| (v - v.round()).abs() <= INTEGRALITY_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    /// The relaxation is unbounded; no finite optimum exists or none was
    /// established.
    Unbounded,
    NodeLimitReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Best integral point found; integer-flagged entries are exact integers.
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub nodes: u64,
    /// Proven lower bound on the optimum. Equals `objective` when optimal.
    pub best_bound: f64,
    pub lp_iterations: u64,
    pub root_objective: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Maximum branch-and-bound nodes to evaluate; `None` is unlimited.
    pub node_limit: Option<u64>,
    pub workers: usize,
    /// With several workers, evaluate nodes in synchronized rounds so the
    /// returned incumbent does not depend on thread timing.
    pub deterministic: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { node_limit: None, workers: 1, deterministic: true }
    }
}

/// Solves the continuous relaxation of `lp` (integrality flags are ignored).
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    let prepared = simplex::Prepared::new(lp)?;
    let (sol, _) = simplex::solve_prepared(&prepared, &lp.lower, &lp.upper, None)?;
    Ok(sol)
}

use std::fmt;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimitReached,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NodeLimitReached => "node_limit",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Branch-and-bound nodes, or enumerated points for the oracle.
    pub nodes: u64,
    pub lp_iterations: u64,
    pub best_bound: Option<f64>,
    pub root_objective: Option<f64>,
    pub elapsed: Duration,
}

/// Result of solving one model on one instance. `objective` is exact and, when
/// a plan is present, equal to the evaluator's recomputation of it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<P> {
    pub status: SolveStatus,
    pub objective: Option<i64>,
    pub plan: Option<P>,
    pub stats: SolveStats,
}

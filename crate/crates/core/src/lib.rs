//! Multi-period ambulance location planning.
//!
//! Two integer models are provided. The allocation model ([`model1`]) assigns
//! ambulances to stations slot by slot and carries unused ones forward as
//! inventory. The transfer model ([`model2`]) stocks stations, dispatches
//! per zone and lets ambulances move between stations at slot boundaries.
//! Both are solved exactly by the in-crate [`engine`] and can be checked
//! against the exhaustive [`oracle`] on small instances.

pub mod cli;
pub mod engine;
pub mod error;
pub mod evaluate;
pub mod instance;
pub mod instgen;
pub mod io;
pub mod model1;
pub mod model2;
pub mod oracle;
pub mod outcome;
pub mod plan;
pub mod report;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use evaluate::{evaluate_model1, evaluate_model2, Evaluation, Violation, ViolationKind};
pub use instance::{validate_instance, Instance};
pub use instgen::{generate, preset, tiny_instance, Bounds, GenParams};
pub use model1::{build_model1, solve_model1, Model1Map};
pub use model2::{build_model2, solve_model2, Model2Map};
pub use oracle::{brute_force_model1, brute_force_model2};
pub use outcome::{SolveOutcome, SolveStats, SolveStatus};
pub use plan::{AllocationPlan, TransferPlan};
pub use report::{report_model1, report_model2, ReportRow, ReportTable};

//! Solver-independent plan checking.
//!
//! The evaluators recompute objectives in exact integer arithmetic and list
//! every violated constraint. They never trust anything a solver reports, so
//! they double as the round-trip check for solver output.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{clamp_i64, Instance};
use crate::plan::{AllocationPlan, TransferPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    // instance checks
    EmptyDimension,
    Shape,
    NegativeValue,
    CoverageNotBinary,
    BigMTooSmall,
    // shared by both plans
    CapacityExceeded,
    FleetExceeded,
    // allocation plans
    InventoryBalance,
    DispatchExceedsAlloc,
    AllocCoverage,
    DispatchCoverage,
    DispatchTotal,
    // transfer plans
    StockBalance,
    TransferOutExceedsStock,
    TransferConservation,
    TransferInFirstSlot,
    DispatchExceedsStock,
    ServeUncovered,
    DemandBalance,
    FleetDrift,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        use ViolationKind::*;
        match self {
            EmptyDimension => "empty_dimension",
            Shape => "shape",
            NegativeValue => "negative_value",
            CoverageNotBinary => "coverage_not_binary",
            BigMTooSmall => "big_m_too_small",
            CapacityExceeded => "capacity_exceeded",
            FleetExceeded => "fleet_exceeded",
            InventoryBalance => "inventory_balance",
            DispatchExceedsAlloc => "dispatch_exceeds_alloc",
            AllocCoverage => "alloc_coverage",
            DispatchCoverage => "dispatch_coverage",
            DispatchTotal => "dispatch_total",
            StockBalance => "stock_balance",
            TransferOutExceedsStock => "transfer_out_exceeds_stock",
            TransferConservation => "transfer_conservation",
            TransferInFirstSlot => "transfer_in_first_slot",
            DispatchExceedsStock => "dispatch_exceeds_stock",
            ServeUncovered => "serve_uncovered",
            DemandBalance => "demand_balance",
            FleetDrift => "fleet_drift",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One failed check. `lhs` and `rhs` are the two sides of the violated
/// relation as evaluated, so `message` can always be reproduced from them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub station: Option<usize>,
    pub zone: Option<usize>,
    pub slot: Option<usize>,
    pub lhs: i64,
    pub rhs: i64,
    pub message: String,
}

impl Violation {
    pub(crate) fn new(
        kind: ViolationKind,
        (station, zone, slot): (Option<usize>, Option<usize>, Option<usize>),
        lhs: i64,
        rhs: i64,
        message: String,
    ) -> Self {
        Violation { kind, station, zone, slot, lhs, rhs, message }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.kind, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub objective: i64,
    pub violations: Vec<Violation>,
    /// Unmet demand per slot recomputed from demand and dispatches rather than
    /// read from the plan's shortage variables.
    pub slot_shortage: Vec<i64>,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_dims(what: &str, m: &[Vec<i64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {rows}x{cols}"
        )));
    }
    Ok(())
}

fn check_instance_shape(inst: &Instance) -> Result<()> {
    if inst.has_consistent_shape() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(
            "instance matrices do not match its declared dimensions".into(),
        ))
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(
        &mut self,
        kind: ViolationKind,
        at: (Option<usize>, Option<usize>, Option<usize>),
        lhs: i64,
        rhs: i64,
        message: String,
    ) {
        self.0.push(Violation::new(kind, at, lhs, rhs, message));
    }

    fn nonnegative(&mut self, name: &str, m: &[Vec<i64>], at: impl Fn(usize, usize) -> (Option<usize>, Option<usize>, Option<usize>)) {
        for (r, row) in m.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v < 0 {
                    self.push(ViolationKind::NegativeValue, at(r, c), v, 0, format!("{name}[{r}][{c}] = {v} < 0"));
                }
            }
        }
    }
}

fn st(j: usize, t: usize) -> (Option<usize>, Option<usize>, Option<usize>) {
    (Some(j), None, Some(t))
}

fn zt(i: usize, t: usize) -> (Option<usize>, Option<usize>, Option<usize>) {
    (None, Some(i), Some(t))
}

/// Objective and constraint check for an allocation-model plan.
///
/// Objective: `sum c[j][t] x[j][t] + c'[j][t] s[j][t] + M * sum l[t]`.
pub fn evaluate_model1(inst: &Instance, plan: &AllocationPlan) -> Result<Evaluation> {
    check_instance_shape(inst)?;
    let (nj, ni, nt) = (inst.num_stations, inst.num_zones, inst.num_slots);
    check_dims("alloc", &plan.alloc, nj, nt)?;
    check_dims("dispatch", &plan.dispatch, nj, nt)?;
    check_dims("inventory", &plan.inventory, nj, nt)?;
    if plan.shortage.len() != nt {
        return Err(Error::DimensionMismatch(format!("shortage must have {nt} entries")));
    }

    let x = &plan.alloc;
    let s = &plan.dispatch;
    let inv = &plan.inventory;
    let l = &plan.shortage;
    let mut v = Collector(Vec::new());

    v.nonnegative("x", x, st);
    v.nonnegative("s", s, st);
    v.nonnegative("I", inv, st);
    for (t, &lt) in l.iter().enumerate() {
        if lt < 0 {
            v.push(ViolationKind::NegativeValue, (None, None, Some(t)), lt, 0, format!("l[{t}] = {lt} < 0"));
        }
    }

    let mut objective: i128 = 0;
    for j in 0..nj {
        for t in 0..nt {
            objective += inst.hold_cost[j][t] as i128 * x[j][t] as i128;
            objective += inst.dispatch_cost[j][t] as i128 * s[j][t] as i128;

            let prev = if t == 0 { 0 } else { inv[j][t - 1] };
            let lhs = prev + x[j][t] - s[j][t];
            if lhs != inv[j][t] {
                v.push(
                    ViolationKind::InventoryBalance,
                    st(j, t),
                    lhs,
                    inv[j][t],
                    format!("I[{j}][{t}-1] + x - s = {lhs} but I[{j}][{t}] = {}", inv[j][t]),
                );
            }
            if s[j][t] > x[j][t] {
                v.push(
                    ViolationKind::DispatchExceedsAlloc,
                    st(j, t),
                    s[j][t],
                    x[j][t],
                    format!("s[{j}][{t}] = {} > x[{j}][{t}] = {}", s[j][t], x[j][t]),
                );
            }
            if x[j][t] > inst.capacity[j][t] {
                v.push(
                    ViolationKind::CapacityExceeded,
                    st(j, t),
                    x[j][t],
                    inst.capacity[j][t],
                    format!("x[{j}][{t}] = {} > n[{j}][{t}] = {}", x[j][t], inst.capacity[j][t]),
                );
            }
        }
    }
    objective += inst.big_m as i128 * l.iter().map(|&v| v as i128).sum::<i128>();

    let mut slot_shortage = Vec::with_capacity(nt);
    for t in 0..nt {
        let allocated: i64 = (0..nj).map(|j| x[j][t]).sum();
        if allocated > inst.fleet_size {
            v.push(
                ViolationKind::FleetExceeded,
                (None, None, Some(t)),
                allocated,
                inst.fleet_size,
                format!("sum_j x[j][{t}] = {allocated} > m = {}", inst.fleet_size),
            );
        }
        for i in 0..ni {
            let d = inst.demand[i][t];
            let covered_alloc: i64 = (0..nj).filter(|&j| inst.covers(j, i)).map(|j| x[j][t]).sum();
            if covered_alloc < d {
                v.push(
                    ViolationKind::AllocCoverage,
                    zt(i, t),
                    covered_alloc,
                    d,
                    format!("sum_j a[j][{i}] x[j][{t}] = {covered_alloc} < d[{i}][{t}] = {d}"),
                );
            }
            let covered_dispatch: i64 =
                (0..nj).filter(|&j| inst.covers(j, i)).map(|j| s[j][t]).sum::<i64>() + l[t];
            if covered_dispatch < d {
                v.push(
                    ViolationKind::DispatchCoverage,
                    zt(i, t),
                    covered_dispatch,
                    d,
                    format!("sum_j a[j][{i}] s[j][{t}] + l[{t}] = {covered_dispatch} < d[{i}][{t}] = {d}"),
                );
            }
        }
        let dispatched: i64 = (0..nj).map(|j| s[j][t]).sum();
        let total = inst.slot_demand(t);
        if dispatched + l[t] != total {
            v.push(
                ViolationKind::DispatchTotal,
                (None, None, Some(t)),
                dispatched + l[t],
                total,
                format!("sum_j s[j][{t}] + l[{t}] = {} but sum_i d[i][{t}] = {total}", dispatched + l[t]),
            );
        }
        slot_shortage.push(total - dispatched);
    }

    Ok(Evaluation { objective: clamp_i64(objective), violations: v.0, slot_shortage })
}

/// Objective and constraint check for a transfer-model plan.
///
/// Objective: `sum c[j][t] S[j][t] + sum c'[j][t] y[j][i][t]
/// + tau * sum x+[j][t] + M * sum l[i][t]`.
pub fn evaluate_model2(inst: &Instance, plan: &TransferPlan) -> Result<Evaluation> {
    check_instance_shape(inst)?;
    let (nj, ni, nt) = (inst.num_stations, inst.num_zones, inst.num_slots);
    check_dims("stock", &plan.stock, nj, nt)?;
    check_dims("transfer_in", &plan.transfer_in, nj, nt)?;
    check_dims("transfer_out", &plan.transfer_out, nj, nt)?;
    check_dims("shortage", &plan.shortage, ni, nt)?;
    if plan.serve.len() != nj {
        return Err(Error::DimensionMismatch(format!("serve must have {nj} station entries")));
    }
    for (j, per_zone) in plan.serve.iter().enumerate() {
        check_dims(&format!("serve[{j}]"), per_zone, ni, nt)?;
    }

    let stock = &plan.stock;
    let y = &plan.serve;
    let xin = &plan.transfer_in;
    let xout = &plan.transfer_out;
    let l = &plan.shortage;
    let mut v = Collector(Vec::new());

    v.nonnegative("S", stock, st);
    v.nonnegative("x+", xin, st);
    v.nonnegative("x-", xout, st);
    v.nonnegative("l", l, zt);
    for (j, per_zone) in y.iter().enumerate() {
        v.nonnegative(&format!("y[{j}]"), per_zone, |i, t| (Some(j), Some(i), Some(t)));
    }

    let mut objective: i128 = 0;
    for j in 0..nj {
        for t in 0..nt {
            objective += inst.hold_cost[j][t] as i128 * stock[j][t] as i128;
            for i in 0..ni {
                objective += inst.dispatch_cost[j][t] as i128 * y[j][i][t] as i128;
            }
            if t > 0 {
                objective += inst.transfer_cost as i128 * xin[j][t] as i128;
            }
        }
    }
    objective += inst.big_m as i128 * l.iter().flatten().map(|&v| v as i128).sum::<i128>();

    let initial: i64 = (0..nj).map(|j| stock[j][0]).sum();
    if initial > inst.fleet_size {
        v.push(
            ViolationKind::FleetExceeded,
            (None, None, Some(0)),
            initial,
            inst.fleet_size,
            format!("sum_j S[j][0] = {initial} > m = {}", inst.fleet_size),
        );
    }

    for t in 0..nt {
        for j in 0..nj {
            if stock[j][t] > inst.capacity[j][t] {
                v.push(
                    ViolationKind::CapacityExceeded,
                    st(j, t),
                    stock[j][t],
                    inst.capacity[j][t],
                    format!("S[{j}][{t}] = {} > n[{j}][{t}] = {}", stock[j][t], inst.capacity[j][t]),
                );
            }
            if t == 0 {
                if xin[j][0] != 0 || xout[j][0] != 0 {
                    v.push(
                        ViolationKind::TransferInFirstSlot,
                        st(j, 0),
                        xin[j][0] + xout[j][0],
                        0,
                        format!("station {j} has transfers in the first slot"),
                    );
                }
            } else {
                let lhs = stock[j][t - 1] + xin[j][t] - xout[j][t];
                if lhs != stock[j][t] {
                    v.push(
                        ViolationKind::StockBalance,
                        st(j, t),
                        lhs,
                        stock[j][t],
                        format!("S[{j}][{t}-1] + x+ - x- = {lhs} but S[{j}][{t}] = {}", stock[j][t]),
                    );
                }
                if xout[j][t] > stock[j][t - 1] {
                    v.push(
                        ViolationKind::TransferOutExceedsStock,
                        st(j, t),
                        xout[j][t],
                        stock[j][t - 1],
                        format!("x-[{j}][{t}] = {} > S[{j}][{t}-1] = {}", xout[j][t], stock[j][t - 1]),
                    );
                }
            }
            let sent: i64 = (0..ni).map(|i| y[j][i][t]).sum();
            if sent > stock[j][t] {
                v.push(
                    ViolationKind::DispatchExceedsStock,
                    st(j, t),
                    sent,
                    stock[j][t],
                    format!("sum_i y[{j}][i][{t}] = {sent} > S[{j}][{t}] = {}", stock[j][t]),
                );
            }
            for i in 0..ni {
                if !inst.covers(j, i) && y[j][i][t] != 0 {
                    v.push(
                        ViolationKind::ServeUncovered,
                        (Some(j), Some(i), Some(t)),
                        y[j][i][t],
                        0,
                        format!("y[{j}][{i}][{t}] = {} but station {j} does not cover zone {i}", y[j][i][t]),
                    );
                }
            }
        }
        if t > 0 {
            let total_in: i64 = (0..nj).map(|j| xin[j][t]).sum();
            let total_out: i64 = (0..nj).map(|j| xout[j][t]).sum();
            if total_in != total_out {
                v.push(
                    ViolationKind::TransferConservation,
                    (None, None, Some(t)),
                    total_in,
                    total_out,
                    format!("sum_j x+[j][{t}] = {total_in} but sum_j x-[j][{t}] = {total_out}"),
                );
            }
        }
        for i in 0..ni {
            let served: i64 = (0..nj).map(|j| y[j][i][t]).sum();
            if served + l[i][t] != inst.demand[i][t] {
                v.push(
                    ViolationKind::DemandBalance,
                    zt(i, t),
                    served + l[i][t],
                    inst.demand[i][t],
                    format!(
                        "sum_j y[j][{i}][{t}] + l[{i}][{t}] = {} but d[{i}][{t}] = {}",
                        served + l[i][t],
                        inst.demand[i][t]
                    ),
                );
            }
        }
        let fleet = plan.fleet_in_slot(t);
        if t > 0 && fleet != initial {
            v.push(
                ViolationKind::FleetDrift,
                (None, None, Some(t)),
                fleet,
                initial,
                format!("sum_j S[j][{t}] = {fleet} differs from sum_j S[j][0] = {initial}"),
            );
        }
    }

    let slot_shortage = (0..nt)
        .map(|t| {
            (0..ni)
                .map(|i| inst.demand[i][t] - (0..nj).map(|j| y[j][i][t]).sum::<i64>())
                .sum()
        })
        .collect();

    Ok(Evaluation { objective: clamp_i64(objective), violations: v.0, slot_shortage })
}

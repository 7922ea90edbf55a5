//! Problem data shared by both planning models.
//!
//! Indices follow one convention everywhere: `j` is a station, `i` is a demand
//! zone and `t` is a time slot, all zero-based. Station-by-slot matrices are
//! stored `[j][t]`, zone-by-slot matrices `[i][t]` and the coverage matrix
//! `[j][i]`.

use crate::evaluate::{Violation, ViolationKind};

/// Immutable description of one multi-period ambulance planning problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub num_stations: usize,
    pub num_zones: usize,
    pub num_slots: usize,
    /// Total ambulances available in the system.
    pub fleet_size: i64,
    /// `coverage[j][i] == 1` iff station `j` can serve zone `i`.
    pub coverage: Vec<Vec<i64>>,
    /// Station capacity per slot, `[j][t]`.
    pub capacity: Vec<Vec<i64>>,
    /// Cost per ambulance kept at a station during a slot, `[j][t]`.
    pub hold_cost: Vec<Vec<i64>>,
    /// Cost per ambulance dispatched from a station during a slot, `[j][t]`.
    pub dispatch_cost: Vec<Vec<i64>>,
    /// Zone demand per slot, `[i][t]`.
    pub demand: Vec<Vec<i64>>,
    /// Penalty per unit of unmet demand.
    pub big_m: i64,
    /// Cost per ambulance moved between stations at a slot boundary.
    pub transfer_cost: i64,
}

impl Instance {
    pub fn covers(&self, station: usize, zone: usize) -> bool {
        self.coverage[station][zone] == 1
    }

    /// Total demand of all zones in slot `t`.
    pub fn slot_demand(&self, t: usize) -> i64 {
        self.demand.iter().map(|row| row[t]).sum()
    }

    /// `(max hold cost + max dispatch cost + transfer cost) * fleet * slots`,
    /// the most any shortage-free plan of either model can cost. A valid
    /// `big_m` must exceed it.
    pub fn big_m_floor(&self) -> i128 {
        let max_hold = max_entry(&self.hold_cost);
        let max_dispatch = max_entry(&self.dispatch_cost);
        (max_hold as i128 + max_dispatch as i128 + self.transfer_cost as i128)
            * self.fleet_size as i128
            * self.num_slots as i128
    }

    /// Checks dimensions only, for callers that receive plans of a given shape.
    pub(crate) fn has_consistent_shape(&self) -> bool {
        shape_ok(&self.coverage, self.num_stations, self.num_zones)
            && shape_ok(&self.capacity, self.num_stations, self.num_slots)
            && shape_ok(&self.hold_cost, self.num_stations, self.num_slots)
            && shape_ok(&self.dispatch_cost, self.num_stations, self.num_slots)
            && shape_ok(&self.demand, self.num_zones, self.num_slots)
    }
}

fn max_entry(m: &[Vec<i64>]) -> i64 {
    m.iter().flatten().copied().max().unwrap_or(0).max(0)
}

fn shape_ok(m: &[Vec<i64>], rows: usize, cols: usize) -> bool {
    m.len() == rows && m.iter().all(|r| r.len() == cols)
}

pub(crate) fn clamp_i64(v: i128) -> i64 {
    v.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

/// Returns one violation per failed instance invariant; empty means valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();

    for (name, n) in [
        ("num_stations", inst.num_stations),
        ("num_zones", inst.num_zones),
        ("num_slots", inst.num_slots),
    ] {
        if n == 0 {
            out.push(Violation::new(
                ViolationKind::EmptyDimension,
                (None, None, None),
                0,
                1,
                format!("{name} must be positive"),
            ));
        }
    }

    let matrices: [(&str, &Vec<Vec<i64>>, usize, usize, bool); 5] = [
        ("coverage", &inst.coverage, inst.num_stations, inst.num_zones, false),
        ("capacity", &inst.capacity, inst.num_stations, inst.num_slots, true),
        ("hold_cost", &inst.hold_cost, inst.num_stations, inst.num_slots, true),
        ("dispatch_cost", &inst.dispatch_cost, inst.num_stations, inst.num_slots, true),
        ("demand", &inst.demand, inst.num_zones, inst.num_slots, true),
    ];
    let mut shapes_ok = true;
    for (name, m, rows, cols, by_slot) in matrices {
        if !shape_ok(m, rows, cols) {
            shapes_ok = false;
            let got_cols = m.iter().map(Vec::len).find(|&c| c != cols).unwrap_or(cols);
            out.push(Violation::new(
                ViolationKind::Shape,
                (None, None, None),
                (m.len() * got_cols) as i64,
                (rows * cols) as i64,
                format!(
                    "{name} must be {rows}x{cols}, got {} rows (row width {got_cols})",
                    m.len()
                ),
            ));
            continue;
        }
        for (r, row) in m.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let at = match (name, by_slot) {
                    ("coverage", _) => (Some(r), Some(c), None),
                    ("demand", _) => (None, Some(r), Some(c)),
                    _ => (Some(r), None, Some(c)),
                };
                if name == "coverage" {
                    if v != 0 && v != 1 {
                        out.push(Violation::new(
                            ViolationKind::CoverageNotBinary,
                            at,
                            v,
                            1,
                            format!("coverage[{r}][{c}] = {v} is not 0 or 1"),
                        ));
                    }
                } else if v < 0 {
                    out.push(Violation::new(
                        ViolationKind::NegativeValue,
                        at,
                        v,
                        0,
                        format!("{name}[{r}][{c}] = {v} is negative"),
                    ));
                }
            }
        }
    }

    for (name, v) in [("fleet_size", inst.fleet_size), ("transfer_cost", inst.transfer_cost)] {
        if v < 0 {
            out.push(Violation::new(
                ViolationKind::NegativeValue,
                (None, None, None),
                v,
                0,
                format!("{name} = {v} is negative"),
            ));
        }
    }

    if inst.big_m <= 0 {
        out.push(Violation::new(
            ViolationKind::BigMTooSmall,
            (None, None, None),
            inst.big_m,
            1,
            format!("big_m = {} must be positive", inst.big_m),
        ));
    } else if shapes_ok {
        let floor = inst.big_m_floor();
        if (inst.big_m as i128) <= floor {
            out.push(Violation::new(
                ViolationKind::BigMTooSmall,
                (None, None, None),
                inst.big_m,
                clamp_i64(floor),
                format!(
                    "big_m = {} must exceed (max hold + max dispatch + transfer) * fleet * slots = {floor}",
                    inst.big_m
                ),
            ));
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tiny1;

    #[test]
    fn tiny_instance_is_valid() {
        assert!(validate_instance(&tiny1()).is_empty());
    }

    #[test]
    fn non_binary_coverage_is_reported_once() {
        let mut inst = tiny1();
        inst.coverage[1][0] = 2;
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::CoverageNotBinary);
        assert_eq!((v[0].station, v[0].zone), (Some(1), Some(0)));
    }

    #[test]
    fn big_m_floor_is_recomputed() {
        // max costs 10 and 10, m = 100, T = 4: floor = (10 + 10 + 0) * 100 * 4.
        let j = 2;
        let t = 4;
        let inst = Instance {
            num_stations: j,
            num_zones: 1,
            num_slots: t,
            fleet_size: 100,
            coverage: vec![vec![1]; j],
            capacity: vec![vec![5; t]; j],
            hold_cost: vec![vec![10; t]; j],
            dispatch_cost: vec![vec![10; t]; j],
            demand: vec![vec![1; t]],
            big_m: 1,
            transfer_cost: 0,
        };
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::BigMTooSmall);
        assert_eq!(v[0].lhs, 1);
        assert_eq!(v[0].rhs, 8000);

        let ok = Instance { big_m: 8001, ..inst.clone() };
        assert!(validate_instance(&ok).is_empty());
        let edge = Instance { big_m: 8000, ..inst };
        assert_eq!(validate_instance(&edge).len(), 1);
    }

    #[test]
    fn ragged_and_negative_data_are_reported() {
        let mut inst = tiny1();
        inst.capacity[0].push(3);
        inst.demand[1][0] = -1;
        inst.fleet_size = -2;
        let kinds: Vec<_> = validate_instance(&inst).into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::Shape));
        assert_eq!(kinds.iter().filter(|k| **k == ViolationKind::NegativeValue).count(), 2);
    }

    #[test]
    fn empty_dimensions_are_rejected() {
        let mut inst = tiny1();
        inst.num_slots = 0;
        let v = validate_instance(&inst);
        assert!(v.iter().any(|v| v.kind == ViolationKind::EmptyDimension));
    }
}

//! Small hand-checkable instances for unit tests.

use crate::instance::Instance;

/// Two stations, two zones, one slot. Station 0 covers zone 0 only, station 1
/// covers both. Both models have optimum 5.
pub fn tiny1() -> Instance {
    Instance {
        num_stations: 2,
        num_zones: 2,
        num_slots: 1,
        fleet_size: 3,
        coverage: vec![vec![1, 0], vec![1, 1]],
        capacity: vec![vec![2], vec![2]],
        hold_cost: vec![vec![1], vec![1]],
        dispatch_cost: vec![vec![1], vec![2]],
        demand: vec![vec![1], vec![1]],
        big_m: 1000,
        transfer_cost: 0,
    }
}

pub fn zero_demand() -> Instance {
    let mut inst = tiny1();
    inst.demand = vec![vec![0], vec![0]];
    inst
}

/// Zone 1 is covered by no station.
pub fn uncovered(demand: i64) -> Instance {
    let mut inst = tiny1();
    inst.coverage = vec![vec![1, 0], vec![1, 0]];
    inst.demand = vec![vec![1], vec![demand]];
    inst
}

/// `tiny1` repeated over `slots` identical slots.
pub fn repeated(inst: &Instance, slots: usize) -> Instance {
    let widen = |m: &Vec<Vec<i64>>| m.iter().map(|r| vec![r[0]; slots]).collect();
    Instance {
        num_slots: slots,
        capacity: widen(&inst.capacity),
        hold_cost: widen(&inst.hold_cost),
        dispatch_cost: widen(&inst.dispatch_cost),
        demand: widen(&inst.demand),
        ..inst.clone()
    }
}

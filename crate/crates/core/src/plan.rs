use serde::{Deserialize, Serialize};

use crate::instance::Instance;

/// Solution of the allocation model: per-slot allocation and dispatch with
/// inventory carried between slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationPlan {
    /// Ambulances allocated to station `j` in slot `t`, `[j][t]`.
    pub alloc: Vec<Vec<i64>>,
    /// Ambulances dispatched from station `j` in slot `t`, `[j][t]`.
    pub dispatch: Vec<Vec<i64>>,
    /// End-of-slot inventory, `[j][t]`.
    pub inventory: Vec<Vec<i64>>,
    /// Aggregate shortage per slot.
    pub shortage: Vec<i64>,
}

impl AllocationPlan {
    pub fn zeros(inst: &Instance) -> Self {
        let st = vec![vec![0; inst.num_slots]; inst.num_stations];
        AllocationPlan {
            alloc: st.clone(),
            dispatch: st.clone(),
            inventory: st,
            shortage: vec![0; inst.num_slots],
        }
    }

    pub fn total_shortage(&self) -> i64 {
        self.shortage.iter().sum()
    }
}

/// Solution of the transfer model: station stock per slot, zone dispatches and
/// inter-station transfers at slot boundaries.
///
/// Transfers happen at the start of a slot, so `transfer_in[j][0]` and
/// `transfer_out[j][0]` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferPlan {
    /// Ambulances stationed at `j` during slot `t`, `[j][t]`.
    pub stock: Vec<Vec<i64>>,
    /// Dispatches from station `j` to zone `i` in slot `t`, `[j][i][t]`.
    pub serve: Vec<Vec<Vec<i64>>>,
    pub transfer_in: Vec<Vec<i64>>,
    pub transfer_out: Vec<Vec<i64>>,
    /// Unmet demand per zone, `[i][t]`.
    pub shortage: Vec<Vec<i64>>,
}

impl TransferPlan {
    pub fn zeros(inst: &Instance) -> Self {
        let (j, i, t) = (inst.num_stations, inst.num_zones, inst.num_slots);
        TransferPlan {
            stock: vec![vec![0; t]; j],
            serve: vec![vec![vec![0; t]; i]; j],
            transfer_in: vec![vec![0; t]; j],
            transfer_out: vec![vec![0; t]; j],
            shortage: vec![vec![0; t]; i],
        }
    }

    pub fn total_shortage(&self) -> i64 {
        self.shortage.iter().flatten().sum()
    }

    /// Ambulances stationed across the whole system in slot `t`.
    pub fn fleet_in_slot(&self, t: usize) -> i64 {
        self.stock.iter().map(|row| row[t]).sum()
    }
}

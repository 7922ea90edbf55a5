//! Per-slot shortage tables: one row per slot, one column per zone, then the
//! slot's shortage. Zone cells read `served/demand`.

use crate::error::Result;
use crate::evaluate::{evaluate_model1, evaluate_model2};
use crate::instance::Instance;
use crate::plan::{AllocationPlan, TransferPlan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub demand: Vec<i64>,
    pub served: Vec<i64>,
    pub shortage: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

/// Served counts are the covering dispatches, capped at demand.
pub fn report_model1(inst: &Instance, plan: &AllocationPlan) -> Result<ReportTable> {
    let eval = evaluate_model1(inst, plan)?;
    let rows = (0..inst.num_slots)
        .map(|t| {
            let demand: Vec<i64> = (0..inst.num_zones).map(|i| inst.demand[i][t]).collect();
            let served = (0..inst.num_zones)
                .map(|i| {
                    let reach: i64 =
                        (0..inst.num_stations).filter(|&j| inst.covers(j, i)).map(|j| plan.dispatch[j][t]).sum();
                    reach.min(demand[i])
                })
                .collect();
            ReportRow { demand, served, shortage: eval.slot_shortage[t] }
        })
        .collect();
    Ok(ReportTable { rows })
}

pub fn report_model2(inst: &Instance, plan: &TransferPlan) -> Result<ReportTable> {
    let eval = evaluate_model2(inst, plan)?;
    let rows = (0..inst.num_slots)
        .map(|t| ReportRow {
            demand: (0..inst.num_zones).map(|i| inst.demand[i][t]).collect(),
            served: (0..inst.num_zones)
                .map(|i| (0..inst.num_stations).map(|j| plan.serve[j][i][t]).sum())
                .collect(),
            shortage: eval.slot_shortage[t],
        })
        .collect();
    Ok(ReportTable { rows })
}

impl ReportTable {
    fn header(&self) -> Vec<String> {
        let zones = self.rows.first().map_or(0, |r| r.demand.len());
        let mut h = vec!["Slot".to_string()];
        h.extend((1..=zones).map(|i| format!("Z{i}")));
        h.push("Shortage".to_string());
        h
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(t, r)| {
                let mut c = vec![(t + 1).to_string()];
                c.extend(r.served.iter().zip(&r.demand).map(|(s, d)| format!("{s}/{d}")));
                c.push(r.shortage.to_string());
                c
            })
            .collect()
    }

    /// Header row plus one line per slot. No cell needs quoting.
    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push_str("\r\n");
        for row in self.cells() {
            out.push_str(&row.join(","));
            out.push_str("\r\n");
        }
        out
    }

    pub fn to_text(&self) -> String {
        let header = self.header();
        let body = self.cells();
        let widths: Vec<usize> = (0..header.len())
            .map(|k| body.iter().map(|r| r[k].len()).chain([header[k].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            padded.join("  ") + "\n"
        };
        let mut out = String::from("Number of vehicles in zones (served/demand)\n");
        out.push_str(&line(&header));
        for row in &body {
            out.push_str(&line(row));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tiny1;

    fn tiny1_transfer_plan() -> TransferPlan {
        let inst = tiny1();
        let mut plan = TransferPlan::zeros(&inst);
        plan.stock = vec![vec![1], vec![1]];
        plan.serve[0][0][0] = 1;
        plan.serve[1][1][0] = 1;
        plan
    }

    #[test]
    fn tiny1_transfer_report() {
        let table = report_model2(&tiny1(), &tiny1_transfer_plan()).unwrap();
        assert_eq!(table.rows, vec![ReportRow { demand: vec![1, 1], served: vec![1, 1], shortage: 0 }]);
        assert_eq!(table.to_csv(), "Slot,Z1,Z2,Shortage\r\n1,1/1,1/1,0\r\n");
        assert_eq!(
            table.to_text(),
            "Number of vehicles in zones (served/demand)\nSlot   Z1   Z2  Shortage\n   1  1/1  1/1         0\n"
        );
    }

    #[test]
    fn allocation_served_is_capped_at_demand() {
        let inst = tiny1();
        let mut plan = AllocationPlan::zeros(&inst);
        plan.alloc = vec![vec![1], vec![1]];
        plan.dispatch = vec![vec![1], vec![1]];
        // zone 0 is reached by two dispatches but only demands one
        let table = report_model1(&inst, &plan).unwrap();
        assert_eq!(table.rows[0].served, vec![1, 1]);
        assert_eq!(table.rows[0].shortage, 0);
    }

    #[test]
    fn shortage_comes_from_the_evaluator() {
        let inst = tiny1();
        let mut plan = tiny1_transfer_plan();
        plan.serve[1][1][0] = 0;
        plan.shortage[1][0] = 1;
        let table = report_model2(&inst, &plan).unwrap();
        assert_eq!(table.rows[0].shortage, 1);
        assert_eq!(table.rows[0].served, vec![1, 0]);
    }

    #[test]
    fn zero_plans_give_zero_rows() {
        let inst = crate::testutil::zero_demand();
        let table = report_model1(&inst, &AllocationPlan::zeros(&inst)).unwrap();
        assert_eq!(table.to_csv(), "Slot,Z1,Z2,Shortage\r\n1,0/0,0/0,0\r\n");
    }
}

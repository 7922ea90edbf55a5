//! Allocation model: per-slot allocation and dispatch with inventory.
//!
//! Rows, in emission order:
//!
//! 1. inventory balance `I[j][t-1] + x[j][t] - s[j][t] - I[j][t] = 0`, with
//!    no inventory before the first slot
//! 2. fleet `sum_j x[j][t] <= m`
//! 3. allocation coverage `sum_j a[j][i] x[j][t] >= d[i][t]` (no shortage
//!    relief, so uncovered demand makes the model infeasible)
//! 4. dispatch coverage `sum_j a[j][i] s[j][t] + l[t] >= d[i][t]`
//! 5. dispatch total `sum_j s[j][t] + l[t] = sum_i d[i][t]`
//! 6. `s[j][t] - x[j][t] <= 0`
//!
//! Station capacity is the upper bound of `x[j][t]`.

use std::time::Instant;

use crate::engine::{solve_milp, LinearProgram, MilpStatus, Relation, SolveOptions};
use crate::error::{Error, Result};
use crate::evaluate::evaluate_model1;
use crate::instance::{validate_instance, Instance};
use crate::outcome::{SolveOutcome, SolveStats, SolveStatus};
use crate::plan::AllocationPlan;

/// Column indices of each decision variable in the built program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model1Map {
    num_stations: usize,
    num_slots: usize,
    alloc: Vec<usize>,
    dispatch: Vec<usize>,
    inventory: Vec<usize>,
    shortage: Vec<usize>,
}

impl Model1Map {
    pub fn alloc(&self, j: usize, t: usize) -> usize {
        self.alloc[j * self.num_slots + t]
    }

    pub fn dispatch(&self, j: usize, t: usize) -> usize {
        self.dispatch[j * self.num_slots + t]
    }

    pub fn inventory(&self, j: usize, t: usize) -> usize {
        self.inventory[j * self.num_slots + t]
    }

    pub fn shortage(&self, t: usize) -> usize {
        self.shortage[t]
    }

    pub fn num_vars(&self) -> usize {
        self.alloc.len() + self.dispatch.len() + self.inventory.len() + self.shortage.len()
    }

    /// Reads a plan out of an integral solution vector.
    pub fn extract(&self, values: &[f64]) -> AllocationPlan {
        let get = |k: usize| values[k].round() as i64;
        let grid = |f: &dyn Fn(usize, usize) -> usize| {
            (0..self.num_stations)
                .map(|j| (0..self.num_slots).map(|t| get(f(j, t))).collect())
                .collect()
        };
        AllocationPlan {
            alloc: grid(&|j, t| self.alloc(j, t)),
            dispatch: grid(&|j, t| self.dispatch(j, t)),
            inventory: grid(&|j, t| self.inventory(j, t)),
            shortage: (0..self.num_slots).map(|t| get(self.shortage(t))).collect(),
        }
    }
}

pub(crate) fn require_valid(inst: &Instance) -> Result<()> {
    let violations = validate_instance(inst);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(violations))
    }
}

pub fn build_model1(inst: &Instance) -> Result<(LinearProgram, Model1Map)> {
    require_valid(inst)?;
    let (nj, ni, nt) = (inst.num_stations, inst.num_zones, inst.num_slots);
    let mut lp = LinearProgram::new();

    let add_grid = |lp: &mut LinearProgram, upper: &dyn Fn(usize, usize) -> f64, cost: &dyn Fn(usize, usize) -> f64| {
        let mut idx = Vec::with_capacity(nj * nt);
        for j in 0..nj {
            for t in 0..nt {
                idx.push(lp.add_var(0.0, upper(j, t), cost(j, t), true));
            }
        }
        idx
    };
    let alloc = add_grid(&mut lp, &|j, t| inst.capacity[j][t] as f64, &|j, t| inst.hold_cost[j][t] as f64);
    let dispatch = add_grid(&mut lp, &|_, _| f64::INFINITY, &|j, t| inst.dispatch_cost[j][t] as f64);
    let inventory = add_grid(&mut lp, &|_, _| f64::INFINITY, &|_, _| 0.0);
    let shortage = (0..nt)
        .map(|_| lp.add_var(0.0, f64::INFINITY, inst.big_m as f64, true))
        .collect();
    let map = Model1Map { num_stations: nj, num_slots: nt, alloc, dispatch, inventory, shortage };

    for j in 0..nj {
        for t in 0..nt {
            let mut row = vec![(map.alloc(j, t), 1.0), (map.dispatch(j, t), -1.0), (map.inventory(j, t), -1.0)];
            if t > 0 {
                row.push((map.inventory(j, t - 1), 1.0));
            }
            lp.add_constraint(row, Relation::Eq, 0.0);
        }
    }
    for t in 0..nt {
        let row = (0..nj).map(|j| (map.alloc(j, t), 1.0)).collect();
        lp.add_constraint(row, Relation::Le, inst.fleet_size as f64);
    }
    for i in 0..ni {
        for t in 0..nt {
            let row = (0..nj).filter(|&j| inst.covers(j, i)).map(|j| (map.alloc(j, t), 1.0)).collect();
            lp.add_constraint(row, Relation::Ge, inst.demand[i][t] as f64);
        }
    }
    for i in 0..ni {
        for t in 0..nt {
            let mut row: Vec<_> = (0..nj).filter(|&j| inst.covers(j, i)).map(|j| (map.dispatch(j, t), 1.0)).collect();
            row.push((map.shortage(t), 1.0));
            lp.add_constraint(row, Relation::Ge, inst.demand[i][t] as f64);
        }
    }
    for t in 0..nt {
        let mut row: Vec<_> = (0..nj).map(|j| (map.dispatch(j, t), 1.0)).collect();
        row.push((map.shortage(t), 1.0));
        lp.add_constraint(row, Relation::Eq, inst.slot_demand(t) as f64);
    }
    for j in 0..nj {
        for t in 0..nt {
            lp.add_constraint(vec![(map.dispatch(j, t), 1.0), (map.alloc(j, t), -1.0)], Relation::Le, 0.0);
        }
    }

    Ok((lp, map))
}

pub fn solve_model1(inst: &Instance, opts: &SolveOptions) -> Result<SolveOutcome<AllocationPlan>> {
    let started = Instant::now();
    let (lp, map) = build_model1(inst)?;
    let sol = solve_milp(&lp, opts)?;
    let status = match sol.status {
        MilpStatus::Optimal => SolveStatus::Optimal,
        MilpStatus::Infeasible => SolveStatus::Infeasible,
        MilpStatus::NodeLimitReached => SolveStatus::NodeLimitReached,
        MilpStatus::Unbounded => {
            return Err(Error::Numerical("allocation model relaxation reported unbounded".into()))
        }
    };
    let (objective, plan) = match (&sol.values, sol.objective) {
        (Some(values), Some(engine_obj)) => {
            let plan = map.extract(values);
            let eval = evaluate_model1(inst, &plan)?;
            if !eval.violations.is_empty() || (eval.objective as f64 - engine_obj).abs() > 0.5 {
                return Err(Error::Numerical(format!(
                    "solver plan fails evaluation (objective {engine_obj} vs {}, {} violations)",
                    eval.objective,
                    eval.violations.len()
                )));
            }
            (Some(eval.objective), Some(plan))
        }
        _ => (None, None),
    };
    Ok(SolveOutcome {
        status,
        objective,
        plan,
        stats: SolveStats {
            nodes: sol.nodes,
            lp_iterations: sol.lp_iterations,
            best_bound: sol.best_bound.is_finite().then_some(sol.best_bound),
            root_objective: sol.root_objective,
            elapsed: started.elapsed(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{solve_lp, LpStatus};
    use crate::testutil::{tiny1, uncovered, zero_demand};

    #[test]
    fn tiny1_program_shape() {
        let (lp, map) = build_model1(&tiny1()).unwrap();
        assert_eq!(lp.num_vars(), 7);
        assert_eq!(map.num_vars(), 7);
        // balance 2, fleet 1, alloc cover 2, dispatch cover 2, total 1, s <= x 2
        assert_eq!(lp.num_constraints(), 10);
        assert_eq!(lp.upper[map.alloc(0, 0)], 2.0);
        assert!(lp.integer.iter().all(|&b| b));
    }

    #[test]
    fn tiny1_optimum() {
        let out = solve_model1(&tiny1(), &SolveOptions::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert_eq!(out.objective, Some(5));
        let plan = out.plan.unwrap();
        assert_eq!(plan.alloc, vec![vec![1], vec![1]]);
        assert_eq!(plan.dispatch, vec![vec![1], vec![1]]);
        assert_eq!(plan.shortage, vec![0]);
    }

    #[test]
    fn tiny1_relaxation_bounds_the_optimum() {
        let (lp, _) = build_model1(&tiny1()).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective <= 5.0 + 1e-9);
    }

    #[test]
    fn zero_demand_is_free() {
        let inst = zero_demand();
        let (lp, _) = build_model1(&inst).unwrap();
        assert!(lp.constraints.iter().all(|r| r.rhs == 0.0 || r.relation == Relation::Le));
        let out = solve_model1(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(out.objective, Some(0));
        assert_eq!(out.plan.unwrap(), AllocationPlan::zeros(&inst));
    }

    #[test]
    fn uncovered_demand_is_infeasible() {
        let inst = uncovered(1);
        let (lp, map) = build_model1(&inst).unwrap();
        let cover_row = &lp.constraints[map.num_stations * map.num_slots + 1 + 1];
        assert!(cover_row.coeffs.is_empty());
        assert_eq!(cover_row.rhs, 1.0);
        let out = solve_model1(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
        assert!(out.plan.is_none());
    }

    #[test]
    fn invalid_instances_are_refused() {
        let mut inst = tiny1();
        inst.big_m = 2;
        assert!(matches!(build_model1(&inst), Err(Error::InvalidInstance(_))));
    }
}

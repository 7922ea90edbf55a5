//! Exhaustive reference optimizers for tiny instances.
//!
//! The allocation model decomposes exactly by slot: inventory is fixed by
//! allocations and dispatches and has no other constraint, so each slot's
//! `(x, s)` pairs are enumerated on their own. The transfer model enumerates
//! every stock trajectory; per-slot dispatch options and per-boundary transfer
//! options depend only on the stock vectors involved and are tabulated once.
//!
//! Ties are broken by the lexicographically smallest plan: `(x, s, l)` for the
//! allocation model and `(S, x+, x-, y, l)` for the transfer model, each
//! flattened station-major then slot.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::evaluate::{evaluate_model1, evaluate_model2};
use crate::instance::Instance;
use crate::model1::require_valid;
use crate::outcome::{SolveOutcome, SolveStats, SolveStatus};
use crate::plan::{AllocationPlan, TransferPlan};

/// Largest number of points either oracle will evaluate.
pub const SPACE_LIMIT: u128 = 10_000_000;

fn check_space(space: u128) -> Result<()> {
    if space > SPACE_LIMIT {
        Err(Error::SearchSpaceTooLarge { space, limit: SPACE_LIMIT })
    } else {
        Ok(())
    }
}

/// Calls `f` with every vector `v` where `0 <= v[k] <= hi[k]`, in lexicographic order.
fn for_each_box(hi: &[i64], mut f: impl FnMut(&[i64])) {
    let mut v = vec![0i64; hi.len()];
    loop {
        f(&v);
        let mut k = hi.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if v[k] < hi[k] {
                v[k] += 1;
                break;
            }
            v[k] = 0;
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, r| acc * (n - r) / (r + 1))
}

fn mul_sat(a: u128, b: u128) -> u128 {
    a.saturating_mul(b)
}

/// Upper bound on the points the allocation oracle evaluates.
pub fn space_model1(inst: &Instance) -> Result<u128> {
    require_valid(inst)?;
    let m = inst.fleet_size.max(0) as u128;
    let mut total = 0u128;
    for t in 0..inst.num_slots {
        let per_slot = (0..inst.num_stations).fold(1u128, |acc, j| {
            let k = (inst.capacity[j][t] as u128).min(m);
            mul_sat(acc, (k + 1) * (k + 2) / 2)
        });
        total = total.saturating_add(per_slot);
    }
    Ok(total)
}

/// Upper bound on the points the transfer oracle evaluates.
pub fn space_model2(inst: &Instance) -> Result<u128> {
    require_valid(inst)?;
    let m = inst.fleet_size.max(0) as u128;
    let (nj, ni, nt) = (inst.num_stations, inst.num_zones, inst.num_slots);
    let k = |j: usize, t: usize| (inst.capacity[j][t] as u128).min(m);
    let mut total = 1u128;
    for j in 0..nj {
        for t in 0..nt {
            total = mul_sat(total, k(j, t) + 1);
        }
    }
    for t in 0..nt {
        let per_slot = (0..nj).fold(1u128, |acc, j| {
            let cov = (0..ni).filter(|&i| inst.covers(j, i)).count() as u128;
            mul_sat(acc, mul_sat(k(j, t) + 1, binomial(cov + k(j, t), cov)))
        });
        total = total.saturating_add(per_slot);
    }
    for t in 1..nt {
        let per_boundary = (0..nj).fold(1u128, |acc, j| {
            mul_sat(acc, mul_sat((k(j, t - 1) + 1) * (k(j, t - 1) + 1), k(j, t) + 1))
        });
        total = total.saturating_add(per_boundary);
    }
    Ok(total)
}

fn outcome<P>(
    status: SolveStatus,
    objective: Option<i64>,
    plan: Option<P>,
    points: u64,
    started: Instant,
) -> SolveOutcome<P> {
    SolveOutcome {
        status,
        objective,
        plan,
        stats: SolveStats { nodes: points, elapsed: started.elapsed(), ..SolveStats::default() },
    }
}

#[derive(Debug, Clone)]
struct SlotChoice1 {
    cost: i128,
    key: Vec<i64>,
}

/// Per slot: the cheapest feasible `(x, s, l)` and the least shortage of any
/// feasible point. `None` when the slot has no feasible point.
struct Slot1 {
    best: Option<SlotChoice1>,
    min_shortage: Option<i64>,
}

fn enumerate_model1(inst: &Instance) -> Result<(Vec<Slot1>, u64)> {
    check_space(space_model1(inst)?)?;
    let nj = inst.num_stations;
    let mut points = 0u64;
    let mut slots = Vec::with_capacity(inst.num_slots);
    for t in 0..inst.num_slots {
        let total_demand = inst.slot_demand(t) as i128;
        let hi: Vec<i64> = (0..nj).map(|j| inst.capacity[j][t].min(inst.fleet_size)).collect();
        let mut slot = Slot1 { best: None, min_shortage: None };
        for_each_box(&hi, |x| {
            for_each_box(x, |s| {
                points += 1;
                let dispatched: i128 = s.iter().map(|&v| v as i128).sum();
                let l = total_demand - dispatched;
                if l < 0 || x.iter().sum::<i64>() > inst.fleet_size {
                    return;
                }
                let covered = (0..inst.num_zones).all(|i| {
                    let d = inst.demand[i][t] as i128;
                    let ax: i128 = (0..nj).filter(|&j| inst.covers(j, i)).map(|j| x[j] as i128).sum();
                    let as_: i128 = (0..nj).filter(|&j| inst.covers(j, i)).map(|j| s[j] as i128).sum();
                    ax >= d && as_ + l >= d
                });
                if !covered {
                    return;
                }
                let l = l as i64;
                slot.min_shortage = Some(slot.min_shortage.map_or(l, |m| m.min(l)));
                let cost: i128 = (0..nj)
                    .map(|j| {
                        inst.hold_cost[j][t] as i128 * x[j] as i128
                            + inst.dispatch_cost[j][t] as i128 * s[j] as i128
                    })
                    .sum::<i128>()
                    + inst.big_m as i128 * l as i128;
                let better = match &slot.best {
                    None => true,
                    Some(b) => cost < b.cost || (cost == b.cost && lex_less_xs(x, s, l, &b.key)),
                };
                if better {
                    let mut key = x.to_vec();
                    key.extend_from_slice(s);
                    key.push(l);
                    slot.best = Some(SlotChoice1 { cost, key });
                }
            });
        });
        slots.push(slot);
    }
    Ok((slots, points))
}

fn lex_less_xs(x: &[i64], s: &[i64], l: i64, key: &[i64]) -> bool {
    x.iter().chain(s).chain(std::iter::once(&l)).cmp(key.iter()) == std::cmp::Ordering::Less
}

pub fn brute_force_model1(inst: &Instance) -> Result<SolveOutcome<AllocationPlan>> {
    let started = Instant::now();
    let (slots, points) = enumerate_model1(inst)?;
    if slots.iter().any(|s| s.best.is_none()) {
        return Ok(outcome(SolveStatus::Infeasible, None, None, points, started));
    }
    let nj = inst.num_stations;
    let mut plan = AllocationPlan::zeros(inst);
    for (t, slot) in slots.iter().enumerate() {
        let key = &slot.best.as_ref().expect("checked above").key;
        for j in 0..nj {
            plan.alloc[j][t] = key[j];
            plan.dispatch[j][t] = key[nj + j];
            let carried = if t == 0 { 0 } else { plan.inventory[j][t - 1] };
            plan.inventory[j][t] = carried + key[j] - key[nj + j];
        }
        plan.shortage[t] = key[2 * nj];
    }
    let eval = evaluate_model1(inst, &plan)?;
    debug_assert!(eval.violations.is_empty());
    debug_assert_eq!(
        eval.objective as i128,
        slots.iter().map(|s| s.best.as_ref().expect("checked above").cost).sum::<i128>()
    );
    Ok(outcome(SolveStatus::Optimal, Some(eval.objective), Some(plan), points, started))
}

/// Least total shortage over all feasible allocation plans, or `None` when
/// the allocation model is infeasible.
pub fn min_shortage_model1(inst: &Instance) -> Result<Option<i64>> {
    let (slots, _) = enumerate_model1(inst)?;
    Ok(slots.iter().map(|s| s.min_shortage).sum())
}

/// Cheapest dispatch of one slot from a fixed stock vector.
#[derive(Debug, Clone)]
struct Dispatch {
    cost: i128,
    shortage: i64,
    /// `y` over covered `(j, i)` pairs, station-major.
    serve: Vec<i64>,
    /// Least shortage over all feasible dispatches from this stock.
    min_shortage: i64,
}

/// Cheapest transfer at one boundary between fixed stock vectors.
#[derive(Debug, Clone)]
struct Transfer {
    cost: i128,
    key: Vec<i64>,
}

struct Model2Search<'a> {
    inst: &'a Instance,
    pairs: Vec<(usize, usize)>,
    points: u64,
}

impl Model2Search<'_> {
    fn dispatch(&mut self, t: usize, stock: &[i64]) -> Dispatch {
        let inst = self.inst;
        let ni = inst.num_zones;
        // y[j][*] over the zones j covers, with per-station totals capped by stock
        // and per-zone totals capped by demand.
        let hi: Vec<i64> = self.pairs.iter().map(|&(j, i)| stock[j].min(inst.demand[i][t])).collect();
        let mut best: Option<Dispatch> = None;
        let mut min_shortage = i64::MAX;
        let pairs = &self.pairs;
        let points = &mut self.points;
        for_each_box(&hi, |y| {
            *points += 1;
            let mut used = vec![0i64; inst.num_stations];
            let mut served = vec![0i64; ni];
            for (k, &(j, i)) in pairs.iter().enumerate() {
                used[j] += y[k];
                served[i] += y[k];
            }
            if (0..inst.num_stations).any(|j| used[j] > stock[j]) || (0..ni).any(|i| served[i] > inst.demand[i][t]) {
                return;
            }
            let shortage: i64 = (0..ni).map(|i| inst.demand[i][t] - served[i]).sum();
            min_shortage = min_shortage.min(shortage);
            let cost = pairs
                .iter()
                .enumerate()
                .map(|(k, &(j, _))| inst.dispatch_cost[j][t] as i128 * y[k] as i128)
                .sum::<i128>()
                + inst.big_m as i128 * shortage as i128;
            // With y fixed the shortage is fixed, so the y key decides ties.
            let better = match &best {
                None => true,
                Some(b) => cost < b.cost || (cost == b.cost && y < b.serve.as_slice()),
            };
            if better {
                best = Some(Dispatch { cost, shortage, serve: y.to_vec(), min_shortage: 0 });
            }
        });
        let mut best = best.expect("the all-zero dispatch is always feasible");
        best.min_shortage = min_shortage;
        best
    }

    fn transfer(&mut self, before: &[i64], after: &[i64]) -> Option<Transfer> {
        let nj = before.len();
        if before.iter().sum::<i64>() != after.iter().sum::<i64>() {
            return None;
        }
        // x- ranges over [max(0, -delta), before]; x+ = delta + x-.
        let lo: Vec<i64> = (0..nj).map(|j| (before[j] - after[j]).max(0)).collect();
        let span: Vec<i64> = (0..nj).map(|j| before[j] - lo[j]).collect();
        let mut best: Option<Transfer> = None;
        let tau = self.inst.transfer_cost as i128;
        let points = &mut self.points;
        for_each_box(&span, |extra| {
            *points += 1;
            let out: Vec<i64> = (0..nj).map(|j| lo[j] + extra[j]).collect();
            let inn: Vec<i64> = (0..nj).map(|j| after[j] - before[j] + out[j]).collect();
            if inn.iter().sum::<i64>() != out.iter().sum::<i64>() {
                return;
            }
            let cost = tau * inn.iter().map(|&v| v as i128).sum::<i128>();
            let mut key = inn;
            key.extend(out);
            let better = match &best {
                None => true,
                Some(b) => cost < b.cost || (cost == b.cost && key < b.key),
            };
            if better {
                best = Some(Transfer { cost, key });
            }
        });
        best
    }
}

struct Model2Result {
    best: Option<(i128, Vec<Vec<i64>>)>,
    min_shortage: Option<i64>,
    dispatch: Vec<HashMap<Vec<i64>, Dispatch>>,
    transfer: Vec<HashMap<(Vec<i64>, Vec<i64>), Option<Transfer>>>,
    pairs: Vec<(usize, usize)>,
    points: u64,
}

fn enumerate_model2(inst: &Instance) -> Result<Model2Result> {
    check_space(space_model2(inst)?)?;
    let (nj, ni, nt) = (inst.num_stations, inst.num_zones, inst.num_slots);
    let pairs: Vec<(usize, usize)> =
        (0..nj).flat_map(|j| (0..ni).map(move |i| (j, i))).filter(|&(j, i)| inst.covers(j, i)).collect();
    let mut search = Model2Search { inst, pairs: pairs.clone(), points: 0 };

    let hi: Vec<Vec<i64>> =
        (0..nt).map(|t| (0..nj).map(|j| inst.capacity[j][t].min(inst.fleet_size)).collect()).collect();
    let mut states: Vec<Vec<Vec<i64>>> = Vec::with_capacity(nt);
    let mut dispatch: Vec<HashMap<Vec<i64>, Dispatch>> = Vec::with_capacity(nt);
    for t in 0..nt {
        let mut list = Vec::new();
        let mut table = HashMap::new();
        for_each_box(&hi[t], |s| list.push(s.to_vec()));
        for s in &list {
            let d = search.dispatch(t, s);
            table.insert(s.clone(), d);
        }
        states.push(list);
        dispatch.push(table);
    }
    let mut transfer: Vec<HashMap<(Vec<i64>, Vec<i64>), Option<Transfer>>> = vec![HashMap::new(); nt];
    for t in 1..nt {
        for a in &states[t - 1] {
            for b in &states[t] {
                let tr = search.transfer(a, b);
                transfer[t].insert((a.clone(), b.clone()), tr);
            }
        }
    }

    // Trajectories in lexicographic order of (S[0], S[1], ...). The tie-break
    // key flattens station-major, so it is compared explicitly below.
    let mut best: Option<(i128, Vec<i64>, Vec<Vec<i64>>)> = None;
    let mut min_shortage: Option<i64> = None;
    let mut path: Vec<usize> = vec![0; nt];
    let flat_key = |traj: &[Vec<i64>]| -> Vec<i64> { (0..nj).flat_map(|j| traj.iter().map(move |s| s[j])).collect() };
    'outer: loop {
        search.points += 1;
        let traj: Vec<Vec<i64>> = (0..nt).map(|t| states[t][path[t]].clone()).collect();
        let mut feasible = traj[0].iter().sum::<i64>() <= inst.fleet_size;
        let mut cost = 0i128;
        let mut shortage = 0i64;
        if feasible {
            for t in 0..nt {
                let s = &traj[t];
                cost += (0..nj).map(|j| inst.hold_cost[j][t] as i128 * s[j] as i128).sum::<i128>();
                let d = &dispatch[t][s];
                cost += d.cost;
                shortage += d.min_shortage;
                if t > 0 {
                    match &transfer[t][&(traj[t - 1].clone(), s.clone())] {
                        Some(tr) => cost += tr.cost,
                        None => {
                            feasible = false;
                            break;
                        }
                    }
                }
            }
        }
        if feasible {
            min_shortage = Some(min_shortage.map_or(shortage, |m| m.min(shortage)));
            let better = match &best {
                None => true,
                Some((c, k, _)) => cost < *c || (cost == *c && flat_key(&traj) < *k),
            };
            if better {
                best = Some((cost, flat_key(&traj), traj));
            }
        }
        let mut t = nt;
        loop {
            if t == 0 {
                break 'outer;
            }
            t -= 1;
            if path[t] + 1 < states[t].len() {
                path[t] += 1;
                break;
            }
            path[t] = 0;
        }
    }

    Ok(Model2Result {
        best: best.map(|(c, _, traj)| (c, traj)),
        min_shortage,
        dispatch,
        transfer,
        pairs,
        points: search.points,
    })
}

pub fn brute_force_model2(inst: &Instance) -> Result<SolveOutcome<TransferPlan>> {
    let started = Instant::now();
    let found = enumerate_model2(inst)?;
    let Some((cost, traj)) = &found.best else {
        return Ok(outcome(SolveStatus::Infeasible, None, None, found.points, started));
    };
    let (nj, nt) = (inst.num_stations, inst.num_slots);
    let mut plan = TransferPlan::zeros(inst);
    for t in 0..nt {
        for j in 0..nj {
            plan.stock[j][t] = traj[t][j];
        }
        let d = &found.dispatch[t][&traj[t]];
        for (k, &(j, i)) in found.pairs.iter().enumerate() {
            plan.serve[j][i][t] = d.serve[k];
        }
        for i in 0..inst.num_zones {
            plan.shortage[i][t] = inst.demand[i][t] - (0..nj).map(|j| plan.serve[j][i][t]).sum::<i64>();
        }
        debug_assert_eq!(d.shortage, (0..inst.num_zones).map(|i| plan.shortage[i][t]).sum::<i64>());
        if t > 0 {
            let tr = found.transfer[t][&(traj[t - 1].clone(), traj[t].clone())].as_ref().expect("feasible path");
            for j in 0..nj {
                plan.transfer_in[j][t] = tr.key[j];
                plan.transfer_out[j][t] = tr.key[nj + j];
            }
        }
    }
    let eval = evaluate_model2(inst, &plan)?;
    debug_assert!(eval.violations.is_empty());
    debug_assert_eq!(eval.objective as i128, *cost);
    Ok(outcome(SolveStatus::Optimal, Some(eval.objective), Some(plan), found.points, started))
}

/// Least total shortage over all feasible transfer plans.
pub fn min_shortage_model2(inst: &Instance) -> Result<Option<i64>> {
    Ok(enumerate_model2(inst)?.min_shortage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{repeated, tiny1, uncovered, zero_demand};

    #[test]
    fn tiny1_both_models() {
        let o1 = brute_force_model1(&tiny1()).unwrap();
        assert_eq!(o1.objective, Some(5));
        let p1 = o1.plan.unwrap();
        assert_eq!(p1.alloc, vec![vec![1], vec![1]]);
        assert_eq!(p1.dispatch, vec![vec![1], vec![1]]);
        let o2 = brute_force_model2(&tiny1()).unwrap();
        assert_eq!(o2.objective, Some(5));
        let p2 = o2.plan.unwrap();
        assert_eq!(p2.stock, vec![vec![1], vec![1]]);
        assert_eq!(p2.serve[0][0][0], 1);
        assert_eq!(p2.serve[1][1][0], 1);
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let inst = zero_demand();
        let o1 = brute_force_model1(&inst).unwrap();
        assert_eq!(o1.objective, Some(0));
        assert_eq!(o1.plan.unwrap(), AllocationPlan::zeros(&inst));
        let o2 = brute_force_model2(&inst).unwrap();
        assert_eq!(o2.objective, Some(0));
        assert_eq!(o2.plan.unwrap(), TransferPlan::zeros(&inst));
    }

    #[test]
    fn uncovered_zone() {
        let inst = uncovered(1);
        assert_eq!(brute_force_model1(&inst).unwrap().status, SolveStatus::Infeasible);
        assert_eq!(min_shortage_model1(&inst).unwrap(), None);
        let o2 = brute_force_model2(&inst).unwrap();
        assert_eq!(o2.objective, Some(2 + 1000));
        assert_eq!(o2.plan.unwrap().total_shortage(), 1);
        assert_eq!(min_shortage_model2(&inst).unwrap(), Some(1));
    }

    #[test]
    fn transfers_are_priced() {
        // Demand moves from zone 0 (both stations) to zone 1 (station 1 only),
        // and capacity forces stock to start at station 0.
        let mut inst = repeated(&tiny1(), 2);
        inst.fleet_size = 1;
        inst.transfer_cost = 3;
        inst.demand = vec![vec![1, 0], vec![0, 1]];
        inst.capacity = vec![vec![1, 1], vec![0, 1]];
        inst.big_m = 1000;
        let o = brute_force_model2(&inst).unwrap();
        // hold 1 + 1, dispatch 1 + 2, one transfer at 3
        assert_eq!(o.objective, Some(8));
        let p = o.plan.unwrap();
        assert_eq!(p.transfer_in[1][1], 1);
        assert_eq!(p.transfer_out[0][1], 1);
    }

    #[test]
    fn ties_pick_the_smallest_plan() {
        let mut inst = tiny1();
        inst.coverage = vec![vec![1, 1], vec![1, 1]];
        inst.dispatch_cost = vec![vec![1], vec![1]];
        inst.demand = vec![vec![1], vec![0]];
        let p1 = brute_force_model1(&inst).unwrap().plan.unwrap();
        assert_eq!(p1.alloc, vec![vec![0], vec![1]]);
        let p2 = brute_force_model2(&inst).unwrap().plan.unwrap();
        assert_eq!(p2.stock, vec![vec![0], vec![1]]);
    }

    #[test]
    fn refuses_large_spaces() {
        let mut inst = zero_demand();
        inst.num_stations = 8;
        inst.coverage = vec![vec![1, 1]; 8];
        inst.capacity = vec![vec![3]; 8];
        inst.hold_cost = vec![vec![1]; 8];
        inst.dispatch_cost = vec![vec![1]; 8];
        inst.fleet_size = 3;
        // 10^8 allocation points in the single slot
        assert!(matches!(
            brute_force_model1(&inst),
            Err(Error::SearchSpaceTooLarge { space: 100_000_000, limit: SPACE_LIMIT })
        ));
        assert!(matches!(brute_force_model2(&inst), Err(Error::SearchSpaceTooLarge { .. })));
    }

    #[test]
    fn tiny_space_bounds_hold_for_tiny_generator() {
        for case in 0..200 {
            let inst = crate::instgen::tiny_instance(11, case);
            assert!(space_model1(&inst).unwrap() <= SPACE_LIMIT);
            assert!(space_model2(&inst).unwrap() <= SPACE_LIMIT);
        }
    }
}

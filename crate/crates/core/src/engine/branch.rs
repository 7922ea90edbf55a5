//! Best-bound branch-and-bound.
//!
//! Nodes are ordered by their parent's relaxation bound. After each branching
//! the search plunges into one child immediately so that incumbents appear
//! early; the sibling waits in the queue. Branching picks the most fractional
//! integer variable, ties going to the lowest index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Arc, Condvar, Mutex};

use super::simplex::{solve_prepared, Basis, Prepared};
use super::{
    solve_lp, LinearProgram, LpStatus, MilpSolution, MilpStatus, SolveOptions, INTEGRALITY_TOL,
};
use crate::error::Result;

struct Node {
    /// Bound tightenings relative to the root, applied in order.
    changes: Vec<(usize, f64, f64)>,
    bound: f64,
    depth: usize,
    seq: u64,
    basis: Option<Arc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: the "greatest" node is the lowest bound, then
    // the deepest, then the oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Context<'a> {
    lp: &'a LinearProgram,
    prepared: Prepared,
    integral_objective: bool,
}

impl Context<'_> {
    /// Lower bound usable for pruning. With integral costs every integral
    /// point has an integral objective, so the relaxation value rounds up.
    fn prune_bound(&self, relaxation: f64) -> f64 {
        if self.integral_objective {
            let tol = 1e-6 + 1e-9 * relaxation.abs();
            (relaxation - tol).ceil()
        } else {
            relaxation
        }
    }

    fn dominated(&self, bound: f64, incumbent: Option<f64>) -> bool {
        match incumbent {
            None => false,
            Some(best) if self.integral_objective => bound >= best,
            Some(best) => bound >= best - 1e-9 * (1.0 + best.abs()),
        }
    }

    fn bounds_for(&self, node: &Node) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.lp.lower.clone();
        let mut hi = self.lp.upper.clone();
        for &(k, l, u) in &node.changes {
            lo[k] = lo[k].max(l);
            hi[k] = hi[k].min(u);
        }
        (lo, hi)
    }

    fn evaluate(&self, node: &Node, incumbent: Option<f64>) -> Result<Evaluated> {
        let (lo, hi) = self.bounds_for(node);
        if (0..lo.len()).any(|k| lo[k] > hi[k]) {
            return Ok(Evaluated { iterations: 0, relaxation: None, outcome: Outcome::Infeasible });
        }
        let (sol, basis) = solve_prepared(&self.prepared, &lo, &hi, node.basis.as_deref())?;
        let iterations = sol.iterations;
        let outcome = match sol.status {
            LpStatus::Infeasible => Outcome::Infeasible,
            LpStatus::Unbounded => Outcome::Unbounded,
            LpStatus::Optimal => {
                let bound = self.prune_bound(sol.objective);
                if self.dominated(bound, incumbent) {
                    Outcome::Pruned
                } else {
                    match most_fractional(self.lp, &sol.values) {
                        None => {
                            let values = round_integers(self.lp, &sol.values);
                            Outcome::Integral { objective: self.lp.objective_value(&values), values }
                        }
                        Some((var, value)) => Outcome::Branch { bound, var, value, basis: Arc::new(basis) },
                    }
                }
            }
        };
        let relaxation = (sol.status == LpStatus::Optimal).then_some(sol.objective);
        Ok(Evaluated { iterations, relaxation, outcome })
    }
}

struct Evaluated {
    iterations: u64,
    relaxation: Option<f64>,
    outcome: Outcome,
}

enum Outcome {
    Infeasible,
    Unbounded,
    Pruned,
    Integral { objective: f64, values: Vec<f64> },
    Branch { bound: f64, var: usize, value: f64, basis: Arc<Basis> },
}

fn most_fractional(lp: &LinearProgram, values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (k, &v) in values.iter().enumerate() {
        if !lp.integer[k] {
            continue;
        }
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist <= INTEGRALITY_TOL {
            continue;
        }
        if best.map_or(true, |(_, _, d)| dist > d) {
            best = Some((k, v, dist));
        }
    }
    best.map(|(k, v, _)| (k, v))
}

fn round_integers(lp: &LinearProgram, values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(k, &v)| if lp.integer[k] { v.round() } else { v })
        .collect()
}

/// Children of `parent` branching on `var` at fractional `value`; the first
/// returned child is the one to plunge into.
fn children(parent: &Node, bound: f64, var: usize, value: f64, basis: Arc<Basis>, seq: &mut u64) -> [Node; 2] {
    let mut make = |lo: f64, hi: f64| {
        let mut changes = parent.changes.clone();
        changes.push((var, lo, hi));
        *seq += 1;
        Node { changes, bound, depth: parent.depth + 1, seq: *seq, basis: Some(basis.clone()) }
    };
    let down = make(f64::NEG_INFINITY, value.floor());
    let up = make(value.ceil(), f64::INFINITY);
    if value - value.floor() >= 0.5 {
        [up, down]
    } else {
        [down, up]
    }
}

struct Search {
    heap: BinaryHeap<Node>,
    incumbent: Option<(f64, Vec<f64>)>,
    nodes: u64,
    iterations: u64,
    seq: u64,
    root_objective: Option<f64>,
    unbounded: bool,
    limit_hit: bool,
}

impl Search {
    fn new() -> Self {
        Search {
            heap: BinaryHeap::new(),
            incumbent: None,
            nodes: 0,
            iterations: 0,
            seq: 0,
            root_objective: None,
            unbounded: false,
            limit_hit: false,
        }
    }

    fn incumbent_value(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(v, _)| *v)
    }

    /// Folds one evaluated node into the search; returns the child to plunge
    /// into, if any.
    fn absorb(&mut self, node: &Node, ev: Evaluated) -> Option<Node> {
        self.iterations += ev.iterations;
        if node.depth == 0 {
            self.root_objective = ev.relaxation;
        }
        match ev.outcome {
            Outcome::Infeasible | Outcome::Pruned => None,
            Outcome::Unbounded => {
                self.unbounded = true;
                None
            }
            Outcome::Integral { objective, values } => {
                let better = match &self.incumbent {
                    None => true,
                    Some((best, best_values)) => {
                        objective < *best || (objective == *best && values < *best_values)
                    }
                };
                if better {
                    self.incumbent = Some((objective, values));
                }
                None
            }
            Outcome::Branch { bound, var, value, basis } => {
                let [first, second] = children(node, bound, var, value, basis, &mut self.seq);
                self.heap.push(second);
                Some(first)
            }
        }
    }

    fn finish(self) -> MilpSolution {
        let (status, best_bound) = if self.unbounded && self.incumbent.is_none() {
            (MilpStatus::Unbounded, f64::NEG_INFINITY)
        } else if self.limit_hit {
            let open = self.heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
            let bound = open.min(self.incumbent_value().unwrap_or(f64::INFINITY));
            (MilpStatus::NodeLimitReached, bound)
        } else if self.unbounded {
            (MilpStatus::Unbounded, f64::NEG_INFINITY)
        } else {
            match self.incumbent_value() {
                Some(v) => (MilpStatus::Optimal, v),
                None => (MilpStatus::Infeasible, f64::INFINITY),
            }
        };
        let (objective, values) = match self.incumbent {
            Some((v, x)) => (Some(v), Some(x)),
            None => (None, None),
        };
        MilpSolution {
            status,
            values,
            objective,
            nodes: self.nodes,
            best_bound,
            lp_iterations: self.iterations,
            root_objective: self.root_objective,
        }
    }
}

fn root() -> Node {
    Node { changes: Vec::new(), bound: f64::NEG_INFINITY, depth: 0, seq: 0, basis: None }
}

/// Solves `lp` to proven optimality over its integer-flagged variables.
///
/// Programs without integer variables are delegated to [`solve_lp`].
pub fn solve_milp(lp: &LinearProgram, opts: &SolveOptions) -> Result<MilpSolution> {
    if !lp.has_integers() {
        let sol = solve_lp(lp)?;
        let status = match sol.status {
            LpStatus::Optimal => MilpStatus::Optimal,
            LpStatus::Infeasible => MilpStatus::Infeasible,
            LpStatus::Unbounded => MilpStatus::Unbounded,
        };
        let optimal = status == MilpStatus::Optimal;
        return Ok(MilpSolution {
            status,
            best_bound: if optimal { sol.objective } else { f64::NEG_INFINITY },
            objective: optimal.then_some(sol.objective),
            root_objective: optimal.then_some(sol.objective),
            values: optimal.then_some(sol.values),
            nodes: 1,
            lp_iterations: sol.iterations,
        });
    }

    let ctx = Context {
        lp,
        prepared: Prepared::new(lp)?,
        integral_objective: lp.integral_objective(),
    };
    let workers = opts.workers.max(1);
    let search = if workers == 1 {
        sequential(&ctx, opts.node_limit)?
    } else if opts.deterministic {
        rounds(&ctx, opts.node_limit, workers)?
    } else {
        pool(&ctx, opts.node_limit, workers)?
    };
    Ok(search.finish())
}

fn over_limit(nodes: u64, limit: Option<u64>) -> bool {
    limit.is_some_and(|l| nodes >= l)
}

fn sequential(ctx: &Context, limit: Option<u64>) -> Result<Search> {
    let mut s = Search::new();
    let mut next = Some(root());
    loop {
        let Some(node) = next.take().or_else(|| s.heap.pop()) else { break };
        if ctx.dominated(node.bound, s.incumbent_value()) {
            continue;
        }
        if over_limit(s.nodes, limit) {
            s.heap.push(node);
            s.limit_hit = true;
            break;
        }
        s.nodes += 1;
        let ev = ctx.evaluate(&node, s.incumbent_value())?;
        next = s.absorb(&node, ev);
        if s.unbounded {
            break;
        }
    }
    Ok(s)
}

/// Synchronized rounds: the best `workers` open nodes are evaluated
/// concurrently against the same incumbent, then folded in queue order.
fn rounds(ctx: &Context, limit: Option<u64>, workers: usize) -> Result<Search> {
    let mut s = Search::new();
    s.heap.push(root());
    while !s.heap.is_empty() && !s.unbounded {
        let mut batch = Vec::with_capacity(workers);
        while batch.len() < workers {
            let Some(node) = s.heap.pop() else { break };
            if ctx.dominated(node.bound, s.incumbent_value()) {
                continue;
            }
            if over_limit(s.nodes + batch.len() as u64, limit) {
                s.heap.push(node);
                s.limit_hit = true;
                break;
            }
            batch.push(node);
        }
        if batch.is_empty() {
            break;
        }
        s.nodes += batch.len() as u64;
        let incumbent = s.incumbent_value();
        let results: Vec<Result<Evaluated>> = std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|node| scope.spawn(move || ctx.evaluate(node, incumbent)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("node worker panicked")).collect()
        });
        for (node, ev) in batch.iter().zip(results) {
            if let Some(child) = s.absorb(node, ev?) {
                s.heap.push(child);
            }
        }
        if s.limit_hit {
            break;
        }
    }
    Ok(s)
}

struct Shared {
    search: Search,
    active: usize,
    error: Option<crate::error::Error>,
}

/// Free-running worker pool sharing one queue and incumbent under a mutex.
fn pool(ctx: &Context, limit: Option<u64>, workers: usize) -> Result<Search> {
    let mut search = Search::new();
    search.heap.push(root());
    let shared = Mutex::new(Shared { search, active: 0, error: None });
    let wake = Condvar::new();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut plunge: Option<Node> = None;
                loop {
                    let (node, incumbent) = {
                        let mut g = shared.lock().expect("search state poisoned");
                        let node = loop {
                            if g.error.is_some() || g.search.unbounded || g.search.limit_hit {
                                break None;
                            }
                            let candidate = plunge.take().or_else(|| g.search.heap.pop());
                            match candidate {
                                Some(n) if ctx.dominated(n.bound, g.search.incumbent_value()) => continue,
                                Some(n) if over_limit(g.search.nodes, limit) => {
                                    g.search.heap.push(n);
                                    g.search.limit_hit = true;
                                    break None;
                                }
                                Some(n) => break Some(n),
                                None if g.active == 0 => break None,
                                None => g = wake.wait(g).expect("search state poisoned"),
                            }
                        };
                        let Some(node) = node else {
                            wake.notify_all();
                            return;
                        };
                        g.search.nodes += 1;
                        g.active += 1;
                        (node, g.search.incumbent_value())
                    };
                    let ev = ctx.evaluate(&node, incumbent);
                    let mut g = shared.lock().expect("search state poisoned");
                    g.active -= 1;
                    match ev {
                        Ok(ev) => plunge = g.search.absorb(&node, ev),
                        Err(e) => {
                            g.error.get_or_insert(e);
                        }
                    }
                    wake.notify_all();
                }
            });
        }
    });

    let shared = shared.into_inner().expect("search state poisoned");
    match shared.error {
        Some(e) => Err(e),
        None => Ok(shared.search),
    }
}

//! Bounded-variable revised primal simplex.
//!
//! Every row `r` gets a logical variable `w_r` with `a_r x - w_r = 0`; the row
//! relation and right-hand side become bounds on `w_r`. Phase one minimizes
//! the sum of bound violations of basic variables starting from any basis,
//! which is what lets branch-and-bound children warm start from their parent's
//! final basis after bounds tighten.

use super::factor::EtaFile;
use super::program::{LinearProgram, Relation};
use super::{LpSolution, LpStatus, FEASIBILITY_TOL, PIVOT_TOL};
use crate::error::{Error, Result};

const REFACTOR_EVERY: usize = 100;
const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Zero,
}

/// Basis snapshot for warm starts. `head[r]` is the variable basic in
/// position `r`; variables `n..n+m` are the row logicals.
#[derive(Debug, Clone)]
pub(crate) struct Basis {
    pub state: Vec<VarState>,
    pub head: Vec<usize>,
}

/// Column-compressed constraint matrix with logical bounds and costs; built
/// once per program and shared by every node solve.
#[derive(Debug)]
pub(crate) struct Prepared {
    pub m: usize,
    pub n: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    cost: Vec<f64>,
    /// Bounds of the logicals, `[lower, upper]` per row.
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    dual_tol: f64,
}

impl Prepared {
    pub fn new(lp: &LinearProgram) -> Result<Self> {
        lp.validate()?;
        let n = lp.num_vars();
        let m = lp.num_constraints();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut row_lower = Vec::with_capacity(m);
        let mut row_upper = Vec::with_capacity(m);
        for (r, row) in lp.constraints.iter().enumerate() {
            for &(k, a) in &row.coeffs {
                match cols[k].last_mut() {
                    Some((rr, v)) if *rr == r => *v += a,
                    _ => cols[k].push((r, a)),
                }
            }
            let (lo, hi) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, row.rhs),
                Relation::Ge => (row.rhs, f64::INFINITY),
                Relation::Eq => (row.rhs, row.rhs),
            };
            row_lower.push(lo);
            row_upper.push(hi);
        }
        let mut col_start = vec![0];
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        for col in cols {
            for (r, a) in col {
                if a != 0.0 {
                    row_idx.push(r);
                    vals.push(a);
                }
            }
            col_start.push(row_idx.len());
        }
        let mut cost = lp.objective.clone();
        cost.resize(n + m, 0.0);
        let scale = lp.objective.iter().fold(1.0f64, |s, c| s.max(c.abs()));
        Ok(Prepared {
            m,
            n,
            col_start,
            row_idx,
            vals,
            cost,
            row_lower,
            row_upper,
            dual_tol: OPTIMALITY_TOL * scale,
        })
    }

    /// Full bound vectors (structurals then logicals) for the given
    /// structural bounds.
    pub fn bounds(&self, lower: &[f64], upper: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut lb = lower.to_vec();
        lb.extend_from_slice(&self.row_lower);
        let mut ub = upper.to_vec();
        ub.extend_from_slice(&self.row_upper);
        (lb, ub)
    }

    fn column(&self, k: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        if k < self.n {
            for p in self.col_start[k]..self.col_start[k + 1] {
                out.push((self.row_idx[p], self.vals[p]));
            }
        } else {
            out.push((k - self.n, -1.0));
        }
    }

    /// `pi . a_k`
    fn dot(&self, k: usize, pi: &[f64]) -> f64 {
        if k < self.n {
            let mut s = 0.0;
            for p in self.col_start[k]..self.col_start[k + 1] {
                s += pi[self.row_idx[p]] * self.vals[p];
            }
            s
        } else {
            -pi[k - self.n]
        }
    }

    /// `w += scale * a_k`
    fn scatter(&self, k: usize, scale: f64, w: &mut [f64]) {
        if k < self.n {
            for p in self.col_start[k]..self.col_start[k + 1] {
                w[self.row_idx[p]] += scale * self.vals[p];
            }
        } else {
            w[k - self.n] -= scale;
        }
    }

    pub fn slack_basis(&self, lb: &[f64], ub: &[f64]) -> Basis {
        let mut state: Vec<VarState> = (0..self.n).map(|k| nonbasic_state(lb[k], ub[k])).collect();
        state.extend(std::iter::repeat(VarState::Basic).take(self.m));
        Basis { state, head: (self.n..self.n + self.m).collect() }
    }
}

fn nonbasic_state(lb: f64, ub: f64) -> VarState {
    if lb.is_finite() {
        VarState::AtLower
    } else if ub.is_finite() {
        VarState::AtUpper
    } else {
        VarState::Zero
    }
}

struct Solver<'a> {
    p: &'a Prepared,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    eta: EtaFile,
    iterations: u64,
}

enum Phase {
    One,
    Two,
}

impl<'a> Solver<'a> {
    fn new(p: &'a Prepared, lb: Vec<f64>, ub: Vec<f64>, basis: Basis) -> Self {
        let total = p.n + p.m;
        let mut s = Solver {
            p,
            lb,
            ub,
            x: vec![0.0; total],
            state: basis.state,
            head: basis.head,
            eta: EtaFile::default(),
            iterations: 0,
        };
        for k in 0..total {
            if s.state[k] != VarState::Basic {
                s.state[k] = s.fit_nonbasic(k, s.state[k]);
                s.x[k] = s.nonbasic_value(k);
            }
        }
        s
    }

    /// Keeps a nonbasic variable on a finite bound after its bounds changed.
    fn fit_nonbasic(&self, k: usize, st: VarState) -> VarState {
        let (lo, hi) = (self.lb[k], self.ub[k]);
        match st {
            VarState::AtLower if lo.is_finite() => VarState::AtLower,
            VarState::AtUpper if hi.is_finite() => VarState::AtUpper,
            _ => nonbasic_state(lo, hi),
        }
    }

    fn nonbasic_value(&self, k: usize) -> f64 {
        match self.state[k] {
            VarState::AtLower => self.lb[k],
            VarState::AtUpper => self.ub[k],
            _ => 0.0,
        }
    }

    fn refactor(&mut self) {
        let n = self.p.n;
        let m = self.p.m;
        let mut logical_rows = Vec::new();
        let mut structurals = Vec::new();
        for &k in &self.head {
            if k >= n {
                logical_rows.push(k - n);
            } else {
                structurals.push(k);
            }
        }
        let columns: Vec<Vec<(usize, f64)>> = structurals
            .iter()
            .map(|&k| {
                let mut c = Vec::new();
                self.p.column(k, &mut c);
                c
            })
            .collect();
        let inv = self.eta.reinvert(m, &logical_rows, &columns);

        let mut used = vec![false; m];
        let mut head = vec![usize::MAX; m];
        for &r in &logical_rows {
            used[r] = true;
            head[r] = n + r;
        }
        for (c, &k) in structurals.iter().enumerate() {
            match inv.row_of[c] {
                Some(r) => {
                    used[r] = true;
                    head[r] = k;
                }
                None => {
                    self.state[k] = nonbasic_state(self.lb[k], self.ub[k]);
                    self.x[k] = self.nonbasic_value(k);
                }
            }
        }
        for r in self.eta.fill_unassigned(m, &used) {
            head[r] = n + r;
            self.state[n + r] = VarState::Basic;
        }
        self.head = head;
        self.compute_primal();
    }

    fn compute_primal(&mut self) {
        let m = self.p.m;
        let mut w = vec![0.0; m];
        for k in 0..self.p.n + m {
            if self.state[k] != VarState::Basic && self.x[k] != 0.0 {
                self.p.scatter(k, -self.x[k], &mut w);
            }
        }
        self.eta.ftran(&mut w);
        for (r, &k) in self.head.iter().enumerate() {
            self.x[k] = w[r];
        }
    }

    fn infeasibility(&self, k: usize) -> f64 {
        let v = self.x[k];
        if v < self.lb[k] - FEASIBILITY_TOL {
            self.lb[k] - v
        } else if v > self.ub[k] + FEASIBILITY_TOL {
            v - self.ub[k]
        } else {
            0.0
        }
    }

    fn phase_objective(&self, phase: &Phase) -> f64 {
        match phase {
            Phase::One => self.head.iter().map(|&k| self.infeasibility(k)).sum(),
            Phase::Two => (0..self.p.n).map(|k| self.p.cost[k] * self.x[k]).sum(),
        }
    }

    fn run(&mut self) -> Result<LpStatus> {
        let n = self.p.n;
        let m = self.p.m;
        let total = n + m;
        let max_iter = 200 * total as u64 + 20_000;
        let stall_limit = 5 * total as u64;

        self.refactor();
        let mut fresh = true;
        let mut bland = false;
        let mut best_seen = f64::INFINITY;
        let mut last_phase_one = true;
        let mut stalled: u64 = 0;
        let mut pi = vec![0.0; m];
        let mut alpha = vec![0.0; m];

        loop {
            if self.eta.updates() >= REFACTOR_EVERY {
                self.refactor();
                fresh = true;
            }

            let phase = if self.head.iter().any(|&k| self.infeasibility(k) > 0.0) {
                Phase::One
            } else {
                Phase::Two
            };
            let phase_one = matches!(phase, Phase::One);
            if phase_one != last_phase_one {
                best_seen = f64::INFINITY;
                stalled = 0;
                bland = false;
                last_phase_one = phase_one;
            }
            let obj = self.phase_objective(&phase);
            if obj < best_seen - 1e-12 * (1.0 + best_seen.abs().min(1e300)) {
                best_seen = obj;
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled > stall_limit {
                    bland = true;
                }
            }

            // duals
            for (r, &k) in self.head.iter().enumerate() {
                pi[r] = match phase {
                    Phase::Two => self.p.cost[k],
                    Phase::One => {
                        let v = self.x[k];
                        if v < self.lb[k] - FEASIBILITY_TOL {
                            -1.0
                        } else if v > self.ub[k] + FEASIBILITY_TOL {
                            1.0
                        } else {
                            0.0
                        }
                    }
                };
            }
            self.eta.btran(&mut pi);

            let dual_tol = match phase {
                Phase::One => OPTIMALITY_TOL,
                Phase::Two => self.p.dual_tol,
            };
            let mut entering: Option<(usize, f64)> = None;
            let mut best_score = 0.0;
            for k in 0..total {
                let st = self.state[k];
                if st == VarState::Basic || self.lb[k] == self.ub[k] {
                    continue;
                }
                let c = match phase {
                    Phase::Two => self.p.cost[k],
                    Phase::One => 0.0,
                };
                let d = c - self.p.dot(k, &pi);
                let eligible = match st {
                    VarState::AtLower => d < -dual_tol,
                    VarState::AtUpper => d > dual_tol,
                    VarState::Zero => d.abs() > dual_tol,
                    VarState::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((k, d));
                    break;
                }
                if d.abs() > best_score {
                    best_score = d.abs();
                    entering = Some((k, d));
                }
            }

            let Some((q, d)) = entering else {
                if !fresh {
                    self.refactor();
                    fresh = true;
                    continue;
                }
                return Ok(match phase {
                    Phase::One => LpStatus::Infeasible,
                    Phase::Two => LpStatus::Optimal,
                });
            };

            self.iterations += 1;
            if self.iterations > max_iter {
                return Err(Error::Numerical(format!("no convergence after {max_iter} iterations")));
            }

            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            alpha.iter_mut().for_each(|a| *a = 0.0);
            self.p.scatter(q, 1.0, &mut alpha);
            self.eta.ftran(&mut alpha);

            let step = self.ratio_test(q, dir, &alpha, phase_one, bland);
            match step {
                Step::Unbounded => {
                    if phase_one {
                        return Err(Error::Numerical(format!(
                            "phase one direction for variable {q} has no blocking pivot above {PIVOT_TOL:e}"
                        )));
                    }
                    if !fresh {
                        self.refactor();
                        fresh = true;
                        continue;
                    }
                    return Ok(LpStatus::Unbounded);
                }
                Step::Flip => {
                    let theta = self.ub[q] - self.lb[q];
                    self.apply_step(q, dir, theta, &alpha);
                    self.state[q] = if self.state[q] == VarState::AtLower {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.x[q] = self.nonbasic_value(q);
                }
                Step::Pivot { pos, theta, to_upper } => {
                    self.apply_step(q, dir, theta, &alpha);
                    let leaving = self.head[pos];
                    self.state[leaving] = if to_upper { VarState::AtUpper } else { VarState::AtLower };
                    self.x[leaving] = self.nonbasic_value(leaving);
                    self.state[q] = VarState::Basic;
                    self.head[pos] = q;
                    self.eta.push(pos, &alpha);
                    fresh = false;
                }
            }
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, theta: f64, alpha: &[f64]) {
        if theta == 0.0 {
            return;
        }
        self.x[q] += dir * theta;
        for (r, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let k = self.head[r];
                self.x[k] -= dir * theta * a;
            }
        }
    }

    /// Harris two-pass ratio test; textbook with lowest-index ties in Bland
    /// mode.
    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], phase_one: bool, bland: bool) -> Step {
        // candidates: (position, rate, distance to target, target is upper)
        let mut cands: Vec<(usize, f64, f64, bool)> = Vec::new();
        for (r, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let k = self.head[r];
            let rate = -dir * a;
            let v = self.x[k];
            let (lo, hi) = (self.lb[k], self.ub[k]);
            let below = phase_one && v < lo - FEASIBILITY_TOL;
            let above = phase_one && v > hi + FEASIBILITY_TOL;
            if rate < 0.0 {
                if above {
                    cands.push((r, rate, v - hi, true));
                } else if !below && lo.is_finite() {
                    cands.push((r, rate, v - lo, false));
                }
            } else if below {
                cands.push((r, rate, lo - v, false));
            } else if !above && hi.is_finite() {
                cands.push((r, rate, hi - v, true));
            }
        }

        let flip = self.ub[q] - self.lb[q];
        let chosen = if bland {
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, &(r, rate, dist, _)) in cands.iter().enumerate() {
                let t = dist.max(0.0) / rate.abs();
                let k = self.head[r];
                let better = match best {
                    None => true,
                    Some((bt, _, bk)) => t < bt - 1e-12 || (t <= bt + 1e-12 && k < bk),
                };
                if better {
                    best = Some((t, i, k));
                }
            }
            best.map(|(t, i, _)| (i, t))
        } else {
            let mut bound = f64::INFINITY;
            for &(_, rate, dist, _) in &cands {
                bound = bound.min((dist.max(0.0) + FEASIBILITY_TOL) / rate.abs());
            }
            let mut best: Option<(usize, f64)> = None;
            let mut best_mag = 0.0;
            for (i, &(_, rate, dist, _)) in cands.iter().enumerate() {
                let t = dist.max(0.0) / rate.abs();
                if t <= bound && rate.abs() > best_mag {
                    best_mag = rate.abs();
                    best = Some((i, t));
                }
            }
            best
        };

        match chosen {
            Some((_, t)) if flip.is_finite() && flip <= t => Step::Flip,
            Some((i, t)) => {
                let (pos, _, _, to_upper) = cands[i];
                Step::Pivot { pos, theta: t, to_upper }
            }
            None if flip.is_finite() => Step::Flip,
            None => Step::Unbounded,
        }
    }

    fn into_solution(self, status: LpStatus) -> (LpSolution, Basis) {
        let n = self.p.n;
        let values = self.x[..n].to_vec();
        let objective = (0..n).map(|k| self.p.cost[k] * values[k]).sum();
        (
            LpSolution { status, values, objective, iterations: self.iterations },
            Basis { state: self.state, head: self.head },
        )
    }
}

enum Step {
    Unbounded,
    Flip,
    Pivot { pos: usize, theta: f64, to_upper: bool },
}

/// Solves with the given structural bounds, warm starting from `basis` when
/// provided.
pub(crate) fn solve_prepared(
    p: &Prepared,
    lower: &[f64],
    upper: &[f64],
    basis: Option<&Basis>,
) -> Result<(LpSolution, Basis)> {
    let (lb, ub) = p.bounds(lower, upper);
    if let Some(k) = (0..p.n).find(|&k| lb[k] > ub[k]) {
        return Err(Error::InvalidProgram(format!("variable {k} has crossed bounds")));
    }
    let basis = match basis {
        Some(b) => b.clone(),
        None => p.slack_basis(&lb, &ub),
    };
    let mut solver = Solver::new(p, lb, ub, basis);
    let status = solver.run()?;
    Ok(solver.into_solution(status))
}

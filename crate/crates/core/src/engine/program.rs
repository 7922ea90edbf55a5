use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` pairs. Repeated variables are summed.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A minimization problem over bounded, optionally integral, variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Adds a variable and returns its index. `upper` may be `f64::INFINITY`.
    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64, integer: bool) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(cost);
        self.integer.push(integer);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn has_integers(&self) -> bool {
        self.integer.iter().any(|&b| b)
    }

    /// True when every objective coefficient is an integer, so integral points
    /// have integral objective values.
    pub fn integral_objective(&self) -> bool {
        self.objective.iter().all(|c| c.fract() == 0.0)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    /// Largest violation of any row or bound by `values`; zero when feasible.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, &x) in values.iter().enumerate() {
            worst = worst.max(self.lower[k] - x).max(x - self.upper[k]);
        }
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().map(|&(k, a)| a * values[k]).sum();
            let gap = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n || self.integer.len() != n {
            return Err(Error::InvalidProgram("per-variable vectors differ in length".into()));
        }
        for k in 0..n {
            let (lo, hi) = (self.lower[k], self.upper[k]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::InvalidProgram(format!("variable {k} has bounds [{lo}, {hi}]")));
            }
            if !self.objective[k].is_finite() {
                return Err(Error::InvalidProgram(format!("variable {k} has a non-finite cost")));
            }
        }
        for (r, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::InvalidProgram(format!("row {r} has a non-finite right-hand side")));
            }
            if let Some(&(k, a)) = row.coeffs.iter().find(|&&(k, a)| k >= n || !a.is_finite()) {
                return Err(Error::InvalidProgram(format!("row {r} has bad entry ({k}, {a})")));
            }
        }
        Ok(())
    }
}

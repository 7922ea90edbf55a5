//! Product-form representation of the basis inverse.
//!
//! `B^-1 = E_k^-1 ... E_1^-1` where each eta matrix `E` differs from the
//! identity in a single column. Reinversion rebuilds the file from scratch in
//! a sparsity-aware pivot order; every basis change in between appends one
//! eta.

/// Entries of an eta column smaller than this are dropped.
const DROP_TOL: f64 = 1e-13;
/// Reinversion rejects a column whose best remaining pivot is below this.
const SINGULAR_TOL: f64 = 1e-9;
/// Threshold partial pivoting: candidates must be at least this fraction of
/// the largest remaining entry.
const THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Default)]
pub(crate) struct EtaFile {
    pivot_row: Vec<usize>,
    pivot_val: Vec<f64>,
    start: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
    base: usize,
}

/// Result of a reinversion: `row_of[c]` is the row column `c` pivoted on, or
/// `None` when the column was rejected as dependent.
pub(crate) struct Reinversion {
    pub row_of: Vec<Option<usize>>,
}

impl EtaFile {
    fn clear(&mut self) {
        self.pivot_row.clear();
        self.pivot_val.clear();
        self.idx.clear();
        self.val.clear();
        self.start.clear();
        self.start.push(0);
        self.base = 0;
    }

    pub fn len(&self) -> usize {
        self.pivot_row.len()
    }

    /// Etas appended since the last reinversion.
    pub fn updates(&self) -> usize {
        self.len() - self.base
    }

    /// Appends the eta for pivoting the dense column `alpha` on `row`.
    pub fn push(&mut self, row: usize, alpha: &[f64]) {
        if self.start.is_empty() {
            self.start.push(0);
        }
        for (i, &a) in alpha.iter().enumerate() {
            if i != row && a.abs() > DROP_TOL {
                self.idx.push(i);
                self.val.push(a);
            }
        }
        self.pivot_row.push(row);
        self.pivot_val.push(alpha[row]);
        self.start.push(self.idx.len());
    }

    fn push_unit(&mut self, row: usize, pivot: f64) {
        if self.start.is_empty() {
            self.start.push(0);
        }
        self.pivot_row.push(row);
        self.pivot_val.push(pivot);
        self.start.push(self.idx.len());
    }

    /// Solves `B z = w` in place.
    pub fn ftran(&self, w: &mut [f64]) {
        for k in 0..self.pivot_row.len() {
            let r = self.pivot_row[k];
            let wr = w[r];
            if wr == 0.0 {
                continue;
            }
            let wr = wr / self.pivot_val[k];
            w[r] = wr;
            for p in self.start[k]..self.start[k + 1] {
                w[self.idx[p]] -= self.val[p] * wr;
            }
        }
    }

    /// Solves `z^T B = w^T` in place.
    pub fn btran(&self, w: &mut [f64]) {
        for k in (0..self.pivot_row.len()).rev() {
            let r = self.pivot_row[k];
            let mut s = w[r];
            for p in self.start[k]..self.start[k + 1] {
                s -= self.val[p] * w[self.idx[p]];
            }
            w[r] = s / self.pivot_val[k];
        }
    }

    /// Rebuilds the file for the basis whose columns are `logical_rows`
    /// (columns `-e_r`) together with the sparse `columns`.
    ///
    /// Column singletons of the active submatrix are pivoted first; otherwise
    /// the sparsest column goes next and picks, among rows passing the
    /// threshold test, the one shared with the fewest pending columns.
    pub fn reinvert(&mut self, m: usize, logical_rows: &[usize], columns: &[Vec<(usize, f64)>]) -> Reinversion {
        self.clear();
        let mut assigned = vec![false; m];
        for &r in logical_rows {
            self.push_unit(r, -1.0);
            assigned[r] = true;
        }

        let nc = columns.len();
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut col_count = vec![0usize; nc];
        let mut row_count = vec![0usize; m];
        for (c, col) in columns.iter().enumerate() {
            for &(r, _) in col {
                row_cols[r].push(c);
                row_count[r] += 1;
                if !assigned[r] {
                    col_count[c] += 1;
                }
            }
        }

        let mut done = vec![false; nc];
        let mut singletons: Vec<usize> = (0..nc).filter(|&c| col_count[c] == 1).collect();
        let mut row_of = vec![None; nc];
        let mut work = vec![0.0; m];

        for _ in 0..nc {
            let c = loop {
                match singletons.pop() {
                    Some(c) if !done[c] && col_count[c] == 1 => break Some(c),
                    Some(_) => continue,
                    None => break None,
                }
            };
            let c = c.unwrap_or_else(|| {
                (0..nc)
                    .filter(|&c| !done[c])
                    .min_by_key(|&c| (col_count[c].max(1), c))
                    .expect("a pending column remains")
            });
            done[c] = true;
            for &(r, _) in &columns[c] {
                row_count[r] -= 1;
            }

            work.iter_mut().for_each(|w| *w = 0.0);
            for &(r, a) in &columns[c] {
                work[r] += a;
            }
            self.ftran(&mut work);

            let max_abs = (0..m).filter(|&r| !assigned[r]).map(|r| work[r].abs()).fold(0.0, f64::max);
            if max_abs < SINGULAR_TOL {
                continue;
            }
            let pivot = (0..m)
                .filter(|&r| !assigned[r] && work[r].abs() >= THRESHOLD * max_abs)
                .min_by(|&a, &b| {
                    row_count[a]
                        .cmp(&row_count[b])
                        .then(work[b].abs().total_cmp(&work[a].abs()))
                        .then(a.cmp(&b))
                })
                .expect("max_abs came from an unassigned row");

            self.push(pivot, &work);
            assigned[pivot] = true;
            row_of[c] = Some(pivot);
            for &other in &row_cols[pivot] {
                if !done[other] {
                    col_count[other] -= 1;
                    if col_count[other] == 1 {
                        singletons.push(other);
                    }
                }
            }
        }

        self.base = self.len();
        Reinversion { row_of }
    }

    /// Appends unit etas for rows left without a pivot and returns them; the
    /// caller places the matching logicals in the basis.
    pub fn fill_unassigned(&mut self, m: usize, used: &[bool]) -> Vec<usize> {
        let missing: Vec<usize> = (0..m).filter(|&r| !used[r]).collect();
        for &r in &missing {
            self.push_unit(r, -1.0);
        }
        self.base = self.len();
        missing
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: usize, cols: &[Vec<(usize, f64)>], rows: &[usize], logical_rows: &[usize]) -> Vec<Vec<f64>> {
        // b[row][position]; a logical pivots on its own row.
        let mut b = vec![vec![0.0; m]; m];
        for &r in logical_rows {
            b[r][r] = -1.0;
        }
        for (c, col) in cols.iter().enumerate() {
            for &(r, a) in col {
                b[r][rows[c]] += a;
            }
        }
        b
    }

    #[test]
    fn solves_match_dense_products() {
        let m = 4;
        let cols = vec![
            vec![(0, 2.0), (1, 1.0)],
            vec![(1, 1.0), (2, -1.0), (3, 1.0)],
            vec![(0, 1.0), (3, 3.0)],
        ];
        let logical_rows = vec![2];
        let mut f = EtaFile::default();
        let inv = f.reinvert(m, &logical_rows, &cols);
        let rows: Vec<usize> = inv.row_of.iter().map(|r| r.unwrap()).collect();
        let b = dense(m, &cols, &rows, &logical_rows);

        let rhs = vec![1.0, -2.0, 0.5, 4.0];
        let mut z = rhs.clone();
        f.ftran(&mut z);
        for r in 0..m {
            let lhs: f64 = (0..m).map(|p| b[r][p] * z[p]).sum();
            assert!((lhs - rhs[r]).abs() < 1e-12, "row {r}: {lhs} vs {}", rhs[r]);
        }

        let mut y = rhs.clone();
        f.btran(&mut y);
        for p in 0..m {
            let lhs: f64 = (0..m).map(|r| y[r] * b[r][p]).sum();
            assert!((lhs - rhs[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]];
        let mut f = EtaFile::default();
        let inv = f.reinvert(2, &[], &cols);
        assert_eq!(inv.row_of.iter().filter(|r| r.is_none()).count(), 1);
        let used: Vec<bool> = (0..2).map(|r| inv.row_of.contains(&Some(r))).collect();
        assert_eq!(f.fill_unassigned(2, &used).len(), 1);
        assert_eq!(f.len(), 2);
    }
}

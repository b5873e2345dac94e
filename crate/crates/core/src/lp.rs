//! Dense two-phase primal simplex for `min c.x  s.t.  A x = b, x >= 0`.
//!
//! Pivoting follows Bland's rule, so the method terminates on degenerate
//! problems. Sized for the tiny systems in this crate (tens of rows).

use nalgebra::{DMatrix, DVector};

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-11;
const PHASE_ONE_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub enum LpStatus {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible { phase_one: f64 },
    Unbounded,
    IterationLimit,
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize, cost: &mut [f64]) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = cost[col];
        if f != 0.0 {
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on reduced costs `cost` (last entry is minus
    /// the objective). Columns with `allowed[j] == false` never enter.
    fn optimize(&mut self, cost: &mut [f64], allowed: &[bool]) -> Option<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..self.cols).find(|&j| allowed[j] && cost[j] < -COST_EPS) else {
                return Some(true);
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => {
                            ratio < r - 1e-14 || (ratio <= r + 1e-14 && self.basis[i] < b)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, row, _)) = best else {
                return Some(false);
            };
            self.pivot(row, col, cost);
        }
        None
    }
}

/// Solves `min c.x  s.t.  A x = b, x >= 0`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> LpStatus {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    let cols = n + m;
    let mut t = vec![vec![0.0; cols + 1]; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[(i, j)];
        }
        t[i][n + i] = 1.0;
        t[i][cols] = sign * b[i];
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        cols,
    };

    // phase one: minimize the sum of artificials
    let mut cost = vec![0.0; cols + 1];
    for row in &tab.t {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[cols] -= row[cols];
    }
    let all = vec![true; cols];
    match tab.optimize(&mut cost, &all) {
        None => return LpStatus::IterationLimit,
        Some(false) => return LpStatus::Unbounded,
        Some(true) => {}
    }
    let phase_one = -cost[cols];
    let scale = 1.0 + b.amax();
    if phase_one > PHASE_ONE_EPS * scale {
        return LpStatus::Infeasible { phase_one };
    }

    // drive artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n {
            let best = (0..n)
                .map(|j| (j, tab.t[i][j].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .filter(|&(_, v)| v > 1e-9);
            match best {
                Some((j, _)) => {
                    // the artificial sits at level zero; pin it there
                    tab.t[i][cols] = 0.0;
                    tab.pivot(i, j, &mut cost)
                }
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // phase two
    let mut cost = vec![0.0; cols + 1];
    cost[..n].copy_from_slice(c.as_slice());
    for (i, &bj) in tab.basis.iter().enumerate() {
        let f = cost[bj];
        if f != 0.0 {
            for (v, tv) in cost.iter_mut().zip(&tab.t[i]) {
                *v -= f * tv;
            }
        }
    }
    let structural: Vec<bool> = (0..cols).map(|j| j < n).collect();
    match tab.optimize(&mut cost, &structural) {
        None => LpStatus::IterationLimit,
        Some(false) => LpStatus::Unbounded,
        Some(true) => {
            let mut x = vec![0.0; n];
            for (i, &bj) in tab.basis.iter().enumerate() {
                x[bj] = tab.rhs(i).max(0.0);
            }
            let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
            LpStatus::Optimal { x, objective }
        }
    }
}

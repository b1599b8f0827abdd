//! Dense two-phase tableau with Bland's rule.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(super) struct Tableau<T> {
    /// `m` constraint rows of width `n + m + 1`; the last entry is the rhs.
    rows: Vec<Vec<T>>,
    /// Reduced costs with `-z` in the last entry.
    costs: Vec<T>,
    basis: Vec<usize>,
    /// Structural columns; indices `n..n + m` are artificials.
    n: usize,
    pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    /// Sets up `min Σ artificials` for `A x = b`, `b ≥ 0`.
    pub fn phase_one(a: &[Vec<T>], b: &[T]) -> Self {
        let m = a.len();
        let n = a.first().map_or(0, Vec::len);
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
            let mut r = row.clone();
            r.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
            r.push(rhs.clone());
            rows.push(r);
        }
        let mut costs = vec![T::zero(); width];
        for row in &rows {
            for j in 0..n {
                costs[j] = costs[j].clone() - row[j].clone();
            }
            costs[width - 1] = costs[width - 1].clone() - row[width - 1].clone();
        }
        Self {
            rows,
            costs,
            basis: (n..n + m).collect(),
            n,
            pivots: 0,
        }
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn width(&self) -> usize {
        self.costs.len()
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let lead = self.rows[r][e].clone();
        for v in self.rows[r].iter_mut().filter(|v| !v.is_zero()) {
            *v = v.clone() / lead.clone();
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |target: &mut Vec<T>| {
            let factor = target[e].clone();
            if factor.is_zero() {
                return;
            }
            for (t, p) in target.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *t = t.clone() - factor.clone() * p.clone();
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.costs);
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Bland's rule over columns `< limit`. Returns `Ok(true)` at optimality.
    fn iterate(&mut self, limit: usize) -> Result<()> {
        let rhs = self.width() - 1;
        loop {
            let Some(e) = (0..limit).find(|&j| self.costs[j].is_negative()) else {
                return Ok(());
            };
            let mut leave: Option<usize> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][e];
                if !a.is_positive() {
                    continue;
                }
                leave = Some(match leave {
                    None => i,
                    Some(k) => {
                        let lhs = self.rows[i][rhs].clone() * self.rows[k][e].clone();
                        let rhs_k = self.rows[k][rhs].clone() * a.clone();
                        if lhs < rhs_k || (lhs == rhs_k && self.basis[i] < self.basis[k]) {
                            i
                        } else {
                            k
                        }
                    }
                });
            }
            match leave {
                Some(r) => self.pivot(r, e),
                None => return Err(Error::Unbounded),
            }
        }
    }

    /// Runs phase one and removes artificials from the basis; returns whether
    /// the system is feasible.
    pub fn run_phase_one(&mut self) -> bool {
        let limit = self.width() - 1;
        self.iterate(limit).expect("phase one is bounded below by zero");
        if !self.costs[limit].is_zero() {
            return false;
        }
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.n {
                match (0..self.n).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        // linearly dependent row
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        true
    }

    /// Minimizes `costs · x` over structural columns from the phase-one basis.
    pub fn run_phase_two(&mut self, costs: &[T]) -> Result<()> {
        let rhs = self.width() - 1;
        let mut reduced = vec![T::zero(); self.width()];
        reduced[..self.n].clone_from_slice(costs);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.n {
                reduced[j] = reduced[j].clone() - cb.clone() * row[j].clone();
            }
            reduced[rhs] = reduced[rhs].clone() - cb.clone() * row[rhs].clone();
        }
        self.costs = reduced;
        self.iterate(self.n)
    }

    /// Current basic solution over structural columns.
    pub fn primal(&self) -> Vec<T> {
        let rhs = self.width() - 1;
        let mut x = vec![T::zero(); self.n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n {
                x[b] = row[rhs].clone();
            }
        }
        x
    }
}

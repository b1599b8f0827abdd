//! Revised simplex over an explicit basis inverse, driven by a pricing oracle.
//!
//! Only the `m × m` basis is stored; candidate columns are produced on demand.
//! The leaving row is chosen by the lexicographic ratio rule on `[π | B⁻¹]`,
//! which prevents cycling for any sequence of improving entering columns.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{dot, Scalar};

const REFRESH_INTERVAL: usize = 32;

/// Provenance of a basis column. The derived order (initial, slack,
/// generated, then index) is the deterministic column ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ColumnLabel {
    Initial(usize),
    Slack(usize),
    Generated(usize),
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnLabel::Initial(i) => write!(f, "u{i}"),
            ColumnLabel::Slack(i) => write!(f, "s{i}"),
            ColumnLabel::Generated(i) => write!(f, "g{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column<T> {
    pub label: ColumnLabel,
    pub entries: Vec<T>,
    pub cost: T,
}

impl<T> Column<T> {
    pub fn new(label: ColumnLabel, entries: Vec<T>, cost: T) -> Self {
        Self { label, entries, cost }
    }
}

/// Columns of the `m × m` upper-triangular matrix of ones: column `j` has ones
/// in rows `0..=j`.
pub fn upper_triangular<T: Scalar>(m: usize) -> Vec<Vec<T>> {
    (0..m)
        .map(|j| (0..m).map(|i| if i <= j { T::one() } else { T::zero() }).collect())
        .collect()
}

#[derive(Clone, Debug)]
pub struct Basis<T> {
    columns: Vec<Column<T>>,
    inverse: Vec<Vec<T>>,
    rhs: Vec<T>,
    solution: Vec<T>,
    pivots: usize,
    since_refresh: usize,
}

impl<T: Scalar> Basis<T> {
    /// Requires `m` linearly independent columns of length `m` whose basic
    /// solution `B⁻¹ rhs` is nonnegative.
    pub fn new(columns: Vec<Column<T>>, rhs: Vec<T>) -> Result<Self> {
        let m = rhs.len();
        if columns.len() != m || columns.iter().any(|c| c.entries.len() != m) {
            return Err(Error::BadBasis);
        }
        let mut basis = Self {
            columns,
            inverse: Vec::new(),
            rhs,
            solution: Vec::new(),
            pivots: 0,
            since_refresh: 0,
        };
        basis.refresh()?;
        if basis.solution.iter().any(Signed::is_negative) {
            return Err(Error::InvalidSystem("initial basis is not feasible".into()));
        }
        Ok(basis)
    }

    fn refresh(&mut self) -> Result<()> {
        let m = self.rhs.len();
        let matrix: Vec<Vec<T>> = (0..m)
            .map(|i| self.columns.iter().map(|c| c.entries[i].clone()).collect())
            .collect();
        self.inverse = linalg::invert(&matrix).ok_or(Error::BadBasis)?;
        self.solution = linalg::mat_vec(&self.inverse, &self.rhs);
        self.since_refresh = 0;
        Ok(())
    }

    pub fn columns(&self) -> &[Column<T>] {
        &self.columns
    }

    /// `π_B = B⁻¹ p`, aligned with [`Basis::columns`].
    pub fn solution(&self) -> &[T] {
        &self.solution
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn contains(&self, label: ColumnLabel) -> bool {
        self.columns.iter().any(|c| c.label == label)
    }

    /// `c_B · π_B`.
    pub fn objective(&self) -> T {
        self.columns
            .iter()
            .zip(&self.solution)
            .fold(T::zero(), |acc, (c, x)| acc + c.cost.clone() * x.clone())
    }

    /// Simplex multipliers `c_B B⁻¹`.
    pub fn duals(&self) -> Vec<T> {
        let m = self.rhs.len();
        (0..m)
            .map(|j| {
                self.columns
                    .iter()
                    .zip(&self.inverse)
                    .fold(T::zero(), |acc, (c, row)| acc + c.cost.clone() * row[j].clone())
            })
            .collect()
    }

    /// `c_j - c_B B⁻¹ A^j`.
    pub fn reduced_cost(&self, column: &Column<T>) -> T {
        column.cost.clone() - dot(&self.duals(), &column.entries)
    }

    /// Replaces one basis column by `column`, keeping the basic solution
    /// feasible. Returns the label of the column that left.
    pub fn merge(&mut self, column: Column<T>) -> Result<ColumnLabel> {
        let m = self.rhs.len();
        if column.entries.len() != m {
            return Err(Error::RejectedColumn(format!(
                "column {} has {} entries, expected {m}",
                column.label,
                column.entries.len()
            )));
        }
        let rc = self.reduced_cost(&column);
        if rc.is_positive() {
            return Err(Error::RejectedColumn(format!(
                "column {} has positive reduced cost {rc}",
                column.label
            )));
        }
        let d = linalg::mat_vec(&self.inverse, &column.entries);
        let mut leave: Option<usize> = None;
        for i in (0..m).filter(|&i| d[i].is_positive()) {
            leave = Some(match leave {
                Some(k) if !self.lex_less(i, k, &d) => k,
                _ => i,
            });
        }
        let r = leave.ok_or(Error::Unbounded)?;

        let lead = d[r].clone();
        for v in self.inverse[r].iter_mut() {
            *v = v.clone() / lead.clone();
        }
        self.solution[r] = self.solution[r].clone() / lead;
        let pivot_row = self.inverse[r].clone();
        let pivot_value = self.solution[r].clone();
        for i in (0..m).filter(|&i| i != r && !d[i].is_zero()) {
            for (t, p) in self.inverse[i].iter_mut().zip(&pivot_row) {
                *t = t.clone() - d[i].clone() * p.clone();
            }
            self.solution[i] = self.solution[i].clone() - d[i].clone() * pivot_value.clone();
        }
        let leaving = std::mem::replace(&mut self.columns[r], column).label;
        self.pivots += 1;
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.refresh()?;
        }
        Ok(leaving)
    }

    /// Lexicographic comparison of rows `i` and `k` of `[π | B⁻¹]` scaled by
    /// `1/d`.
    fn lex_less(&self, i: usize, k: usize, d: &[T]) -> bool {
        let key = |row: usize, col: Option<usize>| match col {
            None => self.solution[row].clone(),
            Some(c) => self.inverse[row][c].clone(),
        };
        for col in std::iter::once(None).chain((0..self.rhs.len()).map(Some)) {
            let lhs = key(i, col) * d[k].clone();
            let rhs = key(k, col) * d[i].clone();
            if lhs != rhs {
                return lhs < rhs;
            }
        }
        false
    }
}

/// Read-only view handed to a [`PricingOracle`].
pub struct PricingState<'a, T> {
    pub basis: &'a Basis<T>,
    pub duals: &'a [T],
}

impl<T: Scalar> PricingState<'_, T> {
    pub fn reduced_cost(&self, column: &Column<T>) -> T {
        column.cost.clone() - dot(self.duals, &column.entries)
    }
}

/// Supplies an entering column with strictly negative reduced cost, or `None`
/// when no such column exists.
pub trait PricingOracle<T> {
    fn price(&mut self, state: &PricingState<'_, T>) -> Result<Option<Column<T>>>;
}

impl<T, F> PricingOracle<T> for F
where
    F: FnMut(&PricingState<'_, T>) -> Result<Option<Column<T>>>,
{
    fn price(&mut self, state: &PricingState<'_, T>) -> Result<Option<Column<T>>> {
        self(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PricingStatus {
    /// Total cost reached zero.
    ZeroCost,
    /// Positive cost remains and the oracle found no improving column.
    NoImprovingColumn,
}

#[derive(Clone, Debug)]
pub struct PricingOutcome<T> {
    pub basis: Basis<T>,
    pub status: PricingStatus,
    /// Objective before the first pricing call and after every merge.
    pub objective_trace: Vec<T>,
    pub oracle_calls: usize,
}

/// Minimizes `c_B · π_B` by repeatedly merging oracle columns until the cost
/// is zero or the oracle gives up.
pub fn minimize_with_pricing<T: Scalar, O: PricingOracle<T>>(
    mut basis: Basis<T>,
    oracle: &mut O,
    max_iterations: usize,
) -> Result<PricingOutcome<T>> {
    let mut objective_trace = vec![basis.objective()];
    let mut oracle_calls = 0;
    loop {
        let status = if objective_trace.last().is_some_and(Zero::is_zero) {
            Some(PricingStatus::ZeroCost)
        } else {
            None
        };
        if let Some(status) = status {
            return Ok(PricingOutcome {
                basis,
                status,
                objective_trace,
                oracle_calls,
            });
        }
        if oracle_calls == max_iterations {
            return Err(Error::IterationLimit(max_iterations));
        }
        let duals = basis.duals();
        oracle_calls += 1;
        let offered = oracle.price(&PricingState {
            basis: &basis,
            duals: &duals,
        })?;
        let Some(column) = offered else {
            return Ok(PricingOutcome {
                basis,
                status: PricingStatus::NoImprovingColumn,
                objective_trace,
                oracle_calls,
            });
        };
        let rc = basis.reduced_cost(&column);
        if !rc.is_negative() {
            return Err(Error::RejectedColumn(format!(
                "oracle offered column {} with reduced cost {rc}",
                column.label
            )));
        }
        basis.merge(column)?;
        objective_trace.push(basis.objective());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::tests::q;
    use crate::Rational;

    fn u_basis(rhs: &[Rational], costs: &[i64]) -> Basis<Rational> {
        let columns = upper_triangular(rhs.len())
            .into_iter()
            .enumerate()
            .map(|(j, e)| Column::new(ColumnLabel::Initial(j), e, q(costs[j], 1)))
            .collect();
        Basis::new(columns, rhs.to_vec()).unwrap()
    }

    #[test]
    fn upper_triangular_start_is_differences() {
        let b = u_basis(&[q(1, 1), q(9, 10), q(1, 2)], &[1, 1, 1]);
        assert_eq!(b.solution(), &[q(1, 10), q(2, 5), q(1, 2)]);
        assert_eq!(b.objective(), q(1, 1));
    }

    #[test]
    fn merge_reduces_cost_on_three_rows() {
        // rows Σ, P(x), P(y); the entering point has x and not y
        let mut b = u_basis(&[q(1, 1), q(9, 10), q(1, 2)], &[1, 1, 1]);
        let entering = Column::new(ColumnLabel::Generated(0), vec![q(1, 1), q(1, 1), q(0, 1)], q(0, 1));
        assert_eq!(b.reduced_cost(&entering), q(-1, 1));
        let left = b.merge(entering).unwrap();
        // d = B⁻¹a = (0, 1, 0); only u1 can leave
        assert_eq!(left, ColumnLabel::Initial(1));
        assert_eq!(b.solution(), &[q(1, 10), q(2, 5), q(1, 2)]);
        assert_eq!(b.objective(), q(3, 5));
    }

    #[test]
    fn degenerate_reentry_keeps_feasibility() {
        let mut b = u_basis(&[q(1, 1), q(1, 2), q(1, 2)], &[1, 1, 0]);
        // π = (1/2, 0, 1/2); re-entering u1 with cost 0 is a degenerate pivot
        let duplicate = Column::new(ColumnLabel::Generated(0), vec![q(1, 1), q(1, 1), q(0, 1)], q(0, 1));
        let before = b.objective();
        b.merge(duplicate).unwrap();
        assert!(b.solution().iter().all(|v| !v.is_negative()));
        assert!(b.objective() <= before);
    }

    #[test]
    fn positive_reduced_cost_is_rejected() {
        let mut b = u_basis(&[q(1, 1), q(1, 2)], &[0, 0]);
        let col = Column::new(ColumnLabel::Generated(0), vec![q(1, 1), q(0, 1)], q(1, 1));
        assert!(matches!(b.merge(col), Err(Error::RejectedColumn(_))));
    }

    #[test]
    fn singular_or_infeasible_bases_are_refused() {
        let same = vec![q(1, 1), q(0, 1)];
        let cols = vec![
            Column::new(ColumnLabel::Initial(0), same.clone(), q(0, 1)),
            Column::new(ColumnLabel::Initial(1), same, q(0, 1)),
        ];
        assert_eq!(Basis::new(cols, vec![q(1, 1), q(0, 1)]).unwrap_err(), Error::BadBasis);
        let cols = upper_triangular::<Rational>(2)
            .into_iter()
            .enumerate()
            .map(|(j, e)| Column::new(ColumnLabel::Initial(j), e, q(0, 1)))
            .collect();
        assert!(Basis::new(cols, vec![q(1, 2), q(1, 1)]).is_err());
    }

    #[test]
    fn zero_cost_start_returns_immediately() {
        let b = u_basis(&[q(1, 1), q(1, 3)], &[0, 0]);
        let mut never = |_: &PricingState<'_, Rational>| -> Result<Option<Column<Rational>>> {
            panic!("oracle must not be called")
        };
        let out = minimize_with_pricing(b, &mut never, 10).unwrap();
        assert_eq!(out.status, PricingStatus::ZeroCost);
        assert_eq!(out.oracle_calls, 0);
    }

    #[test]
    fn failing_oracle_reports_no_column() {
        let b = u_basis(&[q(1, 1), q(1, 3)], &[1, 1]);
        let mut none = |_: &PricingState<'_, Rational>| Ok(None);
        let out = minimize_with_pricing(b, &mut none, 10).unwrap();
        assert_eq!(out.status, PricingStatus::NoImprovingColumn);
        assert_eq!(out.objective_trace, vec![q(1, 1)]);
    }

    #[test]
    fn mixed_instance_reaches_zero_cost() {
        // rows Σ, P(a2), P(b3) sorted descending: 1, 1/3, 1/4; pool holds the
        // three pure equilibria and e4 of the Alice/Bob game
        let rhs = vec![q(1, 1), q(1, 3), q(1, 4)];
        let pool = [
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(1, 1), q(1, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1), q(1, 1)],
            vec![q(1, 1), q(1, 3), q(0, 1)],
        ];
        let b = u_basis(&rhs, &[1, 1, 1]);
        let mut oracle = |s: &PricingState<'_, Rational>| {
            Ok(pool.iter().enumerate().find_map(|(j, e)| {
                let col = Column::new(ColumnLabel::Generated(j), e.clone(), q(0, 1));
                (!s.basis.contains(col.label) && s.reduced_cost(&col).is_negative()).then_some(col)
            }))
        };
        let out = minimize_with_pricing(b, &mut oracle, 50).unwrap();
        assert_eq!(out.status, PricingStatus::ZeroCost);
        assert!(out.objective_trace.windows(2).all(|w| w[1] <= w[0]));
        // the witness reproduces the right-hand side
        let basis = &out.basis;
        for (i, r) in rhs.iter().enumerate() {
            let lhs = basis
                .columns()
                .iter()
                .zip(basis.solution())
                .fold(q(0, 1), |acc, (c, x)| acc + c.entries[i].clone() * x.clone());
            assert_eq!(&lhs, r);
        }
        for (c, x) in basis.columns().iter().zip(basis.solution()) {
            assert!(x.is_zero() || matches!(c.label, ColumnLabel::Generated(_)));
        }
    }

    #[test]
    fn refresh_preserves_state() {
        // many pivots between two cost-0 columns and the unit start
        let rhs = vec![q(1, 1), q(1, 2)];
        let mut b = u_basis(&rhs, &[1, 1]);
        for k in 0..40 {
            let col = Column::new(ColumnLabel::Generated(k), vec![q(1, 1), q((k % 2) as i64, 1)], q(0, 1));
            if !b.reduced_cost(&col).is_positive() {
                b.merge(col).unwrap();
            }
        }
        let mut fresh = b.clone();
        fresh.refresh().unwrap();
        assert_eq!(fresh.solution(), b.solution());
        assert_eq!(fresh.inverse, b.inverse);
    }
}

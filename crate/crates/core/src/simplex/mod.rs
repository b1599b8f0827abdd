//! Exact linear programming over probability vectors.
//!
//! [`ConstraintSystem`] holds `A π ⋈ p` where the first row is the
//! normalization `Σ π = 1`. Small systems are solved with a dense two-phase
//! tableau using Bland's rule; column generation uses the revised engine in
//! [`revised`].

mod revised;
mod tableau;

pub use revised::{
    minimize_with_pricing, upper_triangular, Basis, Column, ColumnLabel, PricingOracle, PricingOutcome, PricingState,
    PricingStatus,
};

use std::fmt;

use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn holds<T: Ord>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Whether a column is a candidate support point or a slack introduced by
/// [`ConstraintSystem::to_standard_form`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ColumnKind {
    Point,
    Slack,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem<T> {
    matrix: Vec<Vec<T>>,
    bounds: Vec<T>,
    relations: Vec<Relation>,
    kinds: Vec<ColumnKind>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feasibility<T> {
    /// One value per point column, or `None` when infeasible.
    pub solution: Option<Vec<T>>,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum<T> {
    /// Optimal point-column values and objective value, or `None` when
    /// infeasible.
    pub solution: Option<(Vec<T>, T)>,
    pub pivots: usize,
}

impl<T: Scalar> ConstraintSystem<T> {
    /// Builds a system from explicit rows over point columns. The first row
    /// must be the normalization row.
    pub fn new(matrix: Vec<Vec<T>>, bounds: Vec<T>, relations: Vec<Relation>) -> Result<Self> {
        let columns = matrix.first().map_or(0, Vec::len);
        let system = Self {
            kinds: vec![ColumnKind::Point; columns],
            matrix,
            bounds,
            relations,
        };
        system.validate()?;
        Ok(system)
    }

    /// Prepends the normalization row to `rows`, each given as coefficients
    /// over `columns` points, a relation and a bound.
    pub fn with_normalization(columns: usize, rows: impl IntoIterator<Item = (Vec<T>, Relation, T)>) -> Result<Self> {
        let mut matrix = vec![vec![T::one(); columns]];
        let mut bounds = vec![T::one()];
        let mut relations = vec![Relation::Eq];
        for (row, relation, bound) in rows {
            matrix.push(row);
            relations.push(relation);
            bounds.push(bound);
        }
        Self::new(matrix, bounds, relations)
    }

    fn validate(&self) -> Result<()> {
        let m = self.matrix.len();
        if m == 0 {
            return Err(Error::InvalidSystem("system has no rows".into()));
        }
        if self.bounds.len() != m || self.relations.len() != m {
            return Err(Error::InvalidSystem(format!(
                "{m} rows but {} bounds and {} relations",
                self.bounds.len(),
                self.relations.len()
            )));
        }
        let n = self.kinds.len();
        if let Some(i) = self.matrix.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidSystem(format!(
                "row {i} has {} entries, expected {n}",
                self.matrix[i].len()
            )));
        }
        let normalized = self.relations[0] == Relation::Eq
            && self.bounds[0].is_one()
            && self.kinds.iter().zip(&self.matrix[0]).all(|(k, v)| match k {
                ColumnKind::Point => v.is_one(),
                ColumnKind::Slack => v.is_zero(),
            });
        if !normalized {
            return Err(Error::InvalidSystem("first row must be the normalization row".into()));
        }
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn num_columns(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_points(&self) -> usize {
        self.kinds.iter().filter(|k| **k == ColumnKind::Point).count()
    }

    pub fn matrix(&self) -> &[Vec<T>] {
        &self.matrix
    }

    pub fn bounds(&self) -> &[T] {
        &self.bounds
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.matrix.iter().map(|r| r[j].clone()).collect()
    }

    /// Equality form: every `≤` row gains a `+1` slack column, every `≥` row
    /// a `-1` surplus column.
    pub fn to_standard_form(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.matrix.len() {
            let coefficient = match out.relations[i] {
                Relation::Eq => continue,
                Relation::Le => T::one(),
                Relation::Ge => -T::one(),
            };
            for (r, row) in out.matrix.iter_mut().enumerate() {
                row.push(if r == i { coefficient.clone() } else { T::zero() });
            }
            out.kinds.push(ColumnKind::Slack);
            out.relations[i] = Relation::Eq;
        }
        out
    }

    /// Checks `A π ⋈ p` and `π ≥ 0` exactly; `point_values` has one entry per
    /// point column and slack columns are left free to absorb the difference.
    pub fn is_satisfied_by(&self, point_values: &[T]) -> bool {
        if point_values.len() != self.num_points() || point_values.iter().any(Signed::is_negative) {
            return false;
        }
        let points: Vec<usize> = self.point_indices();
        self.matrix.iter().enumerate().all(|(i, row)| {
            let lhs: Vec<T> = points.iter().map(|&j| row[j].clone()).collect();
            let value = dot(&lhs, point_values);
            let slack: Vec<&T> = self
                .kinds
                .iter()
                .enumerate()
                .filter(|(j, k)| **k == ColumnKind::Slack && !row[*j].is_zero())
                .map(|(j, _)| &row[j])
                .collect();
            match slack.as_slice() {
                [] => self.relations[i].holds(&value, &self.bounds[i]),
                // a slack of coefficient s turns the row into value ⋈' bound
                [s] if s.is_positive() => value <= self.bounds[i],
                [_] => value >= self.bounds[i],
                _ => false,
            }
        })
    }

    fn point_indices(&self) -> Vec<usize> {
        (0..self.kinds.len())
            .filter(|&j| self.kinds[j] == ColumnKind::Point)
            .collect()
    }

    fn equality_rows(&self) -> (Vec<Vec<T>>, Vec<T>) {
        let standard = self.to_standard_form();
        let mut rows = standard.matrix;
        let mut rhs = standard.bounds;
        for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
            if b.is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
                *b = -b.clone();
            }
        }
        (rows, rhs)
    }

    fn project(&self, standard_kinds: &[ColumnKind], x: Vec<T>) -> Vec<T> {
        x.into_iter()
            .zip(standard_kinds)
            .filter(|(_, k)| **k == ColumnKind::Point)
            .map(|(v, _)| v)
            .collect()
    }
}

/// Finds a basic feasible `π` (at most `num_rows` positive entries) or proves
/// that none exists.
pub fn solve_feasibility<T: Scalar>(system: &ConstraintSystem<T>) -> Feasibility<T> {
    let standard = system.to_standard_form();
    let (rows, rhs) = system.equality_rows();
    let mut tableau = tableau::Tableau::phase_one(&rows, &rhs);
    let feasible = tableau.run_phase_one();
    let pivots = tableau.pivots();
    Feasibility {
        solution: feasible.then(|| system.project(standard.kinds(), tableau.primal())),
        pivots,
    }
}

/// Optimizes `objective · π` (one coefficient per point column) subject to
/// the system.
pub fn optimize<T: Scalar>(system: &ConstraintSystem<T>, objective: &[T], sense: Sense) -> Result<Optimum<T>> {
    if objective.len() != system.num_points() {
        return Err(Error::InvalidSystem(format!(
            "objective has {} coefficients for {} columns",
            objective.len(),
            system.num_points()
        )));
    }
    let standard = system.to_standard_form();
    let (rows, rhs) = system.equality_rows();
    let mut costs = Vec::with_capacity(standard.num_columns());
    let mut it = objective.iter();
    for kind in standard.kinds() {
        costs.push(match kind {
            ColumnKind::Point => {
                let c = it.next().expect("one coefficient per point").clone();
                if sense == Sense::Maximize {
                    -c
                } else {
                    c
                }
            }
            ColumnKind::Slack => T::zero(),
        });
    }
    let mut tableau = tableau::Tableau::phase_one(&rows, &rhs);
    if !tableau.run_phase_one() {
        return Ok(Optimum {
            solution: None,
            pivots: tableau.pivots(),
        });
    }
    tableau.run_phase_two(&costs)?;
    let x = system.project(standard.kinds(), tableau.primal());
    let value = dot(objective, &x);
    Ok(Optimum {
        solution: Some((x, value)),
        pivots: tableau.pivots(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::{self, LinearSolution};
    use crate::Rational;
    use proptest::prelude::*;

    pub(crate) fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn qs(values: &[(i64, i64)]) -> Vec<Rational> {
        values.iter().map(|&(n, d)| q(n, d)).collect()
    }

    /// Ring observation rows after the normalization row, over the equilibrium
    /// columns (a1b1c1, a2b2c2, a3b3c3, a2b1c1, a2b2c1).
    pub(crate) fn ring_observed() -> ConstraintSystem<Rational> {
        let ints = |v: [i64; 5]| v.iter().map(|&x| q(x, 1)).collect::<Vec<_>>();
        let rows = vec![
            (ints([1, 0, 0, 0, 0]), q(1, 10)),
            (ints([0, 1, 0, 1, 1]), q(9, 10)),
            (ints([0, 0, 1, 0, 0]), q(0, 1)),
            (ints([1, 0, 0, 1, 0]), q(1, 2)),
            (ints([0, 1, 0, 0, 1]), q(1, 2)),
            (ints([0, 0, 1, 0, 0]), q(0, 1)),
            (ints([1, 0, 0, 1, 1]), q(4, 5)),
            (ints([0, 1, 0, 0, 0]), q(1, 5)),
            (ints([0, 0, 1, 0, 0]), q(0, 1)),
            (ints([1, 1, 1, 1, 1]), q(1, 1)),
        ];
        ConstraintSystem::with_normalization(5, rows.into_iter().map(|(r, b)| (r, Relation::Eq, b))).unwrap()
    }

    #[test]
    fn normalization_row_is_required() {
        let err = ConstraintSystem::new(vec![vec![q(1, 1), q(0, 1)]], vec![q(1, 1)], vec![Relation::Eq]);
        assert!(matches!(err, Err(Error::InvalidSystem(_))));
        let err = ConstraintSystem::<Rational>::new(vec![vec![q(1, 1)]], vec![q(1, 1)], vec![]);
        assert!(matches!(err, Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn standard_form_adds_slacks() {
        let s = ConstraintSystem::with_normalization(
            2,
            [
                (qs(&[(1, 1), (0, 1)]), Relation::Le, q(1, 2)),
                (qs(&[(0, 1), (1, 1)]), Relation::Ge, q(1, 4)),
                (qs(&[(1, 1), (1, 1)]), Relation::Eq, q(1, 1)),
            ],
        )
        .unwrap();
        let std = s.to_standard_form();
        assert_eq!(std.num_columns(), 4);
        assert_eq!(std.kinds()[2..], [ColumnKind::Slack, ColumnKind::Slack]);
        assert!(std.relations().iter().all(|r| *r == Relation::Eq));
        assert_eq!(std.column(2), qs(&[(0, 1), (1, 1), (0, 1), (0, 1)]));
        assert_eq!(std.column(3), qs(&[(0, 1), (0, 1), (-1, 1), (0, 1)]));
        assert_eq!(std.to_standard_form(), std);
        assert_eq!(ring_observed().to_standard_form(), ring_observed());
    }

    #[test]
    fn ring_observed_is_feasible() {
        let s = ring_observed();
        assert!(s.is_satisfied_by(&qs(&[(1, 10), (2, 10), (0, 1), (4, 10), (3, 10)])));
        let result = solve_feasibility(&s);
        let pi = result.solution.expect("feasible");
        assert!(s.is_satisfied_by(&pi));
        assert!(pi.iter().filter(|v| !num_traits::Zero::is_zero(*v)).count() <= s.num_rows());
    }

    #[test]
    fn forcing_certainty_on_b2_is_infeasible() {
        // RING equilibria with P(a2) = 0.9 and P(b2) = 1
        let ints = |v: [i64; 5]| v.iter().map(|&x| q(x, 1)).collect::<Vec<_>>();
        let s = ConstraintSystem::with_normalization(
            5,
            [
                (ints([0, 1, 0, 1, 1]), Relation::Eq, q(9, 10)),
                (ints([0, 1, 0, 0, 1]), Relation::Ge, q(1, 1)),
            ],
        )
        .unwrap();
        assert_eq!(solve_feasibility(&s).solution, None);
    }

    #[test]
    fn single_column() {
        let s = ConstraintSystem::with_normalization(1, []).unwrap();
        assert_eq!(solve_feasibility(&s).solution, Some(vec![q(1, 1)]));
        let empty = ConstraintSystem::<Rational>::with_normalization(0, []).unwrap();
        assert_eq!(solve_feasibility(&empty).solution, None);
    }

    #[test]
    fn optimize_example5_bounds() {
        // max P(b2) subject to P(a2) = 0.9 over the RING equilibria
        let ints = |v: [i64; 5]| v.iter().map(|&x| q(x, 1)).collect::<Vec<_>>();
        let s = ConstraintSystem::with_normalization(5, [(ints([0, 1, 0, 1, 1]), Relation::Eq, q(9, 10))]).unwrap();
        let b2 = ints([0, 1, 0, 0, 1]);
        let max = optimize(&s, &b2, Sense::Maximize).unwrap().solution.unwrap();
        assert_eq!(max.1, q(9, 10));
        assert!(s.is_satisfied_by(&max.0));
        let min = optimize(&s, &b2, Sense::Minimize).unwrap().solution.unwrap();
        assert_eq!(min.1, q(0, 1));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let s = ConstraintSystem::with_normalization(
            3,
            [
                (qs(&[(1, 1), (1, 1), (1, 1)]), Relation::Eq, q(1, 1)),
                (qs(&[(2, 1), (2, 1), (2, 1)]), Relation::Eq, q(2, 1)),
                (qs(&[(1, 1), (0, 1), (0, 1)]), Relation::Eq, q(1, 3)),
            ],
        )
        .unwrap();
        let opt = optimize(&s, &qs(&[(0, 1), (1, 1), (0, 1)]), Sense::Maximize).unwrap();
        let (pi, value) = opt.solution.unwrap();
        assert_eq!(value, q(2, 3));
        assert!(s.is_satisfied_by(&pi));
    }

    /// Feasible iff some subset of standard-form columns yields a unique
    /// nonnegative solution (a vertex).
    fn vertex_oracle(system: &ConstraintSystem<Rational>) -> Option<Vec<Rational>> {
        let std = system.to_standard_form();
        let n = std.num_columns();
        for mask in 0u32..1 << n {
            let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            if cols.len() > std.num_rows() {
                continue;
            }
            let a: Vec<Vec<Rational>> = std
                .matrix()
                .iter()
                .map(|row| cols.iter().map(|&j| row[j].clone()).collect())
                .collect();
            if let LinearSolution::Unique(x) = linalg::solve(&a, std.bounds()) {
                if x.iter().all(|v| !v.is_negative()) {
                    let mut full = vec![q(0, 1); n];
                    for (&j, v) in cols.iter().zip(x) {
                        full[j] = v;
                    }
                    return Some(system.project(std.kinds(), full));
                }
            }
        }
        None
    }

    fn relation() -> impl Strategy<Value = Relation> {
        prop_oneof![Just(Relation::Le), Just(Relation::Ge), Just(Relation::Eq)]
    }

    fn small_system() -> impl Strategy<Value = ConstraintSystem<Rational>> {
        (1usize..=6, 0usize..=3).prop_flat_map(|(n, extra)| {
            let row = (prop::collection::vec(-2i64..=2, n), relation(), 0i64..=4);
            prop::collection::vec(row, extra).prop_map(move |rows| {
                ConstraintSystem::with_normalization(
                    n,
                    rows.into_iter()
                        .map(|(r, rel, b)| (r.into_iter().map(|v| q(v, 1)).collect(), rel, q(b, 4))),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn feasibility_agrees_with_vertex_enumeration(system in small_system()) {
            let result = solve_feasibility(&system);
            let oracle = vertex_oracle(&system);
            prop_assert_eq!(result.solution.is_some(), oracle.is_some());
            if let Some(pi) = result.solution {
                prop_assert!(system.is_satisfied_by(&pi));
                prop_assert!(pi.iter().filter(|v| !num_traits::Zero::is_zero(*v)).count() <= system.num_rows());
            }
        }

        #[test]
        fn optimum_is_no_worse_than_any_vertex(system in small_system(), c in prop::collection::vec(-3i64..=3, 6)) {
            let c: Vec<Rational> = c.into_iter().take(system.num_points()).map(|v| q(v, 1)).collect();
            let best = optimize(&system, &c, Sense::Maximize).unwrap().solution;
            match (best, vertex_oracle(&system)) {
                (None, None) => {}
                (Some((x, value)), Some(v)) => {
                    prop_assert!(system.is_satisfied_by(&x));
                    prop_assert!(value >= dot(&c, &v));
                }
                (a, b) => prop_assert!(false, "disagreement {:?} vs {:?}", a, b),
            }
        }
    }
}

//! Column generation for PSAT.
//!
//! Certain formulas (`P(φ) = 1`, `P(φ) >= 1`) and impossible ones
//! (`P(φ) = 0`, `P(φ) <= 0`) become hard clauses of the pricing SAT problem
//! instead of matrix rows. Each remaining row `i` gets a literal `L_i ⇔ φ_i`.
//! Pricing looks for a model maximizing `y · a(v)` by branching on the `L_i`
//! in order of decreasing `|y_i|`, pruning with an optimistic bound and with
//! SAT calls under the partial assignment.

use std::collections::HashMap;

use crate::error::Result;
use crate::sat::{Lit, Solver, Valuation};
use crate::scalar::Scalar;
use crate::simplex::{
    minimize_with_pricing, upper_triangular, Basis, Column, ColumnLabel, PricingOracle, PricingState, PricingStatus,
    Relation,
};

use super::formula::tseitin;
use super::{PsatInstance, PsatOutcome, PsatStats, PsatVerdict, PsatWitness};

/// Pricing oracle over the valuations of a PSAT instance.
pub struct PsatPricer<T> {
    solver: Solver,
    atoms: usize,
    /// Constraint index of each non-normalization LP row, bounds descending.
    rows: Vec<usize>,
    relations: Vec<Relation>,
    bounds: Vec<T>,
    indicators: Vec<Lit>,
    next_label: usize,
    valuations: HashMap<ColumnLabel, Valuation>,
    sat_calls: u64,
}

impl<T: Scalar> PsatPricer<T> {
    pub fn new(instance: &PsatInstance<T>) -> Self {
        let atoms = instance.num_atoms();
        let mut solver = Solver::new(atoms);
        let mut kept = Vec::new();
        for (i, (c, f)) in instance.constraints().iter().zip(instance.resolved()).enumerate() {
            let lit = tseitin(f, &mut solver, &|a| a as Lit + 1);
            if c.is_certain() {
                solver.add_clause(&[lit]);
            } else if c.is_impossible() {
                solver.add_clause(&[-lit]);
            } else {
                kept.push((i, lit));
            }
        }
        kept.sort_by(|a, b| {
            instance.constraints()[b.0]
                .bound
                .cmp(&instance.constraints()[a.0].bound)
        });
        let constraints = instance.constraints();
        Self {
            solver,
            atoms,
            rows: kept.iter().map(|k| k.0).collect(),
            relations: kept.iter().map(|k| constraints[k.0].relation).collect(),
            bounds: kept.iter().map(|k| constraints[k.0].bound.clone()).collect(),
            indicators: kept.iter().map(|k| k.1).collect(),
            next_label: 0,
            valuations: HashMap::new(),
            sat_calls: 0,
        }
    }

    /// Constraint indices of the LP rows after the normalization row.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Right-hand side: 1 followed by the row bounds.
    pub fn rhs(&self) -> Vec<T> {
        std::iter::once(T::one()).chain(self.bounds.iter().cloned()).collect()
    }

    pub fn sat_calls(&self) -> u64 {
        self.sat_calls
    }

    pub fn sat_decisions(&self) -> u64 {
        self.solver.stats.decisions
    }

    pub fn valuation(&self, label: ColumnLabel) -> Option<&Valuation> {
        self.valuations.get(&label)
    }

    fn solve(&mut self, assumptions: &[Lit]) -> Option<Valuation> {
        self.sat_calls += 1;
        self.solver
            .solve(assumptions)
            .map(|m| Valuation(m.0[..self.atoms].to_vec()))
    }

    /// Some valuation of the hard clauses, if any.
    pub fn any_model(&mut self) -> Option<Valuation> {
        self.solve(&[])
    }

    /// A valuation whose row pattern is exactly `pattern`, if one exists.
    pub fn realize(&mut self, pattern: &[bool]) -> Option<Valuation> {
        let assumptions: Vec<Lit> = self
            .indicators
            .iter()
            .zip(pattern)
            .map(|(&l, &b)| if b { l } else { -l })
            .collect();
        self.solve(&assumptions)
    }

    /// A valuation `v` of the hard clauses with `duals · a(v) > 0`, where
    /// `a(v)` is the LP column of `v`.
    pub fn improving_valuation(&mut self, instance: &PsatInstance<T>, duals: &[T]) -> Option<Valuation> {
        let mut order: Vec<usize> = (0..self.rows.len()).filter(|&r| !duals[r + 1].is_zero()).collect();
        order.sort_by(|&a, &b| duals[b + 1].abs().cmp(&duals[a + 1].abs()));
        // optimistic[k] = Σ_{j ≥ k} max(y_j, 0) over the branching order
        let mut optimistic = vec![T::zero(); order.len() + 1];
        for k in (0..order.len()).rev() {
            let y = &duals[order[k] + 1];
            optimistic[k] = optimistic[k + 1].clone() + if y.is_positive() { y.clone() } else { T::zero() };
        }
        let mut assumptions = Vec::new();
        self.branch(
            instance,
            duals,
            &order,
            &optimistic,
            0,
            duals[0].clone(),
            &mut assumptions,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn branch(
        &mut self,
        instance: &PsatInstance<T>,
        duals: &[T],
        order: &[usize],
        optimistic: &[T],
        depth: usize,
        fixed: T,
        assumptions: &mut Vec<Lit>,
    ) -> Option<Valuation> {
        if !(fixed.clone() + optimistic[depth].clone()).is_positive() {
            return None;
        }
        let model = self.solve(assumptions)?;
        if self.score(instance, duals, &model).is_positive() {
            return Some(model);
        }
        if depth == order.len() {
            return None;
        }
        let row = order[depth];
        let y = duals[row + 1].clone();
        let lit = self.indicators[row];
        let preferred = [y.is_positive(), !y.is_positive()];
        for value in preferred {
            assumptions.push(if value { lit } else { -lit });
            let gained = if value {
                fixed.clone() + y.clone()
            } else {
                fixed.clone()
            };
            let found = self.branch(instance, duals, order, optimistic, depth + 1, gained, assumptions);
            assumptions.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn score(&self, instance: &PsatInstance<T>, duals: &[T], valuation: &Valuation) -> T {
        let truth = instance.pattern(valuation);
        self.rows
            .iter()
            .zip(&duals[1..])
            .filter(|(&i, _)| truth[i])
            .fold(duals[0].clone(), |acc, (_, y)| acc + y.clone())
    }

    fn column_entries(&self, instance: &PsatInstance<T>, valuation: &Valuation) -> Vec<T> {
        let truth = instance.pattern(valuation);
        std::iter::once(T::one())
            .chain(self.rows.iter().map(|&i| if truth[i] { T::one() } else { T::zero() }))
            .collect()
    }
}

/// Binds a pricer to its instance for use with the simplex engine.
struct Bound<'a, T> {
    pricer: PsatPricer<T>,
    instance: &'a PsatInstance<T>,
}

impl<T: Scalar> PricingOracle<T> for Bound<'_, T> {
    fn price(&mut self, state: &PricingState<'_, T>) -> Result<Option<Column<T>>> {
        let m = self.pricer.rows.len() + 1;
        // slack and surplus columns first
        for (r, relation) in self.pricer.relations.iter().enumerate() {
            let sign = match relation {
                Relation::Le => T::one(),
                Relation::Ge => -T::one(),
                Relation::Eq => continue,
            };
            let label = ColumnLabel::Slack(r + 1);
            if state.basis.contains(label) {
                continue;
            }
            let mut entries = vec![T::zero(); m];
            entries[r + 1] = sign;
            let column = Column::new(label, entries, T::zero());
            if state.reduced_cost(&column).is_negative() {
                return Ok(Some(column));
            }
        }
        let Some(valuation) = self.pricer.improving_valuation(self.instance, state.duals) else {
            return Ok(None);
        };
        let label = ColumnLabel::Generated(self.pricer.next_label);
        self.pricer.next_label += 1;
        let entries = self.pricer.column_entries(self.instance, &valuation);
        self.pricer.valuations.insert(label, valuation);
        Ok(Some(Column::new(label, entries, T::zero())))
    }
}

pub(super) fn solve<T: Scalar>(instance: &PsatInstance<T>, max_iterations: usize) -> Result<PsatOutcome<T>> {
    let mut pricer = PsatPricer::new(instance);
    let unsat = |pricer: &PsatPricer<T>, lp_pivots: usize, oracle_calls: usize| PsatOutcome {
        verdict: PsatVerdict::Unsatisfiable,
        stats: PsatStats {
            lp_pivots,
            sat_calls: pricer.sat_calls(),
            sat_decisions: pricer.sat_decisions(),
            oracle_calls,
            columns: pricer.valuations.len(),
        },
    };
    if pricer.any_model().is_none() {
        return Ok(unsat(&pricer, 0, 0));
    }
    let rhs = pricer.rhs();
    let m = rhs.len();
    let mut columns = Vec::with_capacity(m);
    for (j, entries) in upper_triangular::<T>(m).into_iter().enumerate() {
        let pattern: Vec<bool> = entries[1..].iter().map(|v| v.is_one()).collect();
        let label = ColumnLabel::Initial(j);
        let cost = match pricer.realize(&pattern) {
            Some(v) => {
                pricer.valuations.insert(label, v);
                T::zero()
            }
            None => T::one(),
        };
        columns.push(Column::new(label, entries, cost));
    }
    let basis = Basis::new(columns, rhs)?;
    let mut oracle = Bound { pricer, instance };
    let outcome = minimize_with_pricing(basis, &mut oracle, max_iterations)?;
    let pricer = oracle.pricer;
    let pivots = outcome.basis.pivots();
    if outcome.status == PricingStatus::NoImprovingColumn {
        return Ok(unsat(&pricer, pivots, outcome.oracle_calls));
    }
    let mut valuations = Vec::new();
    let mut probabilities: Vec<T> = Vec::new();
    for (column, p) in outcome.basis.columns().iter().zip(outcome.basis.solution()) {
        if !p.is_positive() {
            continue;
        }
        let Some(v) = pricer.valuation(column.label) else {
            // slack mass is not probability mass
            continue;
        };
        match valuations.iter().position(|w| w == v) {
            Some(k) => probabilities[k] = probabilities[k].clone() + p.clone(),
            None => {
                valuations.push(v.clone());
                probabilities.push(p.clone());
            }
        }
    }
    Ok(PsatOutcome {
        verdict: PsatVerdict::Satisfiable(PsatWitness {
            valuations,
            probabilities,
        }),
        stats: PsatStats {
            lp_pivots: pivots,
            sat_calls: pricer.sat_calls(),
            sat_decisions: pricer.sat_decisions(),
            oracle_calls: outcome.oracle_calls,
            columns: pricer.valuations.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psat::parse_constraints;
    use crate::simplex::tests::q;
    use crate::Rational;

    fn instance(text: &str) -> PsatInstance<Rational> {
        PsatInstance::from_constraints(parse_constraints(text).unwrap()).unwrap()
    }

    #[test]
    fn single_atom_pricing_follows_the_duals() {
        let inst = instance("P(x) = 0.5");
        let mut pricer = PsatPricer::new(&inst);
        assert_eq!(pricer.rows(), &[0]);
        let v = pricer.improving_valuation(&inst, &[q(-1, 1), q(2, 1)]).unwrap();
        assert_eq!(v.0, vec![true]);
        let v = pricer.improving_valuation(&inst, &[q(1, 1), q(-2, 1)]).unwrap();
        assert_eq!(v.0, vec![false]);
        assert_eq!(pricer.improving_valuation(&inst, &[q(0, 1), q(-1, 1)]), None);
    }

    #[test]
    fn unsatisfiable_certainty_yields_nothing() {
        let inst = instance("P(x & !x) = 1\nP(y) >= 0.5");
        let mut pricer = PsatPricer::new(&inst);
        assert_eq!(pricer.any_model(), None);
        assert_eq!(pricer.improving_valuation(&inst, &[q(1, 1), q(1, 1)]), None);
    }

    #[test]
    fn certain_rows_are_folded() {
        let inst = instance("P(x | y) = 1\nP(x) <= 0.25\nP(y) = 0\nP(x) >= 0.1");
        let pricer = PsatPricer::new(&inst);
        assert_eq!(pricer.rows(), &[1, 3]);
        assert_eq!(pricer.rhs(), vec![q(1, 1), q(1, 4), q(1, 10)]);
        // x | y certain and y impossible force x everywhere, contradicting P(x) <= 1/4
        let out = solve(&inst, 1000).unwrap();
        assert_eq!(out.verdict, PsatVerdict::Unsatisfiable);
    }

    #[test]
    fn generated_witness_is_small_and_valid() {
        let inst = instance("P(a & b) >= 0.3\nP(a -> c) = 0.6\nP(!b | c) <= 0.7\nP(c) = 0.5");
        let out = solve(&inst, 1000).unwrap();
        let PsatVerdict::Satisfiable(w) = out.verdict else {
            panic!("expected satisfiable")
        };
        assert!(inst.check_witness(&w));
        assert!(w.valuations.len() <= 5);
        assert!(out.stats.oracle_calls > 0);
    }
}

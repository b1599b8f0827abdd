//! Probabilistic satisfiability: is there a distribution over valuations of
//! the atoms under which every formula has probability in its bound?
//!
//! Two strategies are provided. [`PsatStrategy::Enumerate`] builds the full
//! matrix over distinct truth patterns and solves it directly;
//! [`PsatStrategy::ColumnGeneration`] prices valuations on demand with the SAT
//! solver.

mod cg;
mod formula;

pub use cg::PsatPricer;
pub use formula::{parse_formula, parse_formula_at, tseitin, Formula};

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sat::Valuation;
use crate::scalar::{parse_rational, Scalar};
use crate::simplex::{solve_feasibility, ConstraintSystem, Relation};

pub const DEFAULT_ATOM_CAP: usize = 20;

/// `P(formula) relation bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProbConstraint<T> {
    pub formula: Formula,
    pub relation: Relation,
    pub bound: T,
}

impl<T: Scalar> ProbConstraint<T> {
    pub fn new(formula: Formula, relation: Relation, bound: T) -> Result<Self> {
        if bound.is_negative() || bound > T::one() {
            return Err(Error::InvalidConstraint(format!("bound {bound} is outside [0, 1]")));
        }
        Ok(Self {
            formula,
            relation,
            bound,
        })
    }

    /// Holds with probability one at every positive-mass point.
    pub fn is_certain(&self) -> bool {
        self.bound.is_one() && matches!(self.relation, Relation::Eq | Relation::Ge)
    }

    /// Holds with probability zero at every positive-mass point.
    pub fn is_impossible(&self) -> bool {
        self.bound.is_zero() && matches!(self.relation, Relation::Eq | Relation::Le)
    }

    pub fn is_satisfied_by(&self, probability: &T) -> bool {
        self.relation.holds(probability, &self.bound)
    }
}

impl<T: fmt::Display> fmt::Display for ProbConstraint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({}) {} {}", self.formula, self.relation, self.bound)
    }
}

/// Parses lines `P(<formula>) <=|>=|= <rational>`; blank lines and `#`
/// comments are ignored.
pub fn parse_constraints<T: Scalar>(text: &str) -> Result<Vec<ProbConstraint<T>>> {
    let mut out = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let offset = content.len() - trimmed.len();
        let col = |byte: usize| raw[..offset + byte].chars().count() + 1;
        let syntax = |byte: usize, message: String| Error::Syntax {
            line,
            column: col(byte),
            message,
        };
        let body = trimmed
            .strip_prefix("P(")
            .ok_or_else(|| syntax(0, "expected 'P(' at start of constraint".into()))?;
        let mut depth = 1usize;
        let close = body
            .char_indices()
            .find(|&(_, c)| {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    _ => {}
                }
                depth == 0
            })
            .map(|(i, _)| i)
            .ok_or_else(|| syntax(trimmed.trim_end().len(), "unbalanced parentheses".into()))?;
        let formula = parse_formula_at(&body[..close], line, col(2))?;
        let rest_start = 2 + close + 1;
        let rest = &trimmed[rest_start..];
        let op_start = rest_start + (rest.len() - rest.trim_start().len());
        let rest = rest.trim();
        let (relation, bound_text) = if let Some(b) = rest.strip_prefix("<=") {
            (Relation::Le, b)
        } else if let Some(b) = rest.strip_prefix(">=") {
            (Relation::Ge, b)
        } else if let Some(b) = rest.strip_prefix('=') {
            (Relation::Eq, b)
        } else if rest.starts_with('<') || rest.starts_with('>') {
            return Err(syntax(op_start, "strict inequalities are not supported".into()));
        } else {
            return Err(syntax(op_start, "expected '<=', '>=' or '='".into()));
        };
        let bound_start = op_start + (rest.len() - bound_text.trim_start().len());
        let bound = parse_rational(bound_text)
            .and_then(|r| T::from_rational(&r))
            .ok_or_else(|| syntax(bound_start, format!("invalid probability {:?}", bound_text.trim())))?;
        let constraint = ProbConstraint::new(formula, relation, bound).map_err(|e| match e {
            Error::InvalidConstraint(m) => syntax(bound_start, m),
            other => other,
        })?;
        out.push(constraint);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsatInstance<T> {
    atoms: Vec<String>,
    atom_index: HashMap<String, usize>,
    constraints: Vec<ProbConstraint<T>>,
    resolved: Vec<Formula<usize>>,
}

impl<T: Scalar> PsatInstance<T> {
    /// Every formula must only mention declared atoms.
    pub fn new(atoms: Vec<String>, constraints: Vec<ProbConstraint<T>>) -> Result<Self> {
        let mut atom_index = HashMap::new();
        for (i, a) in atoms.iter().enumerate() {
            if atom_index.insert(a.clone(), i).is_some() {
                return Err(Error::InvalidConstraint(format!("atom {a} declared twice")));
            }
        }
        for c in &constraints {
            if c.bound.is_negative() || c.bound > T::one() {
                return Err(Error::InvalidConstraint(format!("bound {} is outside [0, 1]", c.bound)));
            }
        }
        let resolved = constraints
            .iter()
            .map(|c| c.formula.resolve(&|a| atom_index.get(a).copied()))
            .collect::<Result<_>>()?;
        Ok(Self {
            atoms,
            atom_index,
            constraints,
            resolved,
        })
    }

    /// Declares the atoms of the constraints in order of first occurrence.
    pub fn from_constraints(constraints: Vec<ProbConstraint<T>>) -> Result<Self> {
        let mut atoms: Vec<String> = Vec::new();
        for c in &constraints {
            for a in c.formula.atoms() {
                if !atoms.contains(a) {
                    atoms.push(a.clone());
                }
            }
        }
        Self::new(atoms, constraints)
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atom_index.get(name).copied()
    }

    pub fn constraints(&self) -> &[ProbConstraint<T>] {
        &self.constraints
    }

    pub(crate) fn resolved(&self) -> &[Formula<usize>] {
        &self.resolved
    }

    /// Truth value of each constraint formula under `valuation`.
    pub fn pattern(&self, valuation: &Valuation) -> Vec<bool> {
        self.resolved.iter().map(|f| f.eval_indexed(&valuation.0)).collect()
    }

    /// Matrix column of `valuation`: the normalization entry, then one 0/1
    /// entry per constraint.
    pub fn column(&self, valuation: &Valuation) -> Vec<T> {
        std::iter::once(T::one())
            .chain(
                self.pattern(valuation)
                    .into_iter()
                    .map(|b| if b { T::one() } else { T::zero() }),
            )
            .collect()
    }

    /// The system over the given valuations, one row per constraint after
    /// the normalization row.
    pub fn build_system(&self, valuations: &[Valuation]) -> ConstraintSystem<T> {
        let columns: Vec<Vec<T>> = valuations.iter().map(|v| self.column(v)).collect();
        ConstraintSystem::with_normalization(
            valuations.len(),
            self.constraints.iter().enumerate().map(|(i, c)| {
                (
                    columns.iter().map(|col| col[i + 1].clone()).collect(),
                    c.relation,
                    c.bound.clone(),
                )
            }),
        )
        .expect("rows are built to size")
    }

    /// Probability of `formula` under a distribution over valuations.
    pub fn probability(&self, formula: &Formula<usize>, witness: &PsatWitness<T>) -> T {
        witness
            .valuations
            .iter()
            .zip(&witness.probabilities)
            .filter(|(v, _)| formula.eval_indexed(&v.0))
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// Re-evaluates every constraint against `witness`.
    pub fn check_witness(&self, witness: &PsatWitness<T>) -> bool {
        let total = witness.probabilities.iter().fold(T::zero(), |a, p| a + p.clone());
        witness.valuations.len() == witness.probabilities.len()
            && witness.valuations.iter().all(|v| v.0.len() == self.num_atoms())
            && witness.probabilities.iter().all(|p| p.is_positive())
            && total.is_one()
            && self
                .resolved
                .iter()
                .zip(&self.constraints)
                .all(|(f, c)| c.is_satisfied_by(&self.probability(f, witness)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsatStrategy {
    Enumerate,
    ColumnGeneration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsatOptions {
    /// Atom limit for [`PsatStrategy::Enumerate`].
    pub atom_cap: usize,
    /// Pricing rounds allowed for [`PsatStrategy::ColumnGeneration`].
    pub max_iterations: usize,
}

impl Default for PsatOptions {
    fn default() -> Self {
        Self {
            atom_cap: DEFAULT_ATOM_CAP,
            max_iterations: 100_000,
        }
    }
}

/// Distribution over valuations with strictly positive probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsatWitness<T> {
    pub valuations: Vec<Valuation>,
    pub probabilities: Vec<T>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PsatStats {
    pub lp_pivots: usize,
    pub sat_calls: u64,
    pub sat_decisions: u64,
    pub oracle_calls: usize,
    pub columns: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsatVerdict<T> {
    Satisfiable(PsatWitness<T>),
    Unsatisfiable,
}

impl<T> PsatVerdict<T> {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, PsatVerdict::Satisfiable(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsatOutcome<T> {
    pub verdict: PsatVerdict<T>,
    pub stats: PsatStats,
}

pub fn psat_satisfiable<T: Scalar>(
    instance: &PsatInstance<T>,
    strategy: PsatStrategy,
    options: &PsatOptions,
) -> Result<PsatOutcome<T>> {
    match strategy {
        PsatStrategy::Enumerate => enumerate(instance, options.atom_cap),
        PsatStrategy::ColumnGeneration => cg::solve(instance, options.max_iterations),
    }
}

fn enumerate<T: Scalar>(instance: &PsatInstance<T>, cap: usize) -> Result<PsatOutcome<T>> {
    let n = instance.num_atoms();
    if n > cap {
        return Err(Error::AtomCap { atoms: n, cap });
    }
    // valuations with equal truth patterns give identical columns, and a
    // valuation that falsifies a certain constraint (or satisfies an
    // impossible one) has zero mass in every solution
    let forced: Vec<Option<bool>> = instance
        .constraints
        .iter()
        .map(|c| {
            if c.is_certain() {
                Some(true)
            } else if c.is_impossible() {
                Some(false)
            } else {
                None
            }
        })
        .collect();
    let mut seen: HashMap<Vec<bool>, ()> = HashMap::new();
    let mut valuations = Vec::new();
    for bits in 0u64..1 << n {
        let v = Valuation((0..n).map(|i| bits >> i & 1 == 1).collect());
        let pattern = instance.pattern(&v);
        let admissible = pattern.iter().zip(&forced).all(|(b, f)| f.is_none_or(|f| *b == f));
        if admissible && seen.insert(pattern, ()).is_none() {
            valuations.push(v);
        }
    }
    let system = instance.build_system(&valuations);
    let result = solve_feasibility(&system);
    let stats = PsatStats {
        lp_pivots: result.pivots,
        columns: valuations.len(),
        ..PsatStats::default()
    };
    let verdict = match result.solution {
        None => PsatVerdict::Unsatisfiable,
        Some(pi) => {
            let (valuations, probabilities) = valuations.into_iter().zip(pi).filter(|(_, p)| p.is_positive()).unzip();
            PsatVerdict::Satisfiable(PsatWitness {
                valuations,
                probabilities,
            })
        }
    };
    Ok(PsatOutcome { verdict, stats })
}

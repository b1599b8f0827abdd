//! Observable games and the coherence decision for pure equilibria.
//!
//! Constraints are coherent when some probability distribution over the
//! game's equilibria gives every constraint formula a probability within its
//! bound. The direct path enumerates equilibria and solves the resulting
//! linear system; the PSAT paths reduce the question to probabilistic
//! satisfiability over action atoms with `P(φ_G) = 1`, where `φ_G` is the
//! equilibrium CNF of the game.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game};
use crate::psat::{psat_satisfiable, Formula, ProbConstraint, PsatInstance, PsatOptions, PsatStrategy, PsatVerdict};
use crate::pure::{enumerate_pure_equilibria, DEFAULT_PROFILE_CAP};
use crate::sat::{decode_model, encode_game, sat_solve, CnfEncoding};
use crate::scalar::Scalar;
use crate::simplex::{solve_feasibility, ConstraintSystem, Relation};

/// A probability constraint whose atoms are action identifiers.
pub type PceConstraint<T> = ProbConstraint<T>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pure,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherencePath {
    /// Enumerate equilibria and solve the system directly.
    Direct,
    /// Reduce to PSAT and solve over all valuations.
    Psat,
    /// Column generation: PSAT pricing in pure mode, equilibrium pricing in
    /// mixed mode.
    Cg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableGame<T> {
    pub game: Game<T>,
    pub constraints: Vec<PceConstraint<T>>,
    pub mode: Mode,
}

impl<T: Scalar> ObservableGame<T> {
    /// Checks that every atom names an action of `game`.
    pub fn new(game: Game<T>, constraints: Vec<PceConstraint<T>>, mode: Mode) -> Result<Self> {
        for c in &constraints {
            if let Some(a) = c.formula.atoms().into_iter().find(|a| game.action_owner(a).is_none()) {
                return Err(Error::UnknownAtom(a.clone()));
            }
        }
        Ok(Self {
            game,
            constraints,
            mode,
        })
    }

    /// A copy with one more constraint.
    pub fn with_constraint(&self, constraint: PceConstraint<T>) -> Result<Self> {
        let mut constraints = self.constraints.clone();
        constraints.push(constraint);
        Self::new(self.game.clone(), constraints, self.mode)
    }
}

/// A distribution over equilibria with strictly positive probabilities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoherenceWitness<T, E> {
    pub support: Vec<E>,
    pub probabilities: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<T, E> {
    Coherent(CoherenceWitness<T, E>),
    Incoherent,
    NoEquilibrium,
}

impl<T, E> Verdict<T, E> {
    pub fn is_coherent(&self) -> bool {
        matches!(self, Verdict::Coherent(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Coherent(_) => "coherent",
            Verdict::Incoherent => "incoherent",
            Verdict::NoEquilibrium => "no-equilibrium",
        }
    }

    pub fn witness(&self) -> Option<&CoherenceWitness<T, E>> {
        match self {
            Verdict::Coherent(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoherenceStats {
    /// Equilibria enumerated, when the path enumerates them.
    pub equilibria: Option<usize>,
    pub lp_pivots: usize,
    pub sat_calls: u64,
    pub sat_decisions: u64,
    pub oracle_calls: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceReport<T, E> {
    pub verdict: Verdict<T, E>,
    pub stats: CoherenceStats,
}

pub type PureReport<T> = CoherenceReport<T, ActionProfile>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceOptions {
    pub profile_cap: u128,
    pub psat: PsatOptions,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        Self {
            profile_cap: DEFAULT_PROFILE_CAP,
            psat: PsatOptions::default(),
        }
    }
}

/// Truth of `formula` at a pure profile: an atom holds iff its action is
/// played.
pub fn holds_at<T: Scalar>(game: &Game<T>, profile: &ActionProfile, formula: &Formula) -> Result<bool> {
    let resolved = formula.resolve(&|a| game.action_owner(a).map(|(p, i)| flat(game, p, i)))?;
    let mut played = vec![false; total_actions(game)];
    for (p, &a) in profile.0.iter().enumerate() {
        played[flat(game, p, a)] = true;
    }
    Ok(resolved.eval_indexed(&played))
}

fn total_actions<T: Scalar>(game: &Game<T>) -> usize {
    (0..game.num_players()).map(|p| game.num_actions(p)).sum()
}

fn flat<T: Scalar>(game: &Game<T>, player: usize, action: usize) -> usize {
    (0..player).map(|p| game.num_actions(p)).sum::<usize>() + action
}

/// `P(formula)` under a witness over pure equilibria.
pub fn action_probability<T: Scalar>(
    game: &Game<T>,
    witness: &CoherenceWitness<T, ActionProfile>,
    formula: &Formula,
) -> Result<T> {
    let mut total = T::zero();
    for (e, p) in witness.support.iter().zip(&witness.probabilities) {
        if holds_at(game, e, formula)? {
            total = total + p.clone();
        }
    }
    Ok(total)
}

/// Whether every constraint holds exactly under the witness and the witness
/// is a distribution over equilibria of the game.
pub fn check_pure_witness<T: Scalar>(
    observable: &ObservableGame<T>,
    witness: &CoherenceWitness<T, ActionProfile>,
) -> Result<bool> {
    let total = witness.probabilities.iter().fold(T::zero(), |a, p| a + p.clone());
    if !total.is_one() || witness.probabilities.iter().any(|p| !p.is_positive()) {
        return Ok(false);
    }
    for e in &witness.support {
        if !crate::pure::is_pure_equilibrium(&observable.game, e)? {
            return Ok(false);
        }
    }
    for c in &observable.constraints {
        if !c.is_satisfied_by(&action_probability(&observable.game, witness, &c.formula)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The normalization row followed by one 0/1 row per constraint, in
/// constraint order, over the given equilibria.
pub fn build_pure_system<T: Scalar>(
    observable: &ObservableGame<T>,
    equilibria: &[ActionProfile],
) -> Result<ConstraintSystem<T>> {
    let mut rows = Vec::with_capacity(observable.constraints.len());
    for c in &observable.constraints {
        let row = equilibria
            .iter()
            .map(|e| holds_at(&observable.game, e, &c.formula).map(|b| if b { T::one() } else { T::zero() }))
            .collect::<Result<Vec<T>>>()?;
        rows.push((row, c.relation, c.bound.clone()));
    }
    ConstraintSystem::with_normalization(equilibria.len(), rows)
}

/// Decides coherence over a known equilibrium list.
pub fn decide_over_equilibria<T: Scalar>(
    observable: &ObservableGame<T>,
    equilibria: &[ActionProfile],
) -> Result<PureReport<T>> {
    let mut stats = CoherenceStats {
        equilibria: Some(equilibria.len()),
        ..CoherenceStats::default()
    };
    if equilibria.is_empty() {
        return Ok(CoherenceReport {
            verdict: Verdict::NoEquilibrium,
            stats,
        });
    }
    let system = build_pure_system(observable, equilibria)?;
    let result = solve_feasibility(&system);
    stats.lp_pivots = result.pivots;
    let verdict = match result.solution {
        None => Verdict::Incoherent,
        Some(pi) => {
            let (support, probabilities) = equilibria
                .iter()
                .cloned()
                .zip(pi)
                .filter(|(_, p)| p.is_positive())
                .unzip();
            Verdict::Coherent(CoherenceWitness { support, probabilities })
        }
    };
    Ok(CoherenceReport { verdict, stats })
}

/// `Π ∪ {P(φ_G) = 1}` over all action atoms, with `φ_G` the conjunction of
/// the equilibrium clauses.
pub fn reduce_to_psat<T: Scalar>(observable: &ObservableGame<T>) -> Result<PsatInstance<T>> {
    let encoding = encode_game(&observable.game);
    let phi = equilibrium_formula(&observable.game, &encoding)
        .ok_or_else(|| Error::InvalidGame("game has no players".into()))?;
    let mut constraints = observable.constraints.clone();
    constraints.push(ProbConstraint::new(phi, Relation::Eq, T::one())?);
    PsatInstance::new(observable.game.all_actions(), constraints)
}

fn equilibrium_formula<T: Scalar>(game: &Game<T>, encoding: &CnfEncoding) -> Option<Formula> {
    let literal = |l: i32| {
        let (p, a) = encoding.decode_var(l.unsigned_abs() as usize);
        let atom = Formula::atom(game.action_id(p, a));
        if l < 0 {
            atom.negate()
        } else {
            atom
        }
    };
    Formula::conjunction(
        encoding
            .clauses()
            .iter()
            .map(|c| Formula::disjunction(c.literals.iter().map(|&l| literal(l))).expect("clauses are nonempty")),
    )
}

pub fn decide_pure_coherence<T: Scalar>(
    observable: &ObservableGame<T>,
    path: CoherencePath,
    options: &CoherenceOptions,
) -> Result<PureReport<T>> {
    if observable.mode != Mode::Pure {
        return Err(Error::Unsupported(
            "pure coherence requires a pure-mode observable game".into(),
        ));
    }
    match path {
        CoherencePath::Direct => {
            let equilibria = enumerate_pure_equilibria(&observable.game, options.profile_cap)?;
            decide_over_equilibria(observable, &equilibria.profiles)
        }
        CoherencePath::Psat => decide_via_psat(observable, PsatStrategy::Enumerate, options),
        CoherencePath::Cg => decide_via_psat(observable, PsatStrategy::ColumnGeneration, options),
    }
}

fn decide_via_psat<T: Scalar>(
    observable: &ObservableGame<T>,
    strategy: PsatStrategy,
    options: &CoherenceOptions,
) -> Result<PureReport<T>> {
    let encoding = encode_game(&observable.game);
    let (model, sat_stats) = sat_solve(&encoding, &[]);
    let mut stats = CoherenceStats {
        sat_calls: 1,
        sat_decisions: sat_stats.decisions,
        ..CoherenceStats::default()
    };
    if model.is_none() {
        return Ok(CoherenceReport {
            verdict: Verdict::NoEquilibrium,
            stats,
        });
    }
    let instance = reduce_to_psat(observable)?;
    let outcome = psat_satisfiable(&instance, strategy, &options.psat)?;
    stats.lp_pivots = outcome.stats.lp_pivots;
    stats.sat_calls += outcome.stats.sat_calls;
    stats.sat_decisions += outcome.stats.sat_decisions;
    stats.oracle_calls = outcome.stats.oracle_calls;
    let verdict = match outcome.verdict {
        PsatVerdict::Unsatisfiable => Verdict::Incoherent,
        PsatVerdict::Satisfiable(w) => {
            let mut support = Vec::with_capacity(w.valuations.len());
            for v in &w.valuations {
                support.push(decode_model(&encoding, v)?);
            }
            Verdict::Coherent(CoherenceWitness {
                support,
                probabilities: w.probabilities,
            })
        }
    };
    Ok(CoherenceReport { verdict, stats })
}

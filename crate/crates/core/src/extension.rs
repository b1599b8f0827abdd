//! Tightest coherent bounds on the probability of a target formula.
//!
//! [`extension_exact`] optimizes over the equilibrium pool with the simplex
//! method. [`extension_binary_search`] only asks a coherence oracle yes/no
//! questions: it first probes certainty, then halves the remaining interval
//! `k` times for a precision of `2^-k`.

use serde::Serialize;

use crate::coherence::{
    build_pure_system, decide_over_equilibria, holds_at, CoherenceOptions, CoherencePath, CoherenceWitness, Mode,
    ObservableGame, PceConstraint,
};
use crate::error::{Error, Result};
use crate::game::ActionProfile;
use crate::mixed::{
    build_mixed_system, decide_over_pool, enumerate_mixed_equilibria_2p, MixedEquilibria, MixedProfile,
};
use crate::psat::Formula;
use crate::pure::enumerate_pure_equilibria;
use crate::scalar::{dyadic, Scalar};
use crate::simplex::{optimize, Relation, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionQuery {
    pub target: Formula,
    pub direction: Direction,
    /// Precision `ε = 2^-k`; must be at least 1.
    pub epsilon_exponent: u32,
}

impl ExtensionQuery {
    pub fn new(target: Formula, direction: Direction, epsilon_exponent: u32) -> Result<Self> {
        if epsilon_exponent == 0 {
            return Err(Error::InvalidPrecision("epsilon must be 2^-k with k >= 1".into()));
        }
        Ok(Self {
            target,
            direction,
            epsilon_exponent,
        })
    }

    pub fn epsilon<T: Scalar>(&self) -> T {
        dyadic(self.epsilon_exponent)
    }
}

/// Parses `2^-k`, returning `k`.
pub fn parse_epsilon(text: &str) -> Result<u32> {
    let k = text
        .trim()
        .strip_prefix("2^-")
        .and_then(|k| k.parse::<u32>().ok())
        .filter(|&k| k >= 1)
        .ok_or_else(|| Error::InvalidPrecision(format!("expected 2^-k with k >= 1, found {text:?}")))?;
    Ok(k)
}

/// Equilibria of the game, computed once and shared by every probe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquilibriumPool<T> {
    Pure(Vec<ActionProfile>),
    Mixed(MixedEquilibria<T>),
}

impl<T: Scalar> EquilibriumPool<T> {
    pub fn compute(observable: &ObservableGame<T>, options: &CoherenceOptions) -> Result<Self> {
        Ok(match observable.mode {
            Mode::Pure => Self::Pure(enumerate_pure_equilibria(&observable.game, options.profile_cap)?.profiles),
            Mode::Mixed => Self::Mixed(enumerate_mixed_equilibria_2p(&observable.game)?),
        })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Pure(p) => p.len(),
            Self::Mixed(m) => m.profiles.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum EquilibriumWitness<T> {
    Pure(CoherenceWitness<T, ActionProfile>),
    Mixed(CoherenceWitness<T, MixedProfile<T>>),
}

impl<T> EquilibriumWitness<T> {
    pub fn support_len(&self) -> usize {
        match self {
            Self::Pure(w) => w.support.len(),
            Self::Mixed(w) => w.support.len(),
        }
    }
}

/// Coherence of `observable` over a fixed pool using the direct system.
pub fn decide_with_pool<T: Scalar>(
    observable: &ObservableGame<T>,
    pool: &EquilibriumPool<T>,
) -> Result<Option<EquilibriumWitness<T>>> {
    Ok(match pool {
        EquilibriumPool::Pure(eq) => decide_over_equilibria(observable, eq)?
            .verdict
            .witness()
            .cloned()
            .map(EquilibriumWitness::Pure),
        EquilibriumPool::Mixed(m) => decide_over_pool(observable, m, CoherencePath::Direct)?
            .verdict
            .witness()
            .cloned()
            .map(EquilibriumWitness::Mixed),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactExtension<T> {
    pub value: T,
    /// A witness attaining the optimum.
    pub witness: EquilibriumWitness<T>,
    pub lp_pivots: usize,
}

/// Exact optimum of `P(target)` over all coherent witnesses.
pub fn extension_exact<T: Scalar>(
    observable: &ObservableGame<T>,
    query: &ExtensionQuery,
    pool: &EquilibriumPool<T>,
) -> Result<ExactExtension<T>> {
    if decide_with_pool(observable, pool)?.is_none() {
        return Err(Error::IncoherentBase);
    }
    let sense = match query.direction {
        Direction::Max => Sense::Maximize,
        Direction::Min => Sense::Minimize,
    };
    match pool {
        EquilibriumPool::Pure(eq) => {
            let system = build_pure_system(observable, eq)?;
            let objective = eq
                .iter()
                .map(|e| holds_at(&observable.game, e, &query.target).map(|b| if b { T::one() } else { T::zero() }))
                .collect::<Result<Vec<T>>>()?;
            let optimum = optimize(&system, &objective, sense)?;
            let (pi, value) = optimum.solution.ok_or(Error::IncoherentBase)?;
            let (support, probabilities) = eq.iter().cloned().zip(pi).filter(|(_, p)| p.is_positive()).unzip();
            Ok(ExactExtension {
                value,
                witness: EquilibriumWitness::Pure(CoherenceWitness { support, probabilities }),
                lp_pivots: optimum.pivots,
            })
        }
        EquilibriumPool::Mixed(m) => {
            let Formula::Atom(name) = &query.target else {
                return Err(Error::Unsupported(format!(
                    "mixed mode only supports single-action targets, found `{}`",
                    query.target
                )));
            };
            let (player, action) = observable
                .game
                .action_owner(name)
                .ok_or_else(|| Error::UnknownAtom(name.clone()))?;
            let system = build_mixed_system(observable, &m.profiles)?;
            let objective: Vec<T> = m
                .profiles
                .iter()
                .map(|e| e.probability(player, action).clone())
                .collect();
            let optimum = optimize(&system, &objective, sense)?;
            let (pi, value) = optimum.solution.ok_or(Error::IncoherentBase)?;
            let (support, probabilities) = m
                .profiles
                .iter()
                .cloned()
                .zip(pi)
                .filter(|(_, p)| p.is_positive())
                .unzip();
            Ok(ExactExtension {
                value,
                witness: EquilibriumWitness::Mixed(CoherenceWitness { support, probabilities }),
                lp_pivots: optimum.pivots,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Probe<T> {
    /// The constraint added to the base instance.
    pub relation: Relation,
    pub value: T,
    pub coherent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinarySearchResult<T> {
    pub value: T,
    /// The optimum lies in `[lower, upper]`, with `upper - lower < ε` unless
    /// the first probe settled it exactly.
    pub lower: T,
    pub upper: T,
    pub oracle_calls: usize,
    pub probes: Vec<Probe<T>>,
    /// Witness of the last coherent probe, or of the base instance.
    pub witness: EquilibriumWitness<T>,
}

/// Binary search over `P(target) ≥ v` probes (`≤` for minimization). The
/// coherence check of the base instance is not counted as an oracle call.
pub fn extension_binary_search<T, F>(
    observable: &ObservableGame<T>,
    query: &ExtensionQuery,
    mut oracle: F,
) -> Result<BinarySearchResult<T>>
where
    T: Scalar,
    F: FnMut(&ObservableGame<T>) -> Result<Option<EquilibriumWitness<T>>>,
{
    let base = oracle(observable)?.ok_or(Error::IncoherentBase)?;
    let mut probes = Vec::new();
    let mut ask = |relation: Relation, value: T, probes: &mut Vec<Probe<T>>| -> Result<Option<EquilibriumWitness<T>>> {
        let probe = PceConstraint::new(query.target.clone(), relation, value.clone())?;
        let answer = oracle(&observable.with_constraint(probe)?)?;
        probes.push(Probe {
            relation,
            value,
            coherent: answer.is_some(),
        });
        Ok(answer)
    };
    let epsilon: T = query.epsilon();
    let (extreme, relation) = match query.direction {
        Direction::Max => (T::one(), Relation::Ge),
        Direction::Min => (T::zero(), Relation::Le),
    };
    if let Some(w) = ask(Relation::Eq, extreme.clone(), &mut probes)? {
        return Ok(BinarySearchResult {
            value: extreme.clone(),
            lower: extreme.clone(),
            upper: extreme,
            oracle_calls: probes.len(),
            probes,
            witness: w,
        });
    }
    // `accepted` is the best certified bound so far
    let mut accepted = T::one() - extreme;
    let mut witness = base;
    for j in 1..=query.epsilon_exponent {
        let step: T = dyadic(j);
        let v = match query.direction {
            Direction::Max => accepted.clone() + step,
            Direction::Min => accepted.clone() - step,
        };
        if let Some(w) = ask(relation, v.clone(), &mut probes)? {
            accepted = v;
            witness = w;
        }
    }
    let (lower, upper) = match query.direction {
        Direction::Max => (accepted.clone(), accepted.clone() + epsilon),
        Direction::Min => (accepted.clone() - epsilon, accepted.clone()),
    };
    Ok(BinarySearchResult {
        value: accepted,
        lower,
        upper,
        oracle_calls: probes.len(),
        probes,
        witness,
    })
}

/// Binary search using the direct system over `pool` as the oracle.
pub fn extension_binary_search_pooled<T: Scalar>(
    observable: &ObservableGame<T>,
    query: &ExtensionQuery,
    pool: &EquilibriumPool<T>,
) -> Result<BinarySearchResult<T>> {
    extension_binary_search(observable, query, |obs| decide_with_pool(obs, pool))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::tests::{observable, RING_OBSERVED};
    use crate::game::fixtures::*;
    use crate::psat::parse_formula;
    use crate::simplex::tests::q;
    use crate::Rational;

    fn query(target: &str, direction: Direction, k: u32) -> ExtensionQuery {
        ExtensionQuery::new(parse_formula(target).unwrap(), direction, k).unwrap()
    }

    fn pool(obs: &ObservableGame<Rational>) -> EquilibriumPool<Rational> {
        EquilibriumPool::compute(obs, &CoherenceOptions::default()).unwrap()
    }

    #[test]
    fn epsilon_parsing() {
        assert_eq!(parse_epsilon("2^-6"), Ok(6));
        assert!(parse_epsilon("2^-0").is_err());
        assert!(parse_epsilon("0.01").is_err());
        assert!(ExtensionQuery::new(Formula::atom("x"), Direction::Max, 0).is_err());
    }

    #[test]
    fn ring_b2_extension() {
        let obs = observable(ring(), "P(a2) = 0.9", Mode::Pure);
        let p = pool(&obs);
        let q6 = query("b2", Direction::Max, 6);
        assert_eq!(extension_exact(&obs, &q6, &p).unwrap().value, q(9, 10));
        let r = extension_binary_search_pooled(&obs, &q6, &p).unwrap();
        assert_eq!(r.value, q(57, 64));
        assert_eq!(r.oracle_calls, 7);
        let values: Vec<_> = r.probes.iter().map(|p| p.value.clone()).collect();
        assert_eq!(
            values,
            vec![q(1, 1), q(1, 2), q(3, 4), q(7, 8), q(15, 16), q(29, 32), q(57, 64)]
        );
        let verdicts: Vec<_> = r.probes.iter().map(|p| p.coherent).collect();
        assert_eq!(verdicts, vec![false, true, true, true, false, false, true]);
    }

    #[test]
    fn alice_bob_minimum() {
        let obs = observable(alice_bob(), "P(a2) = 1/3", Mode::Pure);
        let p = pool(&obs);
        assert_eq!(
            extension_exact(&obs, &query("b3", Direction::Min, 4), &p)
                .unwrap()
                .value,
            q(1, 3)
        );
        let r = extension_binary_search_pooled(&obs, &query("b3", Direction::Min, 4), &p).unwrap();
        assert_eq!(r.value, q(3, 8));
        assert!(r.value.clone() - q(1, 3) < q(1, 16));
        assert_eq!(r.oracle_calls, 5);
    }

    #[test]
    fn tautology_and_certain_targets() {
        let obs = observable(ring(), RING_OBSERVED, Mode::Pure);
        let p = pool(&obs);
        let t = query("a1 | !a1", Direction::Max, 3);
        assert_eq!(extension_exact(&obs, &t, &p).unwrap().value, q(1, 1));
        let r = extension_binary_search_pooled(&obs, &t, &p).unwrap();
        assert_eq!((r.value, r.oracle_calls), (q(1, 1), 1));
    }

    #[test]
    fn incoherent_base_is_reported() {
        let obs = observable(alice_bob(), "P(a2) = 1/3\nP(b3) = 1/4", Mode::Pure);
        let p = pool(&obs);
        let t = query("a1", Direction::Max, 3);
        assert_eq!(extension_exact(&obs, &t, &p).unwrap_err(), Error::IncoherentBase);
        assert_eq!(
            extension_binary_search_pooled(&obs, &t, &p).unwrap_err(),
            Error::IncoherentBase
        );
    }

    #[test]
    fn mixed_extension() {
        let obs = observable(alice_bob(), "P(a2) = 1/3\nP(b3) = 1/4", Mode::Mixed);
        let p = pool(&obs);
        let t = query("b1", Direction::Max, 5);
        let exact = extension_exact(&obs, &t, &p).unwrap();
        let r = extension_binary_search_pooled(&obs, &t, &p).unwrap();
        assert!(exact.value >= r.value && exact.value.clone() - r.value.clone() < q(1, 32));
        assert!(matches!(
            extension_exact(&obs, &query("b1 | a1", Direction::Max, 5), &p),
            Err(Error::Unsupported(_))
        ));
    }

    fn random_game(payoffs: &[i64]) -> crate::Game {
        let shapes = vec![
            crate::PlayerShape::new("x", ["x0", "x1", "x2"]),
            crate::PlayerShape::new("y", ["y0", "y1", "y2"]),
        ];
        crate::game::Game::tabulate(crate::GameForm::Standard, shapes, |p, a| {
            int(payoffs[p * 9 + a[0] * 3 + a[1]])
        })
        .unwrap()
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn binary_search_sandwiches_exact(
            payoffs in proptest::collection::vec(0i64..4, 18),
            bound in 0i64..=4,
            observed in 0usize..6,
            target in 0usize..6,
            k in 1u32..7,
            mixed in proptest::bool::ANY,
        ) {
            let names = ["x0", "x1", "x2", "y0", "y1", "y2"];
            let mode = if mixed { Mode::Mixed } else { Mode::Pure };
            let text = format!("P({}) = {}/4", names[observed], bound);
            let obs = observable(random_game(&payoffs), &text, mode);
            let p = pool(&obs);
            let eps = q(1, 1 << k);
            for direction in [Direction::Max, Direction::Min] {
                let t = query(names[target], direction, k);
                match extension_exact(&obs, &t, &p) {
                    Err(Error::IncoherentBase) => {
                        proptest::prop_assert_eq!(
                            extension_binary_search_pooled(&obs, &t, &p).unwrap_err(),
                            Error::IncoherentBase
                        );
                    }
                    Err(e) => panic!("{e}"),
                    Ok(exact) => {
                        let r = extension_binary_search_pooled(&obs, &t, &p).unwrap();
                        let gap = match direction {
                            Direction::Max => exact.value.clone() - r.value.clone(),
                            Direction::Min => r.value.clone() - exact.value.clone(),
                        };
                        proptest::prop_assert!(gap >= q(0, 1) && gap < eps.clone());
                        proptest::prop_assert!(r.oracle_calls == 1 || r.oracle_calls == k as usize + 1);
                        proptest::prop_assert!(r.lower <= exact.value && exact.value <= r.upper);
                    }
                }
            }
        }
    }
}

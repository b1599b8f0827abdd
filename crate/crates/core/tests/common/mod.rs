//! Shared generators and brute-force oracles for integration tests. The
//! oracles only use the public `Game::utility` lookup, never the solvers.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use pce_core::coherence::CoherenceWitness;
use pce_core::game::Game;
use pce_core::mixed::MixedProfile;
use pce_core::{ActionProfile, Formula, GameForm, Mode, Observable, PceConstraint, PlayerShape, Rational, Relation};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const ALICE_BOB: &str = include_str!("../../../../data/alice_bob.game");
pub const RING: &str = include_str!("../../../../data/ring.game");
pub const PENNIES: &str = include_str!("../../../../data/pennies.game");

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn game(text: &str) -> Game<Rational> {
    pce_core::parse_game(text).unwrap()
}

pub fn observable(text: &str, constraints: &str, mode: Mode) -> Observable {
    Observable::new(game(text), pce_core::parse_constraints(constraints).unwrap(), mode).unwrap()
}

pub fn profiles(game: &Game<Rational>, rows: &[&[&str]]) -> BTreeSet<ActionProfile> {
    rows.iter().map(|ids| game.profile_from_ids(ids).unwrap()).collect()
}

/// Graphical game with `n` players, up to `s` actions each and up to `k`
/// random neighbors, utilities drawn from `0..=range`.
pub fn random_game(rng: &mut ChaCha8Rng, n: usize, s: usize, k: usize, range: i64) -> Game<Rational> {
    let shapes = (0..n)
        .map(|p| {
            let actions = rng.gen_range(1..=s);
            let k = rng.gen_range(0..=k.min(n - 1));
            let neighbors: Vec<usize> = sample(rng, n - 1, k)
                .into_iter()
                .map(|j| if j >= p { j + 1 } else { j })
                .collect();
            PlayerShape::new(
                format!("p{p}"),
                (0..actions).map(|a| format!("p{p}a{a}")).collect::<Vec<_>>(),
            )
            .with_neighbors(neighbors)
        })
        .collect();
    Game::tabulate(GameForm::Graphical, shapes, |_, _| {
        Rational::from_integer(rng.gen_range(0..=range).into())
    })
    .unwrap()
}

/// Two-player standard-form game with exactly `s1 × s2` actions.
pub fn random_bimatrix(rng: &mut ChaCha8Rng, s1: usize, s2: usize, range: i64) -> Game<Rational> {
    let shapes = vec![
        PlayerShape::new("r".to_string(), (0..s1).map(|a| format!("r{a}")).collect::<Vec<_>>()),
        PlayerShape::new("c".to_string(), (0..s2).map(|a| format!("c{a}")).collect::<Vec<_>>()),
    ];
    Game::tabulate(GameForm::Standard, shapes, |_, _| {
        Rational::from_integer(rng.gen_range(0..=range).into())
    })
    .unwrap()
}

pub fn all_profiles(game: &Game<Rational>) -> Vec<ActionProfile> {
    let mut out = vec![Vec::new()];
    for p in 0..game.num_players() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (0..game.num_actions(p)).map(move |a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(ActionProfile).collect()
}

/// Pure equilibria by checking every unilateral deviation of every profile.
pub fn brute_pure_equilibria(game: &Game<Rational>) -> BTreeSet<ActionProfile> {
    all_profiles(game)
        .into_iter()
        .filter(|profile| {
            (0..game.num_players()).all(|p| {
                let here = game.utility(p, profile).unwrap();
                (0..game.num_actions(p)).all(|a| game.utility(p, &profile.with_action(p, a)).unwrap() <= here)
            })
        })
        .collect()
}

/// Expected payoff of each action of `player` against the other player's
/// mixed strategy, by explicit bilinear expansion.
pub fn bilinear_payoffs(game: &Game<Rational>, player: usize, other: &[Rational]) -> Vec<Rational> {
    (0..game.num_actions(player))
        .map(|a| {
            other.iter().enumerate().fold(Rational::zero(), |acc, (b, w)| {
                let profile = if player == 0 { vec![a, b] } else { vec![b, a] };
                acc + w.clone() * game.utility(player, &ActionProfile(profile)).unwrap()
            })
        })
        .collect()
}

/// Nash condition for a two-player mixed profile: every support action earns
/// the maximum payoff.
pub fn brute_is_mixed_equilibrium(game: &Game<Rational>, profile: &MixedProfile<Rational>) -> bool {
    (0..2).all(|p| {
        let payoffs = bilinear_payoffs(game, p, &profile.strategies[1 - p]);
        let best = payoffs.iter().max().unwrap().clone();
        profile.strategies[p]
            .iter()
            .zip(&payoffs)
            .all(|(w, v)| w.is_zero() || *v == best)
    })
}

fn eval(formula: &Formula, holds: &dyn Fn(&str) -> bool) -> bool {
    match formula {
        Formula::Atom(a) => holds(a),
        Formula::Not(f) => !eval(f, holds),
        Formula::And(a, b) => eval(a, holds) && eval(b, holds),
        Formula::Or(a, b) => eval(a, holds) || eval(b, holds),
        Formula::Implies(a, b) => !eval(a, holds) || eval(b, holds),
    }
}

pub fn holds(game: &Game<Rational>, profile: &ActionProfile, formula: &Formula) -> bool {
    eval(formula, &|atom: &str| {
        let (p, a) = game.action_owner(atom).unwrap();
        profile.0[p] == a
    })
}

fn distribution_ok(probabilities: &[Rational]) -> bool {
    probabilities.iter().all(|p| *p > Rational::zero())
        && probabilities.iter().fold(Rational::zero(), |a, b| a + b) == Rational::one()
}

/// Induced probability of every constraint's formula, or `None` when the
/// witness is not a distribution over pure equilibria.
pub fn pure_witness_values(
    observable: &Observable,
    witness: &CoherenceWitness<Rational, ActionProfile>,
) -> Option<Vec<Rational>> {
    let equilibria = brute_pure_equilibria(&observable.game);
    if !distribution_ok(&witness.probabilities) || !witness.support.iter().all(|e| equilibria.contains(e)) {
        return None;
    }
    Some(
        observable
            .constraints
            .iter()
            .map(|c| {
                witness
                    .support
                    .iter()
                    .zip(&witness.probabilities)
                    .filter(|(e, _)| holds(&observable.game, e, &c.formula))
                    .fold(Rational::zero(), |a, (_, p)| a + p)
            })
            .collect(),
    )
}

pub fn mixed_witness_values(
    observable: &Observable,
    witness: &CoherenceWitness<Rational, MixedProfile<Rational>>,
) -> Option<Vec<Rational>> {
    if !distribution_ok(&witness.probabilities)
        || !witness
            .support
            .iter()
            .all(|e| brute_is_mixed_equilibrium(&observable.game, e))
    {
        return None;
    }
    Some(
        observable
            .constraints
            .iter()
            .map(|c| {
                let Formula::Atom(a) = &c.formula else {
                    panic!("mixed constraints are atomic")
                };
                let (p, i) = observable.game.action_owner(a).unwrap();
                witness
                    .support
                    .iter()
                    .zip(&witness.probabilities)
                    .fold(Rational::zero(), |acc, (e, w)| {
                        acc + w.clone() * e.strategies[p][i].clone()
                    })
            })
            .collect(),
    )
}

pub fn satisfies(observable: &Observable, values: &[Rational]) -> bool {
    observable
        .constraints
        .iter()
        .zip(values)
        .all(|(c, v)| c.relation.holds(v, &c.bound))
}

/// Random constraints that hold at a random distribution over `equilibria`,
/// so the instance is coherent by construction.
pub fn coherent_constraints(
    rng: &mut ChaCha8Rng,
    game: &Game<Rational>,
    equilibria: &[ActionProfile],
    count: usize,
) -> Vec<PceConstraint<Rational>> {
    let weights: Vec<i64> = equilibria.iter().map(|_| rng.gen_range(0..4)).collect();
    let total: i64 = weights.iter().sum::<i64>().max(1);
    let weights: Vec<Rational> = if weights.iter().all(|&w| w == 0) {
        (0..equilibria.len())
            .map(|i| if i == 0 { Rational::one() } else { Rational::zero() })
            .collect()
    } else {
        weights.iter().map(|&w| q(w, total)).collect()
    };
    let actions = game.all_actions();
    (0..count)
        .map(|_| {
            let formula = Formula::Atom(actions[rng.gen_range(0..actions.len())].clone());
            let value = equilibria
                .iter()
                .zip(&weights)
                .filter(|(e, _)| holds(game, e, &formula))
                .fold(Rational::zero(), |a, (_, w)| a + w);
            let relation = [Relation::Eq, Relation::Le, Relation::Ge][rng.gen_range(0..3)];
            let bound = match relation {
                Relation::Eq => value,
                Relation::Le => (value + q(rng.gen_range(0..3), 10)).min(Rational::one()),
                Relation::Ge => (value - q(rng.gen_range(0..3), 10)).max(Rational::zero()),
            };
            PceConstraint::new(formula, relation, bound).unwrap()
        })
        .collect()
}

/// Random atomic constraints with bounds on a grid of tenths.
pub fn random_constraints(rng: &mut ChaCha8Rng, game: &Game<Rational>, count: usize) -> Vec<PceConstraint<Rational>> {
    let actions = game.all_actions();
    (0..count)
        .map(|_| {
            let formula = Formula::Atom(actions[rng.gen_range(0..actions.len())].clone());
            let relation = [Relation::Eq, Relation::Le, Relation::Ge][rng.gen_range(0..3)];
            PceConstraint::new(formula, relation, q(rng.gen_range(0..=10), 10)).unwrap()
        })
        .collect()
}

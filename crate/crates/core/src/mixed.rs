//! Mixed equilibria of two-player games and coherence over them.
//!
//! Equilibria are computed by vertex enumeration: for every support `S` of a
//! player and every set `T` of opponent actions, the strategy on `S` that
//! makes the opponent indifferent over `T` is computed when it is unique.
//! Pairs of such vertices that are mutual best responses are the extreme
//! equilibria. Every equilibrium lies in a product of convex hulls of extreme
//! equilibria, so for constraints on single actions a distribution over
//! extreme equilibria can reproduce any distribution over all equilibria.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Signed;
use serde::Serialize;

use crate::coherence::{
    CoherencePath, CoherenceReport, CoherenceStats, CoherenceWitness, Mode, ObservableGame, Verdict,
};
use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game};
use crate::linalg::{self, LinearSolution};
use crate::scalar::{dot, Scalar};
use crate::simplex::{
    minimize_with_pricing, solve_feasibility, upper_triangular, Basis, Column, ColumnLabel, ConstraintSystem,
    PricingState, PricingStatus, Relation,
};

/// Largest action count per player accepted by the enumeration.
pub const MAX_MIXED_ACTIONS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MixedProfile<T> {
    /// One probability per action, per player.
    pub strategies: Vec<Vec<T>>,
}

impl<T: Scalar> MixedProfile<T> {
    pub fn new(strategies: Vec<Vec<T>>) -> Self {
        Self { strategies }
    }

    pub fn point_mass(game: &Game<T>, profile: &ActionProfile) -> Self {
        Self {
            strategies: (0..game.num_players())
                .map(|p| {
                    (0..game.num_actions(p))
                        .map(|a| if a == profile.action(p) { T::one() } else { T::zero() })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn support(&self, player: usize) -> Vec<usize> {
        (0..self.strategies[player].len())
            .filter(|&a| self.strategies[player][a].is_positive())
            .collect()
    }

    pub fn support_size(&self) -> usize {
        (0..self.strategies.len()).map(|p| self.support(p).len()).sum()
    }

    /// The pure profile when every strategy is a point mass.
    pub fn as_pure(&self) -> Option<ActionProfile> {
        self.strategies
            .iter()
            .map(|s| s.iter().position(|v| v.is_one()))
            .collect::<Option<Vec<_>>>()
            .map(ActionProfile)
    }

    /// Probability that `action` of `player` is played.
    pub fn probability(&self, player: usize, action: usize) -> &T {
        &self.strategies[player][action]
    }

    pub fn check(&self, game: &Game<T>) -> Result<()> {
        if self.strategies.len() != game.num_players() {
            return Err(Error::MalformedProfile(format!(
                "{} strategies for {} players",
                self.strategies.len(),
                game.num_players()
            )));
        }
        for (p, s) in self.strategies.iter().enumerate() {
            let total = s.iter().fold(T::zero(), |a, v| a + v.clone());
            if s.len() != game.num_actions(p) || s.iter().any(Signed::is_negative) || !total.is_one() {
                return Err(Error::MalformedProfile(format!(
                    "strategy of `{}` is not a distribution over its actions",
                    game.player_id(p)
                )));
            }
        }
        Ok(())
    }

    /// `(a1:2/3, a2:1/3; b1:4/5, b2:1/5)`, listing support actions only.
    pub fn display(&self, game: &Game<T>) -> String {
        let players: Vec<String> = self
            .strategies
            .iter()
            .enumerate()
            .map(|(p, _)| {
                self.support(p)
                    .into_iter()
                    .map(|a| format!("{}:{}", game.action_id(p, a), self.strategies[p][a]))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .collect();
        format!("({})", players.join("; "))
    }
}

impl<T: Scalar> fmt::Display for MixedProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let players: Vec<String> = self
            .strategies
            .iter()
            .map(|s| s.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
            .collect();
        write!(f, "(({}))", players.join("), ("))
    }
}

fn require_two_players<T: Scalar>(game: &Game<T>) -> Result<()> {
    match game.num_players() {
        2 => Ok(()),
        n => Err(Error::NotTwoPlayer(n)),
    }
}

/// Expected payoff of each action of `player` against the opponent's
/// strategy.
pub fn action_payoffs<T: Scalar>(game: &Game<T>, player: usize, opponent: &[T]) -> Vec<T> {
    (0..game.num_actions(player))
        .map(|a| {
            opponent
                .iter()
                .enumerate()
                .filter(|(_, q)| !q.is_zero())
                .fold(T::zero(), |acc, (b, q)| {
                    let profile = if player == 0 { [a, b] } else { [b, a] };
                    acc + game.utility_unchecked(player, &profile).clone() * q.clone()
                })
        })
        .collect()
}

/// `U_i(σ) = Σ_{a,b} u_i(a, b) σ_1(a) σ_2(b)`.
pub fn expected_utility<T: Scalar>(game: &Game<T>, player: usize, profile: &MixedProfile<T>) -> Result<T> {
    require_two_players(game)?;
    if player >= 2 {
        return Err(Error::UnknownPlayer(format!("#{player}")));
    }
    profile.check(game)?;
    let payoffs = action_payoffs(game, player, &profile.strategies[1 - player]);
    Ok(dot(&payoffs, &profile.strategies[player]))
}

fn best_responses<T: Scalar>(payoffs: &[T]) -> Vec<usize> {
    let best = payoffs.iter().max().expect("players have actions");
    (0..payoffs.len()).filter(|&a| &payoffs[a] == best).collect()
}

/// Every support action of each player is a best response to the opponent.
pub fn is_mixed_equilibrium<T: Scalar>(game: &Game<T>, profile: &MixedProfile<T>) -> Result<bool> {
    require_two_players(game)?;
    profile.check(game)?;
    Ok((0..2).all(|p| {
        let payoffs = action_payoffs(game, p, &profile.strategies[1 - p]);
        let br = best_responses(&payoffs);
        profile.support(p).iter().all(|a| br.contains(a))
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MixedEquilibria<T> {
    /// Extreme equilibria, ordered by total support size, then supports,
    /// then probabilities.
    pub profiles: Vec<MixedProfile<T>>,
    /// Some equilibrium strategy has more opponent best responses than
    /// support actions, so equilibria may form continua between the listed
    /// extreme points.
    pub degenerate: bool,
}

struct Vertex<T> {
    strategy: Vec<T>,
    /// Opponent best responses against `strategy`.
    opponent_br: Vec<usize>,
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..1 << n).map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}

/// Vertices of the best-response polytope of `player`'s strategies.
fn vertices<T: Scalar>(game: &Game<T>, player: usize) -> Vec<Vertex<T>> {
    let own = game.num_actions(player);
    let opp = game.num_actions(1 - player);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in subsets(own) {
        for t in subsets(opp).filter(|t| t.len() >= s.len()) {
            // unknowns: x_a for a in S, then w
            let mut rows = Vec::with_capacity(t.len() + 1);
            let mut rhs = Vec::with_capacity(t.len() + 1);
            let mut norm: Vec<T> = vec![T::one(); s.len()];
            norm.push(T::zero());
            rows.push(norm);
            rhs.push(T::one());
            for &b in &t {
                let mut row: Vec<T> = s
                    .iter()
                    .map(|&a| {
                        let profile = if player == 0 { [a, b] } else { [b, a] };
                        game.utility_unchecked(1 - player, &profile).clone()
                    })
                    .collect();
                row.push(-T::one());
                rows.push(row);
                rhs.push(T::zero());
            }
            let LinearSolution::Unique(solution) = linalg::solve(&rows, &rhs) else {
                continue;
            };
            if solution[..s.len()].iter().any(|v| !v.is_positive()) {
                continue;
            }
            let mut strategy = vec![T::zero(); own];
            for (&a, v) in s.iter().zip(&solution) {
                strategy[a] = v.clone();
            }
            let payoffs = action_payoffs(game, 1 - player, &strategy);
            let opponent_br = best_responses(&payoffs);
            if !t.iter().all(|b| opponent_br.contains(b)) {
                continue;
            }
            if seen.insert(strategy.clone()) {
                out.push(Vertex { strategy, opponent_br });
            }
        }
    }
    out
}

/// Extreme mixed equilibria of a two-player game, including every pure
/// equilibrium as a point mass.
pub fn enumerate_mixed_equilibria_2p<T: Scalar>(game: &Game<T>) -> Result<MixedEquilibria<T>> {
    require_two_players(game)?;
    for p in 0..2 {
        if game.num_actions(p) > MAX_MIXED_ACTIONS {
            return Err(Error::Unsupported(format!(
                "mixed enumeration supports at most {MAX_MIXED_ACTIONS} actions per player"
            )));
        }
    }
    let xs = vertices(game, 0);
    let ys = vertices(game, 1);
    let mut profiles = Vec::new();
    let mut degenerate = false;
    for x in &xs {
        let sx: Vec<usize> = (0..x.strategy.len()).filter(|&a| x.strategy[a].is_positive()).collect();
        for y in &ys {
            let sy: Vec<usize> = (0..y.strategy.len()).filter(|&b| y.strategy[b].is_positive()).collect();
            if sx.iter().all(|a| y.opponent_br.contains(a)) && sy.iter().all(|b| x.opponent_br.contains(b)) {
                degenerate |= x.opponent_br.len() > sx.len() || y.opponent_br.len() > sy.len();
                profiles.push(MixedProfile::new(vec![x.strategy.clone(), y.strategy.clone()]));
            }
        }
    }
    profiles.sort_by_cached_key(|e| (e.support_size(), vec![e.support(0), e.support(1)], e.clone()));
    debug_assert!(profiles.iter().all(|e| is_mixed_equilibrium(game, e).unwrap_or(false)));
    Ok(MixedEquilibria { profiles, degenerate })
}

/// Owner and index of an atomic constraint's action.
fn atomic_action<T: Scalar>(game: &Game<T>, formula: &crate::psat::Formula) -> Result<(usize, usize)> {
    match formula {
        crate::psat::Formula::Atom(a) => game.action_owner(a).ok_or_else(|| Error::UnknownAtom(a.clone())),
        other => Err(Error::Unsupported(format!(
            "mixed mode only supports constraints on single actions, found `{other}`"
        ))),
    }
}

/// Induced probability of each constraint's action at `e`, after the
/// normalization entry.
fn mixed_column<T: Scalar>(actions: &[(usize, usize)], e: &MixedProfile<T>) -> Vec<T> {
    std::iter::once(T::one())
        .chain(actions.iter().map(|&(p, a)| e.probability(p, a).clone()))
        .collect()
}

pub fn build_mixed_system<T: Scalar>(
    observable: &ObservableGame<T>,
    equilibria: &[MixedProfile<T>],
) -> Result<ConstraintSystem<T>> {
    let actions = observable
        .constraints
        .iter()
        .map(|c| atomic_action(&observable.game, &c.formula))
        .collect::<Result<Vec<_>>>()?;
    let columns: Vec<Vec<T>> = equilibria.iter().map(|e| mixed_column(&actions, e)).collect();
    ConstraintSystem::with_normalization(
        equilibria.len(),
        observable.constraints.iter().enumerate().map(|(i, c)| {
            (
                columns.iter().map(|col| col[i + 1].clone()).collect(),
                c.relation,
                c.bound.clone(),
            )
        }),
    )
}

/// `P(action)` under a witness over mixed equilibria.
pub fn mixed_action_probability<T: Scalar>(
    witness: &CoherenceWitness<T, MixedProfile<T>>,
    player: usize,
    action: usize,
) -> T {
    witness
        .support
        .iter()
        .zip(&witness.probabilities)
        .fold(T::zero(), |acc, (e, p)| {
            acc + e.probability(player, action).clone() * p.clone()
        })
}

pub fn check_mixed_witness<T: Scalar>(
    observable: &ObservableGame<T>,
    witness: &CoherenceWitness<T, MixedProfile<T>>,
) -> Result<bool> {
    let total = witness.probabilities.iter().fold(T::zero(), |a, p| a + p.clone());
    if !total.is_one() || witness.probabilities.iter().any(|p| !p.is_positive()) {
        return Ok(false);
    }
    for e in &witness.support {
        if !is_mixed_equilibrium(&observable.game, e)? {
            return Ok(false);
        }
    }
    for c in &observable.constraints {
        let (p, a) = atomic_action(&observable.game, &c.formula)?;
        if !c.is_satisfied_by(&mixed_action_probability(witness, p, a)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `c_B B⁻¹ A^j ≥ 0` for a cost-zero column.
pub fn satisfies_reduced_cost<T: Scalar>(duals: &[T], entries: &[T]) -> bool {
    !dot(duals, entries).is_negative()
}

/// First pool column outside the basis whose reduced cost is strictly
/// negative.
pub fn cost_reducing_pricing<T: Scalar>(state: &PricingState<'_, T>, pool: &[Column<T>]) -> Option<Column<T>> {
    pool.iter()
        .find(|c| !state.basis.contains(c.label) && state.reduced_cost(c).is_negative())
        .cloned()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedReport<T> {
    pub verdict: Verdict<T, MixedProfile<T>>,
    pub stats: CoherenceStats,
    pub degenerate: bool,
    /// Column-generation objective after initialization and each merge;
    /// empty on the direct path.
    pub objective_trace: Vec<T>,
}

impl<T> MixedReport<T> {
    pub fn into_report(self) -> CoherenceReport<T, MixedProfile<T>> {
        CoherenceReport {
            verdict: self.verdict,
            stats: self.stats,
        }
    }
}

pub fn decide_mixed_coherence<T: Scalar>(
    observable: &ObservableGame<T>,
    path: CoherencePath,
) -> Result<MixedReport<T>> {
    if observable.mode != Mode::Mixed {
        return Err(Error::Unsupported(
            "mixed coherence requires a mixed-mode observable game".into(),
        ));
    }
    let equilibria = enumerate_mixed_equilibria_2p(&observable.game)?;
    decide_over_pool(observable, &equilibria, path)
}

/// Decides coherence over a precomputed equilibrium pool.
pub fn decide_over_pool<T: Scalar>(
    observable: &ObservableGame<T>,
    equilibria: &MixedEquilibria<T>,
    path: CoherencePath,
) -> Result<MixedReport<T>> {
    require_two_players(&observable.game)?;
    let pool = &equilibria.profiles;
    let mut report = MixedReport {
        verdict: Verdict::NoEquilibrium,
        stats: CoherenceStats {
            equilibria: Some(pool.len()),
            ..CoherenceStats::default()
        },
        degenerate: equilibria.degenerate,
        objective_trace: Vec::new(),
    };
    match path {
        CoherencePath::Direct => {
            let system = build_mixed_system(observable, pool)?;
            if pool.is_empty() {
                return Ok(report);
            }
            let result = solve_feasibility(&system);
            report.stats.lp_pivots = result.pivots;
            report.verdict = match result.solution {
                None => Verdict::Incoherent,
                Some(pi) => {
                    let (support, probabilities) =
                        pool.iter().cloned().zip(pi).filter(|(_, p)| p.is_positive()).unzip();
                    Verdict::Coherent(CoherenceWitness { support, probabilities })
                }
            };
            Ok(report)
        }
        CoherencePath::Cg => column_generation(observable, pool, report),
        CoherencePath::Psat => Err(Error::Unsupported(
            "the psat path is only available in pure mode".into(),
        )),
    }
}

fn column_generation<T: Scalar>(
    observable: &ObservableGame<T>,
    pool: &[MixedProfile<T>],
    mut report: MixedReport<T>,
) -> Result<MixedReport<T>> {
    let mut rows: Vec<usize> = (0..observable.constraints.len()).collect();
    let constraints = &observable.constraints;
    rows.sort_by(|&a, &b| constraints[b].bound.cmp(&constraints[a].bound));
    let actions = rows
        .iter()
        .map(|&i| atomic_action(&observable.game, &constraints[i].formula))
        .collect::<Result<Vec<_>>>()?;
    if pool.is_empty() {
        return Ok(report);
    }
    let m = rows.len() + 1;
    let rhs: Vec<T> = std::iter::once(T::one())
        .chain(rows.iter().map(|&i| constraints[i].bound.clone()))
        .collect();
    let pool_columns: Vec<Column<T>> = pool
        .iter()
        .enumerate()
        .map(|(j, e)| Column::new(ColumnLabel::Generated(j), mixed_column(&actions, e), T::zero()))
        .collect();
    // an initial column costs nothing only if it is the column of some pool
    // equilibrium
    let mut initial_match: Vec<Option<usize>> = Vec::with_capacity(m);
    let columns: Vec<Column<T>> = upper_triangular::<T>(m)
        .into_iter()
        .enumerate()
        .map(|(j, entries)| {
            let hit = pool_columns.iter().position(|c| c.entries == entries);
            initial_match.push(hit);
            let cost = if hit.is_some() { T::zero() } else { T::one() };
            Column::new(ColumnLabel::Initial(j), entries, cost)
        })
        .collect();
    let basis = Basis::new(columns, rhs)?;
    let slacks: Vec<Column<T>> = rows
        .iter()
        .enumerate()
        .filter_map(|(r, &i)| {
            let sign = match constraints[i].relation {
                Relation::Le => T::one(),
                Relation::Ge => -T::one(),
                Relation::Eq => return None,
            };
            let mut entries = vec![T::zero(); m];
            entries[r + 1] = sign;
            Some(Column::new(ColumnLabel::Slack(r + 1), entries, T::zero()))
        })
        .collect();
    let mut oracle = |state: &PricingState<'_, T>| {
        Ok(cost_reducing_pricing(state, &slacks).or_else(|| cost_reducing_pricing(state, &pool_columns)))
    };
    let iteration_cap = 64 * (pool.len() + m) + 1024;
    let outcome = minimize_with_pricing(basis, &mut oracle, iteration_cap)?;
    report.stats.lp_pivots = outcome.basis.pivots();
    report.stats.oracle_calls = outcome.oracle_calls;
    report.objective_trace = outcome.objective_trace.clone();
    if outcome.status == PricingStatus::NoImprovingColumn {
        report.verdict = Verdict::Incoherent;
        return Ok(report);
    }
    let mut mass: Vec<(usize, T)> = Vec::new();
    for (column, p) in outcome.basis.columns().iter().zip(outcome.basis.solution()) {
        if !p.is_positive() {
            continue;
        }
        let index = match column.label {
            ColumnLabel::Generated(j) => j,
            ColumnLabel::Initial(j) => initial_match[j].expect("cost-zero initial columns match the pool"),
            ColumnLabel::Slack(_) => continue,
        };
        match mass.iter_mut().find(|(k, _)| *k == index) {
            Some((_, total)) => *total = total.clone() + p.clone(),
            None => mass.push((index, p.clone())),
        }
    }
    mass.sort_by_key(|(k, _)| *k);
    report.verdict = Verdict::Coherent(CoherenceWitness {
        support: mass.iter().map(|(k, _)| pool[*k].clone()).collect(),
        probabilities: mass.into_iter().map(|(_, p)| p).collect(),
    });
    Ok(report)
}

//! CNF encoding of pure equilibria, an internal SAT procedure, model
//! enumeration and DIMACS export.
//!
//! Variable `x_i^j` (player `i` plays its `j`-th action) gets the DIMACS index
//! `offset_i + j + 1`, players and actions in declaration order. The formula
//! has three clause groups:
//!
//! * **choose**: every player picks at least one action;
//! * **at-most-one**: no player picks two actions;
//! * **best-response**: for every tuple of neighbor actions, the player picks
//!   one of its best responses to that tuple (all tied maxima are listed).

mod solver;

use std::fmt::Write as _;

use serde::Serialize;

pub use solver::{Solver, SolverStats};

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game};
use crate::pure::best_responses_unchecked;
use crate::scalar::Scalar;

/// DIMACS-style literal: `v` or `-v` for a variable index `v ≥ 1`.
pub type Lit = i32;

/// Total truth assignment, indexed by `variable - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Valuation(pub Vec<bool>);

impl Valuation {
    pub fn var(&self, var: usize) -> bool {
        self.0[var - 1]
    }

    pub fn literal(&self, lit: Lit) -> bool {
        self.0[lit.unsigned_abs() as usize - 1] == (lit > 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClauseTag {
    /// Each player chooses an action.
    Choose,
    /// Each player chooses only one action.
    AtMostOne,
    /// Each player plays a best response to its neighbors.
    BestResponse,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub literals: Vec<Lit>,
    pub tag: ClauseTag,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfEncoding {
    /// `(player, action)` for each variable, indexed by `variable - 1`.
    var_map: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    labels: Vec<(String, String)>,
    clauses: Vec<Clause>,
}

impl CnfEncoding {
    pub fn num_vars(&self) -> usize {
        self.var_map.len()
    }

    pub fn num_players(&self) -> usize {
        self.offsets.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clauses_tagged(&self, tag: ClauseTag) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(move |c| c.tag == tag)
    }

    pub fn var(&self, player: usize, action: usize) -> Lit {
        (self.offsets[player] + action + 1) as Lit
    }

    /// `(player, action)` of a variable.
    pub fn decode_var(&self, var: usize) -> (usize, usize) {
        self.var_map[var - 1]
    }

    /// `player_id:action_id` of a variable.
    pub fn label(&self, var: usize) -> String {
        let (p, a) = &self.labels[var - 1];
        format!("{p}:{a}")
    }

    fn actions_of(&self, player: usize) -> std::ops::Range<usize> {
        let start = self.offsets[player];
        let end = self.offsets.get(player + 1).copied().unwrap_or(self.var_map.len());
        start..end
    }

    pub fn solver(&self) -> Solver {
        let mut solver = Solver::new(self.num_vars());
        for clause in &self.clauses {
            solver.add_clause(&clause.literals);
        }
        solver
    }
}

pub fn encode_game<T: Scalar>(game: &Game<T>) -> CnfEncoding {
    let n = game.num_players();
    let mut offsets = Vec::with_capacity(n);
    let mut var_map = Vec::new();
    let mut labels = Vec::new();
    for p in 0..n {
        offsets.push(var_map.len());
        for a in 0..game.num_actions(p) {
            var_map.push((p, a));
            labels.push((game.player_id(p).to_owned(), game.action_id(p, a).to_owned()));
        }
    }
    let var = |p: usize, a: usize| (offsets[p] + a + 1) as Lit;
    let mut clauses = Vec::new();

    for p in 0..n {
        clauses.push(Clause {
            literals: (0..game.num_actions(p)).map(|a| var(p, a)).collect(),
            tag: ClauseTag::Choose,
        });
    }
    for p in 0..n {
        let s = game.num_actions(p);
        for a in 0..s {
            for b in a + 1..s {
                clauses.push(Clause {
                    literals: vec![-var(p, a), -var(p, b)],
                    tag: ClauseTag::AtMostOne,
                });
            }
        }
    }
    for p in 0..n {
        let neighbors = game.neighbors(p);
        let mut profile = vec![0usize; n];
        loop {
            let responses = best_responses_unchecked(game, p, &profile);
            let mut literals: Vec<Lit> = neighbors.iter().map(|&q| -var(q, profile[q])).collect();
            literals.extend(responses.into_iter().map(|r| var(p, r)));
            clauses.push(Clause {
                literals,
                tag: ClauseTag::BestResponse,
            });
            // next neighbor tuple, last neighbor fastest
            let mut k = neighbors.len();
            let done = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                let q = neighbors[k];
                profile[q] += 1;
                if profile[q] < game.num_actions(q) {
                    break false;
                }
                profile[q] = 0;
            };
            if done {
                break;
            }
        }
    }

    CnfEncoding {
        var_map,
        offsets,
        labels,
        clauses,
    }
}

/// Reads the profile encoded by a valuation that picks exactly one action per
/// player.
pub fn decode_model(encoding: &CnfEncoding, valuation: &Valuation) -> Result<ActionProfile> {
    if valuation.0.len() < encoding.num_vars() {
        return Err(Error::InvalidValuation(format!(
            "valuation covers {} of {} variables",
            valuation.0.len(),
            encoding.num_vars()
        )));
    }
    let mut profile = Vec::with_capacity(encoding.num_players());
    for p in 0..encoding.num_players() {
        let range = encoding.actions_of(p);
        let start = range.start;
        let chosen: Vec<usize> = range.filter(|&v| valuation.0[v]).map(|v| v - start).collect();
        match chosen.as_slice() {
            [a] => profile.push(*a),
            [] => {
                return Err(Error::InvalidValuation(format!(
                    "player `{}` has no true action variable",
                    encoding.labels[start].0
                )))
            }
            _ => {
                return Err(Error::InvalidValuation(format!(
                    "player `{}` has {} true action variables",
                    encoding.labels[start].0,
                    chosen.len()
                )))
            }
        }
    }
    Ok(ActionProfile(profile))
}

/// Satisfying valuation extending `assumptions`, or `None` when the formula
/// with those assumptions is unsatisfiable.
pub fn sat_solve(encoding: &CnfEncoding, assumptions: &[Lit]) -> (Option<Valuation>, SolverStats) {
    let mut solver = encoding.solver();
    let model = solver.solve(assumptions);
    (model, solver.stats)
}

/// All models, decoded, in discovery order. Each model is excluded by a
/// blocking clause over its true action variables before the next call.
pub fn enumerate_models(encoding: &CnfEncoding) -> Result<(Vec<ActionProfile>, SolverStats)> {
    let mut solver = encoding.solver();
    let mut profiles = Vec::new();
    while let Some(model) = solver.solve(&[]) {
        let profile = decode_model(encoding, &model)?;
        let blocking: Vec<Lit> = profile
            .0
            .iter()
            .enumerate()
            .map(|(p, &a)| -encoding.var(p, a))
            .collect();
        profiles.push(profile);
        if blocking.is_empty() {
            // zero players: the single empty profile
            break;
        }
        solver.add_clause(&blocking);
    }
    Ok((profiles, solver.stats))
}

/// DIMACS CNF text; the variable map is recorded as `c var` comments.
pub fn export_dimacs(encoding: &CnfEncoding) -> String {
    let mut out = String::new();
    for var in 1..=encoding.num_vars() {
        let _ = writeln!(out, "c var {var} = {}", encoding.label(var));
    }
    let _ = writeln!(out, "p cnf {} {}", encoding.num_vars(), encoding.clauses.len());
    for clause in &encoding.clauses {
        for lit in &clause.literals {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::*;
    use crate::game::{GameForm, PlayerShape};
    use crate::pure::{enumerate_pure_equilibria, DEFAULT_PROFILE_CAP};
    use std::collections::BTreeSet;

    /// Renders a clause as sorted `±action` strings.
    fn render(game: &Game<crate::Rational>, enc: &CnfEncoding, clause: &Clause) -> BTreeSet<String> {
        clause
            .literals
            .iter()
            .map(|&l| {
                let (p, a) = enc.decode_var(l.unsigned_abs() as usize);
                format!("{}{}", if l < 0 { "-" } else { "+" }, game.action_id(p, a))
            })
            .collect()
    }

    #[test]
    fn ring_clause_counts_and_tie_clause() {
        let g = ring();
        let enc = encode_game(&g);
        assert_eq!(enc.num_vars(), 9);
        assert_eq!(enc.clauses_tagged(ClauseTag::Choose).count(), 3);
        assert_eq!(enc.clauses_tagged(ClauseTag::AtMostOne).count(), 9);
        assert_eq!(enc.clauses_tagged(ClauseTag::BestResponse).count(), 9);
        let tie: BTreeSet<String> = ["-c1", "+a1", "+a2"].iter().map(|s| s.to_string()).collect();
        assert!(enc
            .clauses_tagged(ClauseTag::BestResponse)
            .any(|c| render(&g, &enc, c) == tie));
    }

    #[test]
    fn alice_bob_counts() {
        let enc = encode_game(&alice_bob());
        assert_eq!(enc.num_vars(), 6);
        assert_eq!(enc.clauses_tagged(ClauseTag::Choose).count(), 2);
        assert_eq!(enc.clauses_tagged(ClauseTag::AtMostOne).count(), 6);
        assert_eq!(enc.clauses_tagged(ClauseTag::BestResponse).count(), 6);
        assert!(export_dimacs(&enc).contains("\np cnf 6 14\n"));
    }

    #[test]
    fn single_forced_action() {
        let g = Game::tabulate(GameForm::Standard, vec![PlayerShape::new("solo", ["x"])], |_, _| int(0)).unwrap();
        let enc = encode_game(&g);
        assert_eq!(enc.num_vars(), 1);
        let lits: Vec<Vec<Lit>> = enc.clauses().iter().map(|c| c.literals.clone()).collect();
        assert_eq!(lits, vec![vec![1], vec![1]]);
    }

    #[test]
    fn empty_game_dimacs() {
        let g = Game::<crate::Rational>::tabulate(GameForm::Standard, vec![], |_, _| int(0)).unwrap();
        let text = export_dimacs(&encode_game(&g));
        assert_eq!(text, "p cnf 0 0\n");
    }

    #[test]
    fn ring_dimacs_header_and_var_map() {
        let text = export_dimacs(&encode_game(&ring()));
        assert!(text.contains("\np cnf 9 21\n"));
        assert!(text.starts_with("c var 1 = a:a1\n"));
        assert!(text.contains("c var 9 = c:c3\n"));
        assert_eq!(text.lines().filter(|l| l.ends_with(" 0")).count(), 21);
    }

    #[test]
    fn decode_rejects_bad_valuations() {
        let enc = encode_game(&ring());
        let mut bits = vec![false; 9];
        bits[0] = true;
        bits[3] = true;
        bits[6] = true;
        let g = ring();
        assert_eq!(
            decode_model(&enc, &Valuation(bits.clone())).unwrap().ids(&g),
            vec!["a1", "b1", "c1"]
        );
        bits[1] = true;
        assert!(decode_model(&enc, &Valuation(bits.clone())).is_err());
        bits[0] = false;
        bits[1] = false;
        assert!(decode_model(&enc, &Valuation(bits)).is_err());
    }

    #[test]
    fn solve_with_assumption() {
        let g = ring();
        let enc = encode_game(&g);
        let (model, _) = sat_solve(&enc, &[enc.var(0, 2)]);
        let profile = decode_model(&enc, &model.unwrap()).unwrap();
        assert_eq!(profile.ids(&g), vec!["a3", "b3", "c3"]);
        let (model, _) = sat_solve(&enc, &[]);
        let profile = decode_model(&enc, &model.unwrap()).unwrap();
        let all = enumerate_pure_equilibria(&g, DEFAULT_PROFILE_CAP).unwrap();
        assert!(all.profiles.contains(&profile));
    }

    #[test]
    fn pennies_is_unsat() {
        let enc = encode_game(&pennies());
        assert!(sat_solve(&enc, &[]).0.is_none());
        assert!(enumerate_models(&enc).unwrap().0.is_empty());
    }

    #[test]
    fn model_enumeration_matches_known_models() {
        for g in [ring(), alice_bob()] {
            let (mut models, _) = enumerate_models(&encode_game(&g)).unwrap();
            models.sort();
            assert_eq!(
                models,
                enumerate_pure_equilibria(&g, DEFAULT_PROFILE_CAP).unwrap().profiles
            );
        }
    }
}

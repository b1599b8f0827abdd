//! Finite games in standard or graphical normal form.
//!
//! Every game is stored in graphical layout: player `i` owns a utility table
//! indexed by the actions of `N_i ∪ {i}` (its *scope*). A standard-form game is
//! the special case where every neighborhood is the full set of other players,
//! so a single lookup path serves both forms.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{parse_scalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GameForm {
    Standard,
    Graphical,
}

impl fmt::Display for GameForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameForm::Standard => "standard",
            GameForm::Graphical => "graphical",
        })
    }
}

/// Shape of one player before utilities are attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayerShape {
    pub id: String,
    pub actions: Vec<String>,
    /// Indices of neighboring players. Ignored for standard-form games.
    pub neighbors: Vec<usize>,
}

impl PlayerShape {
    pub fn new<S: Into<String>>(id: S, actions: impl IntoIterator<Item = S>) -> Self {
        Self {
            id: id.into(),
            actions: actions.into_iter().map(Into::into).collect(),
            neighbors: Vec::new(),
        }
    }

    pub fn with_neighbors(mut self, neighbors: impl IntoIterator<Item = usize>) -> Self {
        self.neighbors = neighbors.into_iter().collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Player<T> {
    id: String,
    actions: Vec<String>,
    neighbors: Vec<usize>,
    scope: Vec<usize>,
    strides: Vec<usize>,
    table: Vec<T>,
}

/// One action index per player, in player order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ActionProfile(pub Vec<usize>);

impl ActionProfile {
    pub fn new(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn action(&self, player: usize) -> usize {
        self.0[player]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with_action(&self, player: usize, action: usize) -> Self {
        let mut indices = self.0.clone();
        indices[player] = action;
        Self(indices)
    }

    /// Action identifiers in player order.
    pub fn ids<'g, T: Scalar>(&self, game: &'g Game<T>) -> Vec<&'g str> {
        self.0.iter().enumerate().map(|(p, &a)| game.action_id(p, a)).collect()
    }

    pub fn display<T: Scalar>(&self, game: &Game<T>) -> String {
        format!("({})", self.ids(game).join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game<T> {
    form: GameForm,
    players: Vec<Player<T>>,
    action_owner: HashMap<String, (usize, usize)>,
}

impl<T: Scalar> Game<T> {
    /// Builds a game by evaluating `utility(player, profile)` over every local
    /// tuple of each player's scope. Coordinates outside the scope are 0 in the
    /// profile passed to the closure.
    pub fn tabulate(
        form: GameForm,
        shapes: Vec<PlayerShape>,
        mut utility: impl FnMut(usize, &[usize]) -> T,
    ) -> Result<Self> {
        let n = shapes.len();
        let mut action_owner = HashMap::new();
        for (p, shape) in shapes.iter().enumerate() {
            if shape.actions.is_empty() {
                return Err(Error::InvalidGame(format!("player `{}` has no actions", shape.id)));
            }
            for (a, id) in shape.actions.iter().enumerate() {
                if action_owner.insert(id.clone(), (p, a)).is_some() {
                    return Err(Error::InvalidGame(format!("duplicate action id `{id}`")));
                }
            }
        }
        let mut seen_ids = HashSet::new();
        for shape in &shapes {
            if !seen_ids.insert(shape.id.as_str()) {
                return Err(Error::InvalidGame(format!("duplicate player id `{}`", shape.id)));
            }
        }

        let sizes: Vec<usize> = shapes.iter().map(|s| s.actions.len()).collect();
        let mut players = Vec::with_capacity(n);
        for (p, shape) in shapes.into_iter().enumerate() {
            let neighbors: Vec<usize> = match form {
                GameForm::Standard => (0..n).filter(|&q| q != p).collect(),
                GameForm::Graphical => {
                    let mut ns = shape.neighbors.clone();
                    ns.sort_unstable();
                    ns.dedup();
                    if ns.contains(&p) {
                        return Err(Error::InvalidGame(format!(
                            "player `{}` lists itself as a neighbor",
                            shape.id
                        )));
                    }
                    if let Some(&bad) = ns.iter().find(|&&q| q >= n) {
                        return Err(Error::InvalidGame(format!(
                            "player `{}` has unknown neighbor index {bad}",
                            shape.id
                        )));
                    }
                    ns
                }
            };
            let mut scope = neighbors.clone();
            scope.push(p);
            scope.sort_unstable();
            let strides = strides_for(&scope, &sizes);
            let len: usize = scope.iter().map(|&q| sizes[q]).product();
            let mut table = Vec::with_capacity(len);
            let mut profile = vec![0usize; n];
            for index in 0..len {
                let mut rest = index;
                for (&q, &stride) in scope.iter().zip(&strides) {
                    profile[q] = rest / stride;
                    rest %= stride;
                }
                table.push(utility(p, &profile));
            }
            players.push(Player {
                id: shape.id,
                actions: shape.actions,
                neighbors,
                scope,
                strides,
                table,
            });
        }
        Ok(Self {
            form,
            players,
            action_owner,
        })
    }

    pub fn form(&self) -> GameForm {
        self.form
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn player_id(&self, player: usize) -> &str {
        &self.players[player].id
    }

    pub fn player_index(&self, id: &str) -> Result<usize> {
        self.players
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| Error::UnknownPlayer(id.to_owned()))
    }

    pub fn actions(&self, player: usize) -> &[String] {
        &self.players[player].actions
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.players[player].actions.len()
    }

    pub fn action_id(&self, player: usize, action: usize) -> &str {
        &self.players[player].actions[action]
    }

    /// `(player, action index)` owning an action identifier.
    pub fn action_owner(&self, id: &str) -> Option<(usize, usize)> {
        self.action_owner.get(id).copied()
    }

    pub fn neighbors(&self, player: usize) -> &[usize] {
        &self.players[player].neighbors
    }

    /// Sorted `N_i ∪ {i}`.
    pub fn scope(&self, player: usize) -> &[usize] {
        &self.players[player].scope
    }

    /// Largest action set size (`s`).
    pub fn max_actions(&self) -> usize {
        self.players.iter().map(|p| p.actions.len()).max().unwrap_or(0)
    }

    /// Largest neighborhood size (`k`).
    pub fn max_neighbors(&self) -> usize {
        self.players.iter().map(|p| p.neighbors.len()).max().unwrap_or(0)
    }

    /// Total number of action profiles `|A|`, saturating.
    pub fn profile_count(&self) -> u128 {
        self.players
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.actions.len() as u128))
    }

    /// All action identifiers in player order.
    pub fn all_actions(&self) -> Vec<String> {
        self.players.iter().flat_map(|p| p.actions.iter().cloned()).collect()
    }

    pub fn check_profile(&self, profile: &ActionProfile) -> Result<()> {
        if profile.len() != self.players.len() {
            return Err(Error::MalformedProfile(format!(
                "expected {} coordinates, got {}",
                self.players.len(),
                profile.len()
            )));
        }
        for (p, &a) in profile.0.iter().enumerate() {
            if a >= self.players[p].actions.len() {
                return Err(Error::MalformedProfile(format!(
                    "action index {a} out of range for player `{}`",
                    self.players[p].id
                )));
            }
        }
        Ok(())
    }

    pub fn profile_from_ids(&self, ids: &[&str]) -> Result<ActionProfile> {
        let mut indices = vec![usize::MAX; self.players.len()];
        for id in ids {
            let (p, a) = self
                .action_owner(id)
                .ok_or_else(|| Error::MalformedProfile(format!("unknown action `{id}`")))?;
            if indices[p] != usize::MAX {
                return Err(Error::MalformedProfile(format!(
                    "two actions given for player `{}`",
                    self.players[p].id
                )));
            }
            indices[p] = a;
        }
        if let Some(p) = indices.iter().position(|&a| a == usize::MAX) {
            return Err(Error::MalformedProfile(format!(
                "no action given for player `{}`",
                self.players[p].id
            )));
        }
        Ok(ActionProfile(indices))
    }

    /// `u_i(a)`, reading only the coordinates in the player's scope.
    pub fn utility(&self, player: usize, profile: &ActionProfile) -> Result<T> {
        if player >= self.players.len() {
            return Err(Error::UnknownPlayer(format!("#{player}")));
        }
        self.check_profile(profile)?;
        Ok(self.utility_unchecked(player, &profile.0).clone())
    }

    pub(crate) fn utility_unchecked(&self, player: usize, profile: &[usize]) -> &T {
        let p = &self.players[player];
        let index: usize = p
            .scope
            .iter()
            .zip(&p.strides)
            .map(|(&q, &stride)| profile[q] * stride)
            .sum();
        &p.table[index]
    }

    /// Number of explicitly stored utility values.
    pub fn representation_size(&self) -> usize {
        self.players.iter().map(|p| p.table.len()).sum()
    }

    /// Same game with every neighborhood widened to all other players.
    pub fn to_standard_form(&self) -> Self {
        let shapes = self.shapes();
        Self::tabulate(GameForm::Standard, shapes, |p, profile| {
            self.utility_unchecked(p, profile).clone()
        })
        .expect("widening a valid game keeps it valid")
    }

    fn shapes(&self) -> Vec<PlayerShape> {
        self.players
            .iter()
            .map(|p| PlayerShape {
                id: p.id.clone(),
                actions: p.actions.clone(),
                neighbors: p.neighbors.clone(),
            })
            .collect()
    }

    /// Extends player 1 with a fresh action `b` such that every profile
    /// `⟨b, a_2, …, a_n⟩` becomes a pure equilibrium while the equilibria of
    /// the original game are kept.
    ///
    /// Player 1 earns, at `b`, the best utility available against the same
    /// opponents' tuple; every other player earns its global maximum. Players
    /// that did not observe player 1 gain it as a neighbor, since their utility
    /// now depends on whether `b` was played.
    pub fn add_universal_action(&self) -> Result<(Self, String)> {
        if self.players.is_empty() {
            return Err(Error::InvalidGame("game has no players".into()));
        }
        let fresh = (1..)
            .map(|c| format!("__b{c}"))
            .find(|id| !self.action_owner.contains_key(id))
            .expect("unbounded counter");
        let b = self.players[0].actions.len();
        let global_max: Vec<T> = self
            .players
            .iter()
            .map(|p| p.table.iter().max().cloned().expect("nonempty table"))
            .collect();

        let mut shapes = self.shapes();
        shapes[0].actions.push(fresh.clone());
        for shape in shapes.iter_mut().skip(1) {
            if self.form == GameForm::Graphical && !shape.neighbors.contains(&0) {
                shape.neighbors.push(0);
            }
        }

        let original_actions = b;
        let game = Self::tabulate(self.form, shapes, |p, profile| {
            if profile[0] != b {
                return self.utility_unchecked(p, profile).clone();
            }
            if p == 0 {
                let mut probe = profile.to_vec();
                (0..original_actions)
                    .map(|a| {
                        probe[0] = a;
                        self.utility_unchecked(0, &probe).clone()
                    })
                    .max()
                    .expect("player has actions")
            } else {
                global_max[p].clone()
            }
        })?;
        Ok((game, fresh))
    }

    /// Stable identifier of the canonical serialization.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        self.serialize().hash(&mut hasher);
        hasher.finish()
    }

    /// Canonical text form accepted by [`parse_game`].
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "game {}", self.form);
        for p in &self.players {
            let _ = writeln!(out, "player {}", p.id);
            let _ = writeln!(out, "  actions {}", p.actions.join(" "));
            if self.form == GameForm::Graphical && !p.neighbors.is_empty() {
                let ids: Vec<&str> = p.neighbors.iter().map(|&q| self.players[q].id.as_str()).collect();
                let _ = writeln!(out, "  neighbors {}", ids.join(" "));
            }
            for (index, value) in p.table.iter().enumerate() {
                let mut rest = index;
                let tuple: Vec<&str> = p
                    .scope
                    .iter()
                    .zip(&p.strides)
                    .map(|(&q, &stride)| {
                        let a = rest / stride;
                        rest %= stride;
                        self.players[q].actions[a].as_str()
                    })
                    .collect();
                let _ = writeln!(out, "  u {} = {}", tuple.join(" "), value);
            }
        }
        out
    }
}

fn strides_for(scope: &[usize], sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; scope.len()];
    for k in (0..scope.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * sizes[scope[k + 1]];
    }
    strides
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let line = line.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(Token {
                    text: &line[s..i],
                    column: s + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    tokens
}

/// Utility line: `(action id, column)` per mentioned action, value, line.
type RawUtility<'a, T> = (Vec<(&'a str, usize)>, T, usize);

struct RawPlayer<'a, T> {
    id: &'a str,
    line: usize,
    actions: Option<Vec<&'a str>>,
    neighbors: Option<Vec<(&'a str, usize, usize)>>,
    utilities: Vec<RawUtility<'a, T>>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the line-oriented game format.
///
/// ```text
/// game graphical            # or: game standard
/// player a
///   actions a1 a2 a3
///   neighbors c             # graphical only
///   u c1 a1 = 10            # one action per scope player, any order
/// ```
pub fn parse_game<T: Scalar>(text: &str) -> Result<Game<T>> {
    let mut form = None;
    let mut players: Vec<RawPlayer<'_, T>> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let tokens = tokenize(line);
        let Some(head) = tokens.first() else { continue };
        match head.text {
            "game" => {
                if form.is_some() {
                    return Err(syntax(lineno, head.column, "duplicate `game` header"));
                }
                if !players.is_empty() {
                    return Err(syntax(lineno, head.column, "`game` header must come first"));
                }
                form = Some(match tokens.get(1).map(|t| t.text) {
                    Some("standard") if tokens.len() == 2 => GameForm::Standard,
                    Some("graphical") if tokens.len() == 2 => GameForm::Graphical,
                    _ => {
                        return Err(syntax(
                            lineno,
                            head.column,
                            "expected `game standard` or `game graphical`",
                        ))
                    }
                });
            }
            "player" => {
                if form.is_none() {
                    return Err(syntax(lineno, head.column, "missing `game` header"));
                }
                if tokens.len() != 2 {
                    return Err(syntax(lineno, head.column, "expected `player <id>`"));
                }
                players.push(RawPlayer {
                    id: tokens[1].text,
                    line: lineno,
                    actions: None,
                    neighbors: None,
                    utilities: Vec::new(),
                });
            }
            "actions" | "neighbors" | "u" => {
                let Some(current) = players.last_mut() else {
                    return Err(syntax(
                        lineno,
                        head.column,
                        format!("`{}` outside a player block", head.text),
                    ));
                };
                match head.text {
                    "actions" => {
                        if current.actions.is_some() {
                            return Err(syntax(lineno, head.column, "duplicate `actions` line"));
                        }
                        if tokens.len() < 2 {
                            return Err(syntax(lineno, head.column, "`actions` needs at least one id"));
                        }
                        current.actions = Some(tokens[1..].iter().map(|t| t.text).collect());
                    }
                    "neighbors" => {
                        if form == Some(GameForm::Standard) {
                            return Err(syntax(
                                lineno,
                                head.column,
                                "`neighbors` is only allowed in graphical games",
                            ));
                        }
                        if current.neighbors.is_some() {
                            return Err(syntax(lineno, head.column, "duplicate `neighbors` line"));
                        }
                        current.neighbors = Some(tokens[1..].iter().map(|t| (t.text, lineno, t.column)).collect());
                    }
                    _ => {
                        let eq = tokens
                            .iter()
                            .position(|t| t.text == "=")
                            .ok_or_else(|| syntax(lineno, head.column, "expected `u <actions> = <value>`"))?;
                        if eq + 2 != tokens.len() {
                            return Err(syntax(lineno, head.column, "expected exactly one value after `=`"));
                        }
                        let value_tok = &tokens[eq + 1];
                        let value = parse_scalar::<T>(value_tok.text).ok_or_else(|| {
                            syntax(
                                lineno,
                                value_tok.column,
                                format!("invalid rational `{}`", value_tok.text),
                            )
                        })?;
                        let tuple = tokens[1..eq].iter().map(|t| (t.text, t.column)).collect();
                        current.utilities.push((tuple, value, lineno));
                    }
                }
            }
            other => {
                return Err(syntax(lineno, head.column, format!("unknown directive `{other}`")));
            }
        }
    }

    let form = form.ok_or_else(|| syntax(1, 1, "missing `game` header"))?;
    if players.is_empty() {
        return Err(Error::InvalidGame("game has no players".into()));
    }

    let ids: HashMap<&str, usize> = players.iter().enumerate().map(|(i, p)| (p.id, i)).collect();
    let mut shapes = Vec::with_capacity(players.len());
    for raw in &players {
        let actions = raw
            .actions
            .as_ref()
            .ok_or_else(|| syntax(raw.line, 1, format!("player `{}` has no `actions` line", raw.id)))?;
        let mut neighbors = Vec::new();
        for &(id, line, column) in raw.neighbors.iter().flatten() {
            let q = *ids
                .get(id)
                .ok_or_else(|| syntax(line, column, format!("unknown neighbor `{id}`")))?;
            neighbors.push(q);
        }
        shapes.push(PlayerShape {
            id: raw.id.to_owned(),
            actions: actions.iter().map(|s| (*s).to_owned()).collect(),
            neighbors,
        });
    }

    // Validates ids, disjointness and neighborhoods; utilities are filled below.
    let skeleton = Game::tabulate(form, shapes.clone(), |_, _| T::zero())?;

    let mut tables: Vec<Vec<Option<T>>> = (0..players.len())
        .map(|p| vec![None; skeleton.players[p].table.len()])
        .collect();
    for (p, raw) in players.iter().enumerate() {
        let info = &skeleton.players[p];
        for (tuple, value, line) in &raw.utilities {
            let mut local = vec![usize::MAX; players.len()];
            for &(id, column) in tuple {
                let (q, a) = skeleton
                    .action_owner(id)
                    .ok_or_else(|| syntax(*line, column, format!("unknown action `{id}`")))?;
                if !info.scope.contains(&q) {
                    return Err(syntax(
                        *line,
                        column,
                        format!("action `{id}` belongs to a player outside the scope of `{}`", raw.id),
                    ));
                }
                if local[q] != usize::MAX {
                    return Err(syntax(
                        *line,
                        column,
                        format!("two actions for player `{}`", players[q].id),
                    ));
                }
                local[q] = a;
            }
            if let Some(&q) = info.scope.iter().find(|&&q| local[q] == usize::MAX) {
                return Err(syntax(
                    *line,
                    1,
                    format!("missing action for player `{}`", players[q].id),
                ));
            }
            let index: usize = info.scope.iter().zip(&info.strides).map(|(&q, &s)| local[q] * s).sum();
            if tables[p][index].is_some() {
                return Err(syntax(*line, 1, "duplicate utility entry"));
            }
            tables[p][index] = Some(value.clone());
        }
        if let Some(missing) = tables[p].iter().position(Option::is_none) {
            return Err(Error::InvalidGame(format!(
                "utility table of player `{}` is not total ({} of {} entries given; first missing entry #{missing})",
                raw.id,
                tables[p].iter().filter(|v| v.is_some()).count(),
                tables[p].len()
            )));
        }
    }

    let mut game = skeleton;
    for (player, table) in game.players.iter_mut().zip(tables) {
        player.table = table.into_iter().map(|v| v.expect("checked total")).collect();
    }
    Ok(game)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::Rational;

    pub const ALICE_BOB: &str = "\
game standard
player alice
  actions a1 a2 a3
  u a1 b1 = 2
  u a1 b2 = 1
  u a1 b3 = 1
  u a2 b1 = 1
  u a2 b2 = 5
  u a2 b3 = 1
  u a3 b1 = 0
  u a3 b2 = 2
  u a3 b3 = 1
player bob
  actions b1 b2 b3
  u a1 b1 = 2
  u a1 b2 = 1
  u a1 b3 = 0
  u a2 b1 = 2
  u a2 b2 = 4
  u a2 b3 = 5
  u a3 b1 = 1
  u a3 b2 = 3
  u a3 b3 = 3
";

    pub const RING: &str = "\
game graphical
player a
  actions a1 a2 a3
  neighbors c
  u c1 a1 = 10
  u c1 a2 = 10
  u c1 a3 = 5
  u c2 a1 = 5
  u c2 a2 = 10
  u c2 a3 = 0
  u c3 a1 = 5
  u c3 a2 = 0
  u c3 a3 = 10
player b
  actions b1 b2 b3
  neighbors a
  u a1 b1 = 10
  u a1 b2 = 5
  u a1 b3 = 0
  u a2 b1 = 10
  u a2 b2 = 10
  u a2 b3 = 5
  u a3 b1 = 5
  u a3 b2 = 0
  u a3 b3 = 10
player c
  actions c1 c2 c3
  neighbors b
  u b1 c1 = 10
  u b1 c2 = 5
  u b1 c3 = 0
  u b2 c1 = 10
  u b2 c2 = 10
  u b2 c3 = 5
  u b3 c1 = 5
  u b3 c2 = 0
  u b3 c3 = 10
";

    pub const PENNIES: &str = "\
game standard
player p
  actions heads tails
  u heads h = 1
  u heads t = -1
  u tails h = -1
  u tails t = 1
player q
  actions h t
  u heads h = -1
  u heads t = 1
  u tails h = 1
  u tails t = -1
";

    pub fn alice_bob() -> Game<Rational> {
        parse_game(ALICE_BOB).unwrap()
    }

    pub fn ring() -> Game<Rational> {
        parse_game(RING).unwrap()
    }

    pub fn pennies() -> Game<Rational> {
        parse_game(PENNIES).unwrap()
    }

    pub fn int(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::Rational;

    fn profile(game: &Game<Rational>, ids: &[&str]) -> ActionProfile {
        game.profile_from_ids(ids).unwrap()
    }

    #[test]
    fn parses_alice_bob() {
        let g = alice_bob();
        assert_eq!(g.num_players(), 2);
        assert_eq!(g.max_actions(), 3);
        assert_eq!(g.form(), GameForm::Standard);
        assert_eq!(g.utility(0, &profile(&g, &["a2", "b2"])).unwrap(), int(5));
        assert_eq!(g.utility(1, &profile(&g, &["a2", "b3"])).unwrap(), int(5));
    }

    #[test]
    fn parses_g2_with_locality() {
        let g = ring();
        assert_eq!(g.num_players(), 3);
        assert_eq!(g.max_neighbors(), 1);
        for b in ["b1", "b2", "b3"] {
            assert_eq!(g.utility(0, &profile(&g, &["a2", b, "c2"])).unwrap(), int(10));
        }
    }

    #[test]
    fn representation_sizes() {
        let g = ring();
        assert_eq!(g.representation_size(), 27);
        assert_eq!(g.to_standard_form().representation_size(), 81);
        let single = Game::tabulate(GameForm::Standard, vec![PlayerShape::new("solo", ["x"])], |_, _| int(3)).unwrap();
        assert_eq!(single.representation_size(), 1);
    }

    #[test]
    fn standard_widening_preserves_utilities() {
        let g = ring();
        let wide = g.to_standard_form();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let p = ActionProfile(vec![a, b, c]);
                    for i in 0..3 {
                        assert_eq!(g.utility(i, &p).unwrap(), wide.utility(i, &p).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_shared_action_ids() {
        let text = "game standard\nplayer p\n  actions x y\n  u x x = 1\nplayer q\n  actions x\n";
        let err = parse_game::<Rational>(text).unwrap_err();
        assert!(
            matches!(err, Error::InvalidGame(ref m) if m.contains("duplicate action")),
            "{err}"
        );
    }

    #[test]
    fn rejects_self_neighborhood() {
        let text = "game graphical\nplayer p\n  actions x\n  neighbors p\n  u x = 1\n";
        let err = parse_game::<Rational>(text).unwrap_err();
        assert!(
            matches!(err, Error::InvalidGame(ref m) if m.contains("itself")),
            "{err}"
        );
    }

    #[test]
    fn rejects_partial_table() {
        let text = "game standard\nplayer p\n  actions x y\n  u x = 1\n";
        let err = parse_game::<Rational>(text).unwrap_err();
        assert!(
            matches!(err, Error::InvalidGame(ref m) if m.contains("not total")),
            "{err}"
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_game::<Rational>("game standard\nplayer p\n  actions x\n  u x = 1/0\n").unwrap_err();
        assert_eq!(
            err,
            Error::Syntax {
                line: 4,
                column: 9,
                message: "invalid rational `1/0`".into()
            }
        );
        let err = parse_game::<Rational>("game standard\nbogus\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, column: 1, .. }));
        let err = parse_game::<Rational>("game standard\n").unwrap_err();
        assert!(matches!(err, Error::InvalidGame(_)));
        let err = parse_game::<Rational>("game standard\nplayer p\n actions x\n neighbors p\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 4, .. }));
    }

    #[test]
    fn serialization_round_trips() {
        for text in [ALICE_BOB, RING, PENNIES] {
            let g: Game<Rational> = parse_game(text).unwrap();
            let again: Game<Rational> = parse_game(&g.serialize()).unwrap();
            assert_eq!(g, again);
            assert_eq!(g.serialize(), again.serialize());
        }
    }

    #[test]
    fn universal_action_on_single_player() {
        let g = Game::tabulate(
            GameForm::Standard,
            vec![PlayerShape::new("solo", ["x", "y"])],
            |_, p| int(p[0] as i64 * 4 + 1),
        )
        .unwrap();
        let (star, b) = g.add_universal_action().unwrap();
        assert_eq!(b, "__b1");
        let pb = profile(&star, &["__b1"]);
        assert_eq!(star.utility(0, &pb).unwrap(), int(5));
    }

    #[test]
    fn universal_action_id_avoids_collisions() {
        let g = Game::tabulate(GameForm::Standard, vec![PlayerShape::new("solo", ["__b1"])], |_, _| {
            int(0)
        })
        .unwrap();
        let (_, b) = g.add_universal_action().unwrap();
        assert_eq!(b, "__b2");
    }

    #[test]
    fn universal_action_widens_graphical_neighborhoods() {
        let (star, _) = ring().add_universal_action().unwrap();
        assert_eq!(star.num_actions(0), 4);
        assert!(star.neighbors(1).contains(&0));
        assert!(star.neighbors(2).contains(&0));
    }
}

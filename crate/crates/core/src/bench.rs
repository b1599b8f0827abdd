//! Random observable games and timing sweeps over the number of constraints.
//!
//! The generator draws a graphical game with uniformly random utilities and
//! random atomic constraints `P(action) ≤ c/100` or `P(action) ≥ c/100`.
//! Every instance has its own ChaCha stream keyed by `(n, index)`, so the
//! instance stream does not depend on thread scheduling.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coherence::{decide_pure_coherence, CoherenceOptions, CoherencePath, Mode, ObservableGame, PceConstraint};
use crate::error::{Error, Result};
use crate::game::{Game, GameForm, PlayerShape};
use crate::mixed::decide_mixed_coherence;
use crate::psat::Formula;
use crate::scalar::Scalar;
use crate::simplex::Relation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub players: Vec<usize>,
    pub actions: usize,
    /// Upper bound on each player's neighborhood size.
    pub neighbors: usize,
    pub constraints: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub time_limit: Duration,
    pub mode: Mode,
    pub path: CoherencePath,
    /// Inclusive range of integer utilities.
    pub utility: (i64, i64),
    /// Cells with more constraints extend the constraint lists of cells with
    /// fewer, instead of drawing fresh ones.
    pub accumulate: bool,
    /// Untimed runs before each cell.
    pub warmup: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            players: vec![3],
            actions: 2,
            neighbors: 1,
            constraints: (0..=8).collect(),
            instances: 20,
            seed: 1,
            time_limit: Duration::from_secs(10),
            mode: Mode::Pure,
            path: CoherencePath::Direct,
            utility: (0, 1),
            accumulate: true,
            warmup: 1,
        }
    }
}

impl SweepConfig {
    /// Parses the line-oriented config format, e.g.
    ///
    /// ```text
    /// players 3 4
    /// actions 2
    /// neighbors 1
    /// constraints 0..8
    /// instances 50
    /// seed 7
    /// time-limit-ms 2000
    /// mode pure
    /// path direct
    /// utility 0 1
    /// accumulate true
    /// warmup 2
    /// ```
    ///
    /// Omitted keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or_default();
            let values: Vec<&str> = words.collect();
            let err = |message: String| Error::Syntax {
                line: i + 1,
                column: 1,
                message,
            };
            let single = || -> Result<&str> {
                match values.as_slice() {
                    [v] => Ok(*v),
                    _ => Err(err(format!("`{key}` takes exactly one value"))),
                }
            };
            let number = |v: &str| v.parse::<usize>().map_err(|_| err(format!("invalid count `{v}`")));
            match key {
                "players" => config.players = parse_counts(&values).map_err(err)?,
                "constraints" => config.constraints = parse_counts(&values).map_err(err)?,
                "actions" => config.actions = number(single()?)?,
                "neighbors" => config.neighbors = number(single()?)?,
                "instances" => config.instances = number(single()?)?,
                "warmup" => config.warmup = number(single()?)?,
                "seed" => {
                    let v = single()?;
                    config.seed = v.parse().map_err(|_| err(format!("invalid seed `{v}`")))?;
                }
                "time-limit-ms" => config.time_limit = Duration::from_millis(number(single()?)? as u64),
                "mode" => {
                    config.mode = match single()? {
                        "pure" => Mode::Pure,
                        "mixed" => Mode::Mixed,
                        other => return Err(err(format!("unknown mode `{other}`"))),
                    }
                }
                "path" => {
                    config.path = match single()? {
                        "direct" => CoherencePath::Direct,
                        "psat" => CoherencePath::Psat,
                        "cg" => CoherencePath::Cg,
                        other => return Err(err(format!("unknown path `{other}`"))),
                    }
                }
                "utility" => match values.as_slice() {
                    [lo, hi] => {
                        let lo = lo.parse().map_err(|_| err(format!("invalid utility `{lo}`")))?;
                        let hi = hi.parse().map_err(|_| err(format!("invalid utility `{hi}`")))?;
                        config.utility = (lo, hi);
                    }
                    _ => return Err(err("`utility` takes a lower and an upper bound".into())),
                },
                "accumulate" => {
                    config.accumulate = match single()? {
                        "true" => true,
                        "false" => false,
                        other => return Err(err(format!("expected true or false, found `{other}`"))),
                    }
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.players.is_empty() || self.players.contains(&0) {
            return bad("player counts must be positive");
        }
        if self.actions == 0 || self.instances == 0 {
            return bad("actions and instances must be positive");
        }
        if self.constraints.is_empty() {
            return bad("at least one constraint count is required");
        }
        if self.utility.0 > self.utility.1 {
            return bad("utility range is empty");
        }
        if self.mode == Mode::Mixed && self.players.iter().any(|&n| n != 2) {
            return bad("mixed mode sweeps require exactly 2 players");
        }
        if self.mode == Mode::Mixed && self.path == CoherencePath::Psat {
            return bad("the psat path is only available in pure mode");
        }
        Ok(())
    }

    fn max_constraints(&self) -> usize {
        self.constraints.iter().copied().max().unwrap_or(0)
    }
}

/// Accepts `a..b` (inclusive) or a list of counts.
fn parse_counts(values: &[&str]) -> std::result::Result<Vec<usize>, String> {
    let parse = |v: &str| v.parse::<usize>().map_err(|_| format!("invalid count `{v}`"));
    match values {
        [range] if range.contains("..") => {
            let (lo, hi) = range.split_once("..").unwrap();
            let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("empty range `{range}`"));
            }
            Ok((lo..=hi).collect())
        }
        [] => Err("expected at least one count".into()),
        values => values.iter().map(|v| parse(v)).collect(),
    }
}

fn instance_rng(seed: u64, players: usize, cell: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((players as u64) << 48) ^ (cell << 32) ^ index as u64);
    rng
}

fn random_game<T: Scalar>(rng: &mut ChaCha8Rng, n: usize, config: &SweepConfig) -> Game<T> {
    let shapes: Vec<PlayerShape> = (0..n)
        .map(|p| {
            let id = format!("p{p}");
            let actions = (0..config.actions).map(|a| format!("{id}_{a}")).collect::<Vec<_>>();
            let k = config.neighbors.min(n - 1);
            let neighbors = sample(rng, n - 1, k)
                .into_iter()
                .map(|q| if q >= p { q + 1 } else { q })
                .collect();
            PlayerShape { id, actions, neighbors }
        })
        .collect();
    let (lo, hi) = config.utility;
    Game::tabulate(GameForm::Graphical, shapes, |_, _| T::from_i64(rng.gen_range(lo..=hi)))
        .expect("generated games are well formed")
}

fn random_constraint<T: Scalar>(rng: &mut ChaCha8Rng, game: &Game<T>) -> PceConstraint<T> {
    let actions = game.all_actions();
    let atom = actions[rng.gen_range(0..actions.len())].clone();
    let relation = if rng.gen_bool(0.5) { Relation::Le } else { Relation::Ge };
    let bound = T::from_ratio(rng.gen_range(0..=100), 100);
    PceConstraint::new(Formula::Atom(atom), relation, bound).expect("bounds lie in [0, 1]")
}

/// Instance `index` of the cell with `n` players and `constraints`
/// constraints. With `accumulate`, the constraints are a prefix of the
/// instance's list for the largest count.
pub fn generate_instance<T: Scalar>(
    config: &SweepConfig,
    n: usize,
    constraints: usize,
    index: usize,
) -> ObservableGame<T> {
    let cell = if config.accumulate { 0 } else { constraints as u64 + 1 };
    let mut rng = instance_rng(config.seed, n, cell, index);
    let game = random_game(&mut rng, n, config);
    let drawn = if config.accumulate {
        config.max_constraints().max(constraints)
    } else {
        constraints
    };
    let mut list: Vec<_> = (0..drawn).map(|_| random_constraint(&mut rng, &game)).collect();
    list.truncate(constraints);
    ObservableGame::new(game, list, config.mode).expect("constraints reference generated actions")
}

/// Coherence verdict of one instance under the configured path.
pub fn decide_instance<T: Scalar>(config: &SweepConfig, observable: &ObservableGame<T>) -> Result<bool> {
    Ok(match config.mode {
        Mode::Pure => decide_pure_coherence(observable, config.path, &CoherenceOptions::default())?
            .verdict
            .is_coherent(),
        Mode::Mixed => decide_mixed_coherence(observable, config.path)?.verdict.is_coherent(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub mode: &'static str,
    pub n: usize,
    pub s: usize,
    pub k: usize,
    #[serde(rename = "K")]
    pub constraints: usize,
    pub instances: usize,
    pub coherent_frac: f64,
    pub mean_ms: f64,
    pub median_ms: f64,
    /// Instances whose decision took longer than the time limit. Their
    /// verdicts still count toward `coherent_frac`.
    pub timeouts: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub row: SweepRow,
    pub verdicts: Vec<bool>,
}

pub fn run_cell<T: Scalar>(config: &SweepConfig, n: usize, constraints: usize) -> Result<CellResult> {
    for index in 0..config.warmup.min(config.instances) {
        decide_instance(config, &generate_instance::<T>(config, n, constraints, index))?;
    }
    let runs = (0..config.instances)
        .into_par_iter()
        .map(|index| {
            let observable = generate_instance::<T>(config, n, constraints, index);
            let start = Instant::now();
            let verdict = decide_instance(config, &observable)?;
            Ok((verdict, start.elapsed()))
        })
        .collect::<Result<Vec<_>>>()?;
    let verdicts: Vec<bool> = runs.iter().map(|r| r.0).collect();
    let mut times: Vec<f64> = runs.iter().map(|r| r.1.as_secs_f64() * 1e3).collect();
    let round = |ms: f64| (ms * 1e3).round() / 1e3;
    times.sort_by(f64::total_cmp);
    let count = times.len();
    let median = if count % 2 == 1 {
        times[count / 2]
    } else {
        (times[count / 2 - 1] + times[count / 2]) / 2.0
    };
    let row = SweepRow {
        mode: match config.mode {
            Mode::Pure => "pure",
            Mode::Mixed => "mixed",
        },
        n,
        s: config.actions,
        k: config.neighbors.min(n - 1),
        constraints,
        instances: count,
        coherent_frac: verdicts.iter().filter(|&&v| v).count() as f64 / count as f64,
        mean_ms: round(times.iter().sum::<f64>() / count as f64),
        median_ms: round(median),
        timeouts: runs.iter().filter(|r| r.1 > config.time_limit).count(),
        seed: config.seed,
    };
    Ok(CellResult { row, verdicts })
}

/// One cell per (player count, constraint count), in config order.
pub fn run_sweep<T: Scalar>(config: &SweepConfig) -> Result<Vec<CellResult>> {
    config.validate()?;
    let mut cells = Vec::new();
    for &n in &config.players {
        for &k in &config.constraints {
            cells.push(run_cell::<T>(config, n, k)?);
        }
    }
    Ok(cells)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)
            .map_err(|e| Error::InvalidConfig(format!("csv output failed: {e}")))?;
    }
    out.flush()
        .map_err(|e| Error::InvalidConfig(format!("csv output failed: {e}")))?;
    Ok(())
}

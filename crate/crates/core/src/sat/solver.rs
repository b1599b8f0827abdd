//! Complete backtracking SAT search with unit propagation over two watched
//! literals.
//!
//! Branching is deterministic: the lowest-indexed unassigned variable is tried
//! `true` first. Conflicts backtrack chronologically to the most recent
//! decision whose opposite phase has not been explored yet.

use super::{Lit, Valuation};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

#[derive(Clone, Debug)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    units: Vec<Lit>,
    has_empty: bool,
    assignment: Vec<Option<bool>>,
    trail: Vec<Lit>,
    queue_head: usize,
    pub stats: SolverStats,
}

struct Level {
    trail_start: usize,
    decision: Lit,
    flipped: bool,
}

#[inline]
fn code(lit: Lit) -> usize {
    2 * (lit.unsigned_abs() as usize - 1) + usize::from(lit < 0)
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            units: Vec::new(),
            has_empty: false,
            assignment: vec![None; num_vars],
            trail: Vec::new(),
            queue_head: 0,
            stats: SolverStats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Adds fresh variables and returns the first new index.
    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.assignment.push(None);
        self.num_vars as Lit
    }

    pub fn add_clause(&mut self, literals: &[Lit]) {
        let mut lits: Vec<Lit> = Vec::with_capacity(literals.len());
        for &l in literals {
            assert!(
                l != 0 && (l.unsigned_abs() as usize) <= self.num_vars,
                "literal {l} out of range"
            );
            if !lits.contains(&l) {
                lits.push(l);
            }
        }
        if lits.iter().any(|&l| lits.contains(&-l)) {
            return;
        }
        match lits.len() {
            0 => self.has_empty = true,
            1 => self.units.push(lits[0]),
            _ => {
                let index = self.clauses.len();
                self.watches[code(lits[0])].push(index);
                self.watches[code(lits[1])].push(index);
                self.clauses.push(lits);
            }
        }
    }

    #[inline]
    fn value(&self, lit: Lit) -> Option<bool> {
        self.assignment[lit.unsigned_abs() as usize - 1].map(|v| v == (lit > 0))
    }

    /// Returns false when `lit` is already false.
    fn enqueue(&mut self, lit: Lit) -> bool {
        match self.value(lit) {
            Some(v) => v,
            None => {
                self.assignment[lit.unsigned_abs() as usize - 1] = Some(lit > 0);
                self.trail.push(lit);
                true
            }
        }
    }

    /// Runs unit propagation; returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.queue_head < self.trail.len() {
            let falsified = -self.trail[self.queue_head];
            self.queue_head += 1;
            self.stats.propagations += 1;
            let mut watchers = std::mem::take(&mut self.watches[code(falsified)]);
            let mut kept = 0;
            let mut conflict = false;
            let mut i = 0;
            while i < watchers.len() {
                let ci = watchers[i];
                i += 1;
                if conflict {
                    watchers[kept] = ci;
                    kept += 1;
                    continue;
                }
                if self.clauses[ci][0] == falsified {
                    self.clauses[ci].swap(0, 1);
                }
                let first = self.clauses[ci][0];
                if self.value(first) == Some(true) {
                    watchers[kept] = ci;
                    kept += 1;
                    continue;
                }
                let replacement = (2..self.clauses[ci].len()).find(|&k| self.value(self.clauses[ci][k]) != Some(false));
                if let Some(k) = replacement {
                    self.clauses[ci].swap(1, k);
                    let new_watch = self.clauses[ci][1];
                    self.watches[code(new_watch)].push(ci);
                    continue;
                }
                watchers[kept] = ci;
                kept += 1;
                if !self.enqueue(first) {
                    conflict = true;
                }
            }
            watchers.truncate(kept);
            let slot = &mut self.watches[code(falsified)];
            // clauses that started watching `falsified` during this pass
            watchers.append(slot);
            *slot = watchers;
            if conflict {
                self.stats.conflicts += 1;
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, len: usize) {
        for lit in self.trail.drain(len..) {
            self.assignment[lit.unsigned_abs() as usize - 1] = None;
        }
        self.queue_head = self.trail.len();
    }

    /// Finds a total assignment satisfying every clause and every assumption,
    /// or `None` when none exists.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Option<Valuation> {
        self.undo_to(0);
        if self.has_empty {
            return None;
        }
        let roots: Vec<Lit> = self.units.iter().chain(assumptions).copied().collect();
        for lit in roots {
            if !self.enqueue(lit) {
                return None;
            }
        }
        if !self.propagate() {
            return None;
        }

        let mut levels: Vec<Level> = Vec::new();
        let mut next_var = 0usize;
        loop {
            while next_var < self.num_vars && self.assignment[next_var].is_some() {
                next_var += 1;
            }
            if next_var == self.num_vars {
                let model = self.assignment.iter().map(|v| v.expect("total")).collect();
                return Some(Valuation(model));
            }
            let decision = (next_var + 1) as Lit;
            self.stats.decisions += 1;
            levels.push(Level {
                trail_start: self.trail.len(),
                decision,
                flipped: false,
            });
            self.enqueue(decision);
            while !self.propagate() {
                loop {
                    let level = levels.pop()?;
                    self.undo_to(level.trail_start);
                    if !level.flipped {
                        levels.push(Level {
                            trail_start: level.trail_start,
                            decision: -level.decision,
                            flipped: true,
                        });
                        self.enqueue(-level.decision);
                        break;
                    }
                }
            }
            next_var = 0;
        }
    }
}

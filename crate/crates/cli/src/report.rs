use std::fmt::Write as _;

use pce_core::coherence::{CoherenceStats, CoherenceWitness};
use pce_core::extension::{EquilibriumWitness, Probe};
use pce_core::game::Game;
use pce_core::mixed::MixedProfile;
use pce_core::scalar::to_decimal;
use pce_core::{ActionProfile, Rational};
use serde::Serialize;

/// The document printed on stdout for every invocation.
#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub command: Option<&'static str>,
    /// `coherent`, `incoherent`, `no-equilibrium` or `value`; absent for
    /// commands that do not decide anything.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Number>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[Number; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<ProbeEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<serde_json::Value>,
    pub stats: Stats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Default, Serialize)]
pub struct Stats {
    pub equilibria: Option<usize>,
    pub lp_pivots: usize,
    pub sat_calls: u64,
    pub sat_decisions: u64,
    pub oracle_calls: usize,
    pub wall_ms: f64,
}

impl Stats {
    pub fn absorb(&mut self, stats: &CoherenceStats) {
        self.equilibria = stats.equilibria.or(self.equilibria);
        self.lp_pivots += stats.lp_pivots;
        self.sat_calls += stats.sat_calls;
        self.sat_decisions += stats.sat_decisions;
        self.oracle_calls += stats.oracle_calls;
    }
}

/// An exact value with a decimal rendering when one exists.
#[derive(Debug, Serialize)]
pub struct Number {
    pub exact: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decimal: Option<String>,
}

impl From<&Rational> for Number {
    fn from(value: &Rational) -> Self {
        Self {
            exact: value.to_string(),
            decimal: to_decimal(value),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessEntry {
    pub equilibrium: String,
    pub probability: String,
}

#[derive(Debug, Serialize)]
pub struct ProbeEntry {
    pub constraint: String,
    pub coherent: bool,
}

pub fn pure_witness(game: &Game<Rational>, w: &CoherenceWitness<Rational, ActionProfile>) -> Vec<WitnessEntry> {
    w.support
        .iter()
        .zip(&w.probabilities)
        .map(|(e, p)| WitnessEntry {
            equilibrium: e.display(game),
            probability: p.to_string(),
        })
        .collect()
}

pub fn mixed_witness(
    game: &Game<Rational>,
    w: &CoherenceWitness<Rational, MixedProfile<Rational>>,
) -> Vec<WitnessEntry> {
    w.support
        .iter()
        .zip(&w.probabilities)
        .map(|(e, p)| WitnessEntry {
            equilibrium: e.display(game),
            probability: p.to_string(),
        })
        .collect()
}

pub fn any_witness(game: &Game<Rational>, w: &EquilibriumWitness<Rational>) -> Vec<WitnessEntry> {
    match w {
        EquilibriumWitness::Pure(w) => pure_witness(game, w),
        EquilibriumWitness::Mixed(w) => mixed_witness(game, w),
    }
}

pub fn probes(target: &str, probes: &[Probe<Rational>]) -> Vec<ProbeEntry> {
    probes
        .iter()
        .map(|p| ProbeEntry {
            constraint: format!("P({target}) {} {}", p.relation, p.value),
            coherent: p.coherent,
        })
        .collect()
}

impl RunReport {
    /// The human-readable rendering written to stderr.
    pub fn human(&self) -> String {
        let mut out = String::new();
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error: {e}");
            return out;
        }
        if let Some(v) = self.verdict {
            let _ = writeln!(out, "verdict: {v}");
        }
        if let Some(v) = &self.value {
            match &v.decimal {
                Some(d) => {
                    let _ = writeln!(out, "value: {} ({d})", v.exact);
                }
                None => {
                    let _ = writeln!(out, "value: {}", v.exact);
                }
            }
        }
        if let Some([lo, hi]) = &self.bracket {
            let _ = writeln!(out, "bracket: [{}, {}]", lo.exact, hi.exact);
        }
        if let Some(eq) = &self.equilibria {
            let _ = writeln!(out, "equilibria: {}", eq.len());
            for e in eq {
                let _ = writeln!(out, "  {e}");
            }
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness:");
            for entry in w {
                let _ = writeln!(out, "  {}  {}", entry.probability, entry.equilibrium);
            }
        }
        if let Some(probes) = &self.probes {
            let _ = writeln!(out, "probes:");
            for (i, p) in probes.iter().enumerate() {
                let answer = if p.coherent { "yes" } else { "no" };
                let _ = writeln!(out, "  {}. {}  {answer}", i + 1, p.constraint);
            }
        }
        if let Some(o) = &self.output {
            if let Some(h) = o["header"].as_str() {
                let _ = writeln!(out, "{h}");
            }
            if let Some(rows) = o["rows"].as_array() {
                let _ = writeln!(out, "n K coherent_frac mean_ms");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{} {} {} {:.3}",
                        r["n"],
                        r["K"],
                        r["coherent_frac"],
                        r["mean_ms"].as_f64().unwrap_or(f64::NAN)
                    );
                }
            }
            if let Some(f) = o["file"].as_str() {
                let _ = writeln!(out, "wrote {f}");
            }
        }
        if self.degenerate == Some(true) {
            let _ = writeln!(
                out,
                "note: degenerate game, equilibria may form continua between listed points"
            );
        }
        if let Some(n) = &self.note {
            let _ = writeln!(out, "note: {n}");
        }
        let s = &self.stats;
        let _ = writeln!(
            out,
            "stats: equilibria={} lp_pivots={} sat_calls={} sat_decisions={} oracle_calls={} wall_ms={:.3}",
            s.equilibria.map_or("-".to_string(), |e| e.to_string()),
            s.lp_pivots,
            s.sat_calls,
            s.sat_decisions,
            s.oracle_calls,
            s.wall_ms
        );
        out
    }
}

//! Exact solvers for probabilistic constraints on Nash equilibria.
//!
//! An *observable game* pairs a finite game with constraints `P(φ) ⋈ p` on the
//! probability that a formula over actions holds at the equilibrium that will
//! be reached. This crate decides whether such constraints are coherent (some
//! distribution over equilibria satisfies them all) and computes the tightest
//! coherent bounds for a target formula, for pure equilibria of games in
//! standard or graphical normal form and for mixed equilibria of two-player
//! games.
//!
//! All arithmetic is exact. Solvers are generic over [`Scalar`]; the aliases
//! below fix the arbitrary-precision [`Rational`] used by the command line.

pub mod bench;
pub mod coherence;
pub mod error;
pub mod extension;
pub mod game;
pub mod linalg;
pub mod mixed;
pub mod psat;
pub mod pure;
pub mod sat;
pub mod scalar;
pub mod simplex;

pub use coherence::{CoherencePath, Mode, ObservableGame, PceConstraint};
pub use error::{Error, Result};
pub use extension::{Direction, ExtensionQuery};
pub use game::{parse_game, ActionProfile, GameForm, PlayerShape};
pub use psat::{parse_constraints, parse_formula, Formula};
pub use scalar::Scalar;
pub use simplex::Relation;

/// Arbitrary-precision rational; the default scalar.
pub type Rational = num_rational::BigRational;
/// Machine-word rational for small instances.
pub type Rational64 = num_rational::Rational64;

pub type Game = game::Game<Rational>;
pub type Observable = coherence::ObservableGame<Rational>;
pub type MixedProfile = mixed::MixedProfile<Rational>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("unknown player `{0}`")]
    UnknownPlayer(String),

    #[error("malformed action profile: {0}")]
    MalformedProfile(String),

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("{profiles} action profiles exceed the enumeration cap of {cap}")]
    ProfileCap { profiles: u128, cap: u128 },

    #[error("{atoms} atoms exceed the enumeration cap of {cap}")]
    AtomCap { atoms: usize, cap: usize },

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("invalid linear system: {0}")]
    InvalidSystem(String),

    #[error("initial basis is singular or infeasible")]
    BadBasis,

    #[error("entering column has positive reduced cost {0}")]
    RejectedColumn(String),

    #[error("entering column yields an unbounded direction")]
    Unbounded,

    #[error("column generation exceeded {0} iterations")]
    IterationLimit(usize),

    #[error("game has {0} players; mixed-equilibrium routines require exactly 2")]
    NotTwoPlayer(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("base observable game is not coherent")]
    IncoherentBase,

    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
}

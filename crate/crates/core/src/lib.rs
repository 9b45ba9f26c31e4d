//! Exact-arithmetic toolkit for the assignment problem: `n` agents with
//! strict ordinal preferences over `n` unit-supply items.
//!
//! The crate provides three layers:
//!
//! - **Mechanisms**: round-based lottery mechanisms ([`mechanisms::lottery`]:
//!   eager Boston, adaptive Boston, classic Boston, random priority) and
//!   continuous-consumption mechanisms ([`mechanisms::eating`]: the
//!   respecting-eagerness family, its uniform member, probabilistic serial),
//!   each with single-run and exact-expectation modes.
//! - **Property checkers** ([`properties`], [`strategy`]): every efficiency,
//!   fairness, and strategyproofness axiom gets a verdict plus a concrete
//!   witness on failure.
//! - **Oracles** ([`oracles`], [`fixtures`]): brute-force enumeration, exact
//!   convex-hull feasibility, and replayable audits of small worked instances.
//!
//! All probabilities and shares are arbitrary-precision rationals; there are
//! no tolerance parameters anywhere. Every function is a pure function of
//! immutable inputs and safe to call concurrently.

pub mod bvn;
pub mod documents;
pub mod dominance;
pub mod fixtures;
pub mod lp;
pub mod mechanisms;
pub mod model;
pub mod oracles;
pub mod properties;
pub mod rational;
pub mod strategy;

pub use model::{
    Agent, AgentSet, Budget, ConvexDecomposition, DeterministicAssignment, Item, ItemSet,
    PriorityDistribution, PriorityOrder, Profile, RandomAssignment,
};
pub use rational::{rat, Rat};

/// Errors shared across the crate. Input errors map to CLI exit code 2,
/// budget errors to exit code 3.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("unknown agent id `{0}`")]
    UnknownAgent(String),
    #[error("unknown item id `{0}`")]
    UnknownItem(String),
    #[error("item subset is empty")]
    EmptySubset,
    #[error("rankings do not cover the same item set")]
    MismatchedItems,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("assignment is not a bijection from agents to items")]
    NotBijective,
    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
    #[error("invalid rational `{0}`")]
    InvalidRational(String),
    #[error("invalid eating speeds: {0}")]
    InvalidSpeeds(String),
    #[error("invalid priority: {0}")]
    InvalidPriority(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("{what} exceeds the configured budget of {bound}")]
    BudgetExceeded { what: &'static str, bound: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

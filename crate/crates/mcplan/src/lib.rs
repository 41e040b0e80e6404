//! Monte-Carlo online planning toolkit for finite-horizon MDPs.
//!
//! The crate bundles four pieces that are usually scattered across research
//! code bases:
//!
//! - **Planners** ([`planners`]): online Monte-Carlo planners oriented toward
//!   *simple regret* — the quality of the single action recommended at the
//!   root once the sampling budget is spent. Implemented: UCT, ε-greedy+UCT,
//!   the BRUE family (strict, windowed-average `BRUE(α)`, permissive-update
//!   `BRUE_per(α)`), and the flat-policy baselines `NaiveUniform` and
//!   `CraftyUniform`.
//! - **Domains** ([`domains`]): a stochastic sailing domain on an 8-connected
//!   grid, lazily generated two-player random game trees, and small
//!   table-driven MDPs for exhaustive analysis.
//! - **Oracles** ([`oracle`]): exact finite-horizon value iteration and game
//!   tree minimax, used to score planner recommendations, plus extraction of
//!   the model parameters that drive the analytic bounds.
//! - **Theory lab** ([`theory`]): log-space calculators for the
//!   exponential-decay regret bound constants, the uniform-sampling baseline
//!   bounds, and a Monte-Carlo soundness check for a Hoeffding–Azuma
//!   inequality variant that tolerates a decaying rate of conditional-mean
//!   contamination.
//!
//! Everything randomized draws from explicitly keyed [`rng::RngStream`]s, so
//! every experiment — including multi-threaded benchmark runs — replays
//! byte-identically from a master seed.

pub mod bench;
pub mod domains;
pub mod mdp;
pub mod oracle;
pub mod planners;
pub mod rng;
pub mod stats;
pub mod theory;

/// Errors shared across the toolkit.
///
/// The CLI maps [`Error::Config`] to exit code 2 and [`Error::ResourceCap`]
/// to exit code 3; everything else exits 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (bad flag values, malformed
    /// config files, out-of-range model parameters).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A guard against runaway enumeration or table growth fired.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    /// A caller or policy broke an interface contract (for example, a rollout
    /// policy returned an action that is not applicable in the current state).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The sampling budget was too small to produce a recommendation.
    #[error("insufficient budget: {0}")]
    InsufficientBudget(String),

    /// A model was degenerate for the requested analysis (for example, a
    /// zero minimal action gap where a bound requires a positive one).
    #[error("degenerate model: {0}")]
    Degenerate(String),

    /// Underlying I/O failure (oracle cache files, CSV output).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::ResourceCap(_) => 3,
            _ => 1,
        }
    }
}

//! Analytic bound calculators and empirical concentration checks.
//!
//! [`bounds`] evaluates, in natural-log space, the regret and error-rate
//! bounds that come with this toolkit's planners: the flat-policy baselines'
//! Hoeffding-style bounds with their transition-period thresholds, and the
//! switch-based planner's exponential-decay constants (the global pair
//! `c, c'` plus the per-level chain they are assembled from).
//!
//! [`azuma`] stress-tests the concentration inequalities behind those
//! constants: tail bounds for means of `[0, h]`-valued sequences whose
//! conditional means may be contaminated with geometrically decaying
//! probability, in a full-mean and a windowed-mean (newest fraction α)
//! variant. The checks are Monte-Carlo: a documented generator meets the
//! inequalities' hypotheses by construction, and observed tail frequencies
//! are compared against the analytic bounds with Clopper-Pearson confidence
//! intervals.
//!
//! Everything here is deterministic given an [`RngStream`](crate::rng::RngStream).

pub mod azuma;
pub mod bounds;

pub use azuma::{
    check_tails, contaminated_stream, full_mean_bound, full_mean_bound_tuned, window_mean_bound,
    Tail, TailCheckRow, TailScenario,
};
pub use bounds::{bound_constants, flat_bounds, ln_factorial, BoundConstants, FlatBounds, LevelConstants};

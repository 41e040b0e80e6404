//! Planning domains.
//!
//! - [`table`]: small explicit-table MDPs, fully enumerable; used for
//!   exhaustive analysis and the uniform-sampling baseline experiments.
//! - [`sailing`]: stochastic shortest-path navigation on an 8-connected grid
//!   with drifting wind.
//! - [`gametree`]: lazily generated two-player zero-sum random game trees.

pub mod gametree;
pub mod sailing;
pub mod table;

pub use gametree::{GameTreeMdp, GameTreeSpec};
pub use sailing::{SailingConfig, SailingMdp, Tack};
pub use table::TableMdp;

//! Benchmark harness: configuration, execution, and CSV reporting.
//!
//! The harness turns a resolved configuration plus a master seed into rows —
//! per-call details and per-cell summaries for the planning benchmarks,
//! aggregate rows for the flat-baseline comparison and the concentration
//! checks — and renders them as CSV with a metadata preamble identifying
//! the exact run. Everything is deterministic in (configuration, seed);
//! see [`runner`] for the stream-derivation scheme that keeps serial and
//! parallel executions byte-identical.

pub mod config;
pub mod csvout;
pub mod runner;

pub use config::{
    config_hash, resolved_toml, AzumaBench, AzumaFlags, BoundsFlags, BoundsQuery, FileConfig,
    GameTreeBench, GameTreeFlags, SailingBench, SailingFlags, SandboxBench, SandboxFlags,
    DEFAULT_SEED,
};
pub use csvout::{config_meta, float_field, CsvDoc};
pub use runner::{
    azuma_csv, bench_csv, bounds_csv, run_azuma, run_gametree, run_sailing, run_sandbox,
    sandbox_csv, BenchOutput, DetailRow, SandboxOutput, SandboxRow, SummaryRow,
};

//! Benchmark configuration: defaults, TOML file layer, and flag merging.
//!
//! Every run is described by a small resolved struct per subcommand. Values
//! come from three layers, highest priority first: command-line flags, a
//! TOML config file (`--config FILE`), and built-in defaults. The *resolved*
//! configuration is serialized back to TOML — with a stable field order —
//! and embedded in the CSV metadata together with its SHA-256 hash, so every
//! output file names the exact experiment that produced it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::planners::PlannerSpec;
use crate::{Error, Result};

/// Master seed used when neither flag nor file provides one.
pub const DEFAULT_SEED: u64 = 1;

/// Raw contents of a `--config` TOML file; every field optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub timing: Option<bool>,
    pub out: Option<PathBuf>,
    pub sailing: Option<SailingSection>,
    pub gametree: Option<GameTreeSection>,
    pub sandbox: Option<SandboxSection>,
    pub azuma: Option<AzumaSection>,
    pub bounds: Option<BoundsSection>,
}

impl FileConfig {
    /// Parse a TOML config file; unknown keys are configuration errors.
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SailingSection {
    pub grid: Option<u32>,
    pub budgets: Option<Vec<u64>>,
    pub trials: Option<u64>,
    pub algorithms: Option<Vec<String>>,
    pub cell_cap: Option<u64>,
    pub rollout_cap_factor: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameTreeSection {
    pub branching: Option<u16>,
    pub depth: Option<usize>,
    pub budgets: Option<Vec<u64>>,
    pub trials: Option<u64>,
    pub algorithms: Option<Vec<String>>,
    pub node_cap: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandboxSection {
    pub sweeps: Option<Vec<u64>>,
    pub reps: Option<u64>,
    pub policy_cap: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AzumaSection {
    pub trials: Option<u64>,
    pub t_grid: Option<Vec<u64>>,
    pub alphas: Option<Vec<f64>>,
    pub h_values: Option<Vec<f64>>,
    pub delta_fractions: Option<Vec<f64>>,
    pub c_e_values: Option<Vec<f64>>,
    pub c_p_values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub p: Option<f64>,
    pub d: Option<f64>,
    pub k: Option<u32>,
    pub h: Option<u32>,
    pub b: Option<u32>,
    pub n: Option<u64>,
}

/// Pick the highest-priority value: flag, then file, then default.
fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`pick`] but with no default: missing everywhere is an error.
fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T> {
    flag.or(file)
        .ok_or_else(|| Error::Config(format!("missing required option --{name}")))
}

fn check_budgets(budgets: &[u64]) -> Result<()> {
    if budgets.is_empty() {
        return Err(Error::Config("budget grid must not be empty".into()));
    }
    if budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("budget grid must be strictly increasing: {budgets:?}")));
    }
    if budgets[0] == 0 {
        return Err(Error::Config("budgets must be at least 1".into()));
    }
    Ok(())
}

fn check_algorithms(algorithms: &[String]) -> Result<()> {
    if algorithms.is_empty() {
        return Err(Error::Config("need at least one algorithm".into()));
    }
    for a in algorithms {
        PlannerSpec::parse(a)?;
    }
    Ok(())
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

/// Resolved sailing benchmark configuration.
#[derive(Clone, Debug, Serialize)]
pub struct SailingBench {
    pub grid: u32,
    pub budgets: Vec<u64>,
    pub trials: u64,
    pub algorithms: Vec<String>,
    /// Oracle size cap, in (state, step) value cells.
    pub cell_cap: u64,
    /// Episode length cap factor for goal-driven rollouts.
    pub rollout_cap_factor: usize,
}

/// Flag values for the sailing benchmark (all optional; merged over the
/// config file and defaults).
#[derive(Clone, Debug, Default)]
pub struct SailingFlags {
    pub grid: Option<u32>,
    pub budgets: Option<Vec<u64>>,
    pub trials: Option<u64>,
    pub algorithms: Option<Vec<String>>,
    pub cell_cap: Option<u64>,
    pub rollout_cap_factor: Option<usize>,
}

impl SailingBench {
    pub fn resolve(flags: SailingFlags, file: Option<&SailingSection>) -> Result<SailingBench> {
        let f = file.cloned().unwrap_or_default();
        let cfg = SailingBench {
            grid: require(flags.grid, f.grid, "grid")?,
            budgets: pick(flags.budgets, f.budgets, powers_of_two(7, 15)),
            trials: pick(flags.trials, f.trials, 200),
            algorithms: pick(
                flags.algorithms,
                f.algorithms,
                ["uct", "gct", "brue", "brue-per-alpha:0.9"].map(String::from).to_vec(),
            ),
            cell_cap: pick(flags.cell_cap, f.cell_cap, 20_000_000),
            rollout_cap_factor: pick(flags.rollout_cap_factor, f.rollout_cap_factor, 16),
        };
        if cfg.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        check_budgets(&cfg.budgets)?;
        check_algorithms(&cfg.algorithms)?;
        Ok(cfg)
    }
}

/// Resolved game-tree benchmark configuration.
#[derive(Clone, Debug, Serialize)]
pub struct GameTreeBench {
    pub branching: u16,
    pub depth: usize,
    pub budgets: Vec<u64>,
    pub trials: u64,
    pub algorithms: Vec<String>,
    /// Per-tree exhaustive-solver node cap.
    pub node_cap: u64,
}

#[derive(Clone, Debug, Default)]
pub struct GameTreeFlags {
    pub branching: Option<u16>,
    pub depth: Option<usize>,
    pub budgets: Option<Vec<u64>>,
    pub trials: Option<u64>,
    pub algorithms: Option<Vec<String>>,
    pub node_cap: Option<u64>,
}

impl GameTreeBench {
    pub fn resolve(flags: GameTreeFlags, file: Option<&GameTreeSection>) -> Result<GameTreeBench> {
        let f = file.cloned().unwrap_or_default();
        let cfg = GameTreeBench {
            branching: require(flags.branching, f.branching, "branching")?,
            depth: require(flags.depth, f.depth, "depth")?,
            budgets: pick(flags.budgets, f.budgets, powers_of_two(6, 14)),
            trials: pick(flags.trials, f.trials, 100),
            algorithms: pick(flags.algorithms, f.algorithms, ["uct", "brue"].map(String::from).to_vec()),
            node_cap: pick(flags.node_cap, f.node_cap, 1 << 22),
        };
        if cfg.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        check_budgets(&cfg.budgets)?;
        check_algorithms(&cfg.algorithms)?;
        Ok(cfg)
    }
}

/// Resolved flat-baseline comparison configuration (round-robin vs
/// rollout-sharing on the built-in three-level lattice).
#[derive(Clone, Debug, Serialize)]
pub struct SandboxBench {
    /// Budgets, expressed in full round-robin sweeps of the policy list.
    pub sweeps: Vec<u64>,
    /// Paired repetitions per budget.
    pub reps: u64,
    pub policy_cap: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SandboxFlags {
    pub sweeps: Option<Vec<u64>>,
    pub reps: Option<u64>,
    pub policy_cap: Option<u64>,
}

impl SandboxBench {
    pub fn resolve(flags: SandboxFlags, file: Option<&SandboxSection>) -> Result<SandboxBench> {
        let f = file.cloned().unwrap_or_default();
        let cfg = SandboxBench {
            sweeps: pick(flags.sweeps, f.sweeps, (1..=8).collect()),
            reps: pick(flags.reps, f.reps, 10_000),
            policy_cap: pick(flags.policy_cap, f.policy_cap, 100_000),
        };
        if cfg.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        check_budgets(&cfg.sweeps)
            .map_err(|_| Error::Config(format!("sweep grid must be strictly increasing and positive: {:?}", cfg.sweeps)))?;
        Ok(cfg)
    }
}

/// Resolved concentration-check configuration: the cartesian product of the
/// scenario lists, each scenario measured on every (α, t, tail).
#[derive(Clone, Debug, Serialize)]
pub struct AzumaBench {
    pub trials: u64,
    pub t_grid: Vec<u64>,
    pub alphas: Vec<f64>,
    pub h_values: Vec<f64>,
    /// δ per scenario is `fraction · h`.
    pub delta_fractions: Vec<f64>,
    pub c_e_values: Vec<f64>,
    pub c_p_values: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct AzumaFlags {
    pub trials: Option<u64>,
    pub t_grid: Option<Vec<u64>>,
    pub alphas: Option<Vec<f64>>,
    pub h_values: Option<Vec<f64>>,
    pub delta_fractions: Option<Vec<f64>>,
    pub c_e_values: Option<Vec<f64>>,
    pub c_p_values: Option<Vec<f64>>,
}

impl AzumaBench {
    pub fn resolve(flags: AzumaFlags, file: Option<&AzumaSection>) -> Result<AzumaBench> {
        let f = file.cloned().unwrap_or_default();
        let cfg = AzumaBench {
            trials: pick(flags.trials, f.trials, 100_000),
            t_grid: pick(flags.t_grid, f.t_grid, vec![10, 50, 100, 500]),
            alphas: pick(flags.alphas, f.alphas, vec![0.5, 1.0]),
            h_values: pick(flags.h_values, f.h_values, vec![1.0, 2.0]),
            delta_fractions: pick(flags.delta_fractions, f.delta_fractions, vec![0.25, 0.5]),
            c_e_values: pick(flags.c_e_values, f.c_e_values, vec![0.1, 1.0]),
            c_p_values: pick(flags.c_p_values, f.c_p_values, vec![0.0, 1.0, 10.0]),
        };
        if cfg.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if cfg.h_values.is_empty()
            || cfg.delta_fractions.is_empty()
            || cfg.c_e_values.is_empty()
            || cfg.c_p_values.is_empty()
        {
            return Err(Error::Config("scenario grids must not be empty".into()));
        }
        Ok(cfg)
    }
}

/// Resolved bound-calculator query.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsQuery {
    pub p: f64,
    pub d: f64,
    pub k: u32,
    pub h: u32,
    /// With an outcome width, the flat-baseline bounds are evaluated too.
    pub b: Option<u32>,
    /// Episode count for the flat-baseline bounds.
    pub n: u64,
}

#[derive(Clone, Debug, Default)]
pub struct BoundsFlags {
    pub p: Option<f64>,
    pub d: Option<f64>,
    pub k: Option<u32>,
    pub h: Option<u32>,
    pub b: Option<u32>,
    pub n: Option<u64>,
}

impl BoundsQuery {
    pub fn resolve(flags: BoundsFlags, file: Option<&BoundsSection>) -> Result<BoundsQuery> {
        let f = file.cloned().unwrap_or_default();
        Ok(BoundsQuery {
            p: require(flags.p, f.p, "p")?,
            d: require(flags.d, f.d, "d")?,
            k: require(flags.k, f.k, "K")?,
            h: require(flags.h, f.h, "H")?,
            b: flags.b.or(f.b),
            n: pick(flags.n, f.n, 0),
        })
    }
}

/// Serialize a resolved configuration into the canonical TOML snippet that
/// is embedded in CSV metadata: the master seed followed by one named
/// section. Field order is the struct declaration order, so the text — and
/// its hash — is stable.
pub fn resolved_toml<T: Serialize>(section: &str, value: &T, seed: u64) -> String {
    let body = toml::to_string(value).expect("resolved configs serialize to TOML");
    format!("seed = {seed}\n\n[{section}]\n{body}")
}

/// Hex SHA-256 of the resolved configuration text.
pub fn config_hash(resolved: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(resolved.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = SailingSection {
            grid: Some(7),
            trials: Some(9),
            ..Default::default()
        };
        let flags = SailingFlags { grid: Some(5), ..Default::default() };
        let cfg = SailingBench::resolve(flags, Some(&file)).unwrap();
        assert_eq!(cfg.grid, 5, "flag wins over file");
        assert_eq!(cfg.trials, 9, "file wins over default");
        assert_eq!(cfg.budgets, powers_of_two(7, 15), "default budget grid");
        assert_eq!(cfg.algorithms.len(), 4);
    }

    #[test]
    fn missing_required_options_are_config_errors() {
        let err = SailingBench::resolve(SailingFlags::default(), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--grid"));
        let err = GameTreeBench::resolve(GameTreeFlags::default(), None).unwrap_err();
        assert!(err.to_string().contains("--branching"));
    }

    #[test]
    fn invalid_grids_and_algorithms_are_rejected() {
        let mut flags = SailingFlags { grid: Some(5), ..Default::default() };
        flags.budgets = Some(vec![128, 128]);
        assert!(SailingBench::resolve(flags.clone(), None).is_err());
        flags.budgets = Some(vec![256, 128]);
        assert!(SailingBench::resolve(flags.clone(), None).is_err());
        flags.budgets = Some(vec![128, 256]);
        flags.algorithms = Some(vec!["warp-drive".into()]);
        assert!(SailingBench::resolve(flags, None).is_err());
    }

    #[test]
    fn file_config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 3\n[sailing]\ngird = 5\n").unwrap();
        let err = FileConfig::load(&path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        std::fs::write(&path, "seed = 3\n[sailing]\ngrid = 5\n").unwrap();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.sailing.unwrap().grid, Some(5));
    }

    #[test]
    fn resolved_toml_is_stable_and_hashable() {
        let cfg = SailingBench::resolve(
            SailingFlags { grid: Some(5), ..Default::default() },
            None,
        )
        .unwrap();
        let a = resolved_toml("sailing", &cfg, 42);
        let b = resolved_toml("sailing", &cfg, 42);
        assert_eq!(a, b);
        assert!(a.starts_with("seed = 42\n\n[sailing]\ngrid = 5\n"));
        assert_eq!(config_hash(&a).len(), 64);
        assert_ne!(config_hash(&a), config_hash(&resolved_toml("sailing", &cfg, 43)));
    }
}

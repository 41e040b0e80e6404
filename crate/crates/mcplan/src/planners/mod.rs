//! Online Monte-Carlo planners.
//!
//! All planners answer the same question: given a sampling budget of `n`
//! simulated episodes from the current state, which action should be taken?
//! They differ in how they spend the budget and in how they digest the
//! samples:
//!
//! - [`uct`]: UCT (UCB1 applied at every visited decision point) and its
//!   root-ε-greedy variant GCT. Cumulative-regret machinery repurposed for
//!   recommendations.
//! - [`brue`]: the BRUE family. Each episode splits at a switch depth that
//!   cycles with the iteration number: uniform exploration above, greedy
//!   estimation below, and an update to exactly one depth level per episode.
//!   Variants: windowed value estimates (`brue-alpha:α`) and permissive
//!   multi-level updates (`brue-per`, `brue-per-alpha:α`).
//! - [`flat`]: baselines that treat whole deterministic policies as arms of a
//!   bandit — `naive` samples policies round-robin, `crafty` shares every
//!   uniform rollout among all policies consistent with it.
//!
//! Planner choice and options are spelled as compact spec strings (see
//! [`PlannerSpec::parse`]), the form used by the benchmark CLI and config
//! files. Every invocation draws from an explicitly keyed
//! [`RngStream`](crate::rng::RngStream), so runs replay exactly.

pub mod brue;
pub mod flat;
pub mod tree;
pub mod uct;

pub use tree::{Keying, NodeIdx, NodeStats, SearchTree};

use rand_chacha::ChaCha8Rng;

use crate::mdp::{ActionId, GenerativeMdp, StateId, Trajectory};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Exploration constant of the UCB1 rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CParam {
    /// Use the node's best empirical action value, signed, as the
    /// coefficient, adapting the exploration term to the local reward scale.
    /// Where all returns are negative this zeroes out optimism and the rule
    /// acts greedily once every action has been tried.
    Auto,
    Fixed(f64),
}

/// How the UCT family converts root statistics into a recommendation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recommend {
    /// Best empirical value among tried root actions (default).
    MeanBest,
    /// Most-tried root action.
    VisitBest,
}

/// A parsed planner selection.
#[derive(Clone, Debug, PartialEq)]
pub enum PlannerSpec {
    Uct { c: CParam, recommend: Recommend },
    Gct { c: CParam, recommend: Recommend, epsilon: f64 },
    Brue { alpha: f64, permissive: bool },
    NaiveUniform,
    CraftyUniform,
}

impl PlannerSpec {
    /// Parse a spec string.
    ///
    /// Grammar: `uct[:opts]`, `gct[:opts]`, `brue`, `brue-alpha:<α>`,
    /// `brue-per`, `brue-per-alpha:<α>`, `naive`, `crafty`; `opts` is a
    /// comma-separated list of `c=<float|auto>`, `rec=<mean|visits>`, and
    /// (GCT only) `eps=<float>`.
    pub fn parse(s: &str) -> Result<PlannerSpec> {
        let bad = |msg: String| Err(Error::Config(msg));
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let parse_alpha = |r: Option<&str>| -> Result<f64> {
            let r = r.ok_or_else(|| {
                Error::Config(format!("planner '{head}' needs a window fraction, e.g. '{head}:0.9'"))
            })?;
            let alpha: f64 = r
                .parse()
                .map_err(|_| Error::Config(format!("bad window fraction '{r}'")))?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::Config(format!(
                    "window fraction must be in (0, 1], got {alpha}"
                )));
            }
            Ok(alpha)
        };
        match head {
            "uct" | "gct" => {
                let mut c = CParam::Auto;
                let mut recommend = Recommend::MeanBest;
                let mut epsilon = 0.5;
                for opt in rest.into_iter().flat_map(|r| r.split(',')) {
                    let Some((key, value)) = opt.split_once('=') else {
                        return bad(format!("bad planner option '{opt}', expected key=value"));
                    };
                    match key {
                        "c" if value == "auto" => c = CParam::Auto,
                        "c" => {
                            let v: f64 = value.parse().map_err(|_| {
                                Error::Config(format!("bad exploration constant '{value}'"))
                            })?;
                            if v < 0.0 {
                                return bad(format!("exploration constant must be >= 0, got {v}"));
                            }
                            c = CParam::Fixed(v);
                        }
                        "rec" => {
                            recommend = match value {
                                "mean" => Recommend::MeanBest,
                                "visits" => Recommend::VisitBest,
                                _ => return bad(format!("bad recommendation rule '{value}'")),
                            }
                        }
                        "eps" if head == "gct" => {
                            let v: f64 = value
                                .parse()
                                .map_err(|_| Error::Config(format!("bad epsilon '{value}'")))?;
                            if !(0.0..=1.0).contains(&v) {
                                return bad(format!("epsilon must be in [0, 1], got {v}"));
                            }
                            epsilon = v;
                        }
                        _ => return bad(format!("unknown option '{key}' for planner '{head}'")),
                    }
                }
                Ok(if head == "uct" {
                    PlannerSpec::Uct { c, recommend }
                } else {
                    PlannerSpec::Gct { c, recommend, epsilon }
                })
            }
            "brue" => match rest {
                None => Ok(PlannerSpec::Brue { alpha: 1.0, permissive: false }),
                Some(r) => bad(format!("'brue' takes no options, got '{r}'")),
            },
            "brue-alpha" => Ok(PlannerSpec::Brue { alpha: parse_alpha(rest)?, permissive: false }),
            "brue-per" => match rest {
                None => Ok(PlannerSpec::Brue { alpha: 1.0, permissive: true }),
                Some(r) => bad(format!("'brue-per' takes no options, got '{r}'")),
            },
            "brue-per-alpha" => {
                Ok(PlannerSpec::Brue { alpha: parse_alpha(rest)?, permissive: true })
            }
            "naive" => match rest {
                None => Ok(PlannerSpec::NaiveUniform),
                Some(r) => bad(format!("'naive' takes no options, got '{r}'")),
            },
            "crafty" => match rest {
                None => Ok(PlannerSpec::CraftyUniform),
                Some(r) => bad(format!("'crafty' takes no options, got '{r}'")),
            },
            _ => bad(format!(
                "unknown planner '{head}' (expected uct, gct, brue, brue-alpha:<α>, \
                 brue-per, brue-per-alpha:<α>, naive, or crafty)"
            )),
        }
    }
}

impl std::fmt::Display for PlannerSpec {
    /// Canonical spec string (parses back to the same value).
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let write_uct_opts =
            |f: &mut std::fmt::Formatter<'_>, c: &CParam, rec: &Recommend, eps: Option<f64>| {
                let mut opts = Vec::new();
                if let CParam::Fixed(v) = c {
                    opts.push(format!("c={v}"));
                }
                if let Some(e) = eps {
                    if e != 0.5 {
                        opts.push(format!("eps={e}"));
                    }
                }
                if *rec == Recommend::VisitBest {
                    opts.push("rec=visits".to_string());
                }
                if opts.is_empty() {
                    Ok(())
                } else {
                    write!(f, ":{}", opts.join(","))
                }
            };
        match self {
            PlannerSpec::Uct { c, recommend } => {
                write!(f, "uct")?;
                write_uct_opts(f, c, recommend, None)
            }
            PlannerSpec::Gct { c, recommend, epsilon } => {
                write!(f, "gct")?;
                write_uct_opts(f, c, recommend, Some(*epsilon))
            }
            PlannerSpec::Brue { alpha, permissive } => match (alpha, permissive) {
                (a, false) if *a == 1.0 => write!(f, "brue"),
                (a, false) => write!(f, "brue-alpha:{a}"),
                (a, true) if *a == 1.0 => write!(f, "brue-per"),
                (a, true) => write!(f, "brue-per-alpha:{a}"),
            },
            PlannerSpec::NaiveUniform => write!(f, "naive"),
            PlannerSpec::CraftyUniform => write!(f, "crafty"),
        }
    }
}

/// A planner selection plus the options shared by all planners.
#[derive(Clone, Debug)]
pub struct PlanConfig {
    pub spec: PlannerSpec,
    /// Statistics keying; see [`Keying`].
    pub keying: Keying,
    /// For goal-driven domains, episodes may run past the nominal horizon
    /// `H` up to `rollout_cap_factor · H` steps while chasing the goal.
    pub rollout_cap_factor: usize,
    /// Cap on the number of deterministic policies the flat planners will
    /// enumerate.
    pub policy_cap: u64,
}

impl PlanConfig {
    pub fn new(spec: PlannerSpec) -> PlanConfig {
        PlanConfig {
            spec,
            keying: Keying::Auto,
            rollout_cap_factor: 16,
            policy_cap: 100_000,
        }
    }
}

/// What a planning invocation hands back.
#[derive(Clone, Debug)]
pub struct PlanOutcome {
    /// The recommended action at the planning root.
    pub action: ActionId,
    /// Root action-value estimates at the end of planning (empty for the
    /// flat planners, whose statistics live on policies, not actions).
    pub root_q: Vec<f64>,
    /// Root visit counts, aligned with `root_q`.
    pub root_n: Vec<u64>,
}

/// Observation hooks for tests and instrumentation. All methods default to
/// no-ops; [`NoProbe`] is the "not observing" probe.
pub trait Probe {
    /// Called once per completed episode. For switch-based planners the
    /// trajectory's `switch_index` carries the episode's switch depth.
    fn iteration(&mut self, _iter: u64, _traj: &Trajectory) {}

    /// Called for every statistics-cell update: the node keyed by
    /// `(state, depth)` folds `target` into action `action`.
    fn update(&mut self, _iter: u64, _depth: usize, _state: StateId, _action: ActionId, _target: f64) {
    }
}

/// Probe that observes nothing.
pub struct NoProbe;

impl Probe for NoProbe {}

/// Plan from `s0` with the given episode budget. Returns the recommended
/// action; see [`plan_probed`] to observe the process.
pub fn plan(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    budget: u64,
    config: &PlanConfig,
    stream: &RngStream,
) -> Result<PlanOutcome> {
    plan_probed(mdp, s0, budget, config, stream, &mut NoProbe)
}

/// [`plan`] with a [`Probe`] receiving per-episode and per-update callbacks.
pub fn plan_probed(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    budget: u64,
    config: &PlanConfig,
    stream: &RngStream,
    probe: &mut dyn Probe,
) -> Result<PlanOutcome> {
    if mdp.horizon() == 0 {
        return Err(Error::Config("cannot plan with a zero horizon".into()));
    }
    if mdp.is_terminal(s0) {
        return Err(Error::Config("cannot plan at a terminal state".into()));
    }
    if budget == 0 {
        return Err(Error::InsufficientBudget("budget must be at least 1 episode".into()));
    }
    let mut rng = stream.rng();
    match &config.spec {
        PlannerSpec::Uct { c, recommend } => {
            uct::plan(mdp, s0, budget, *c, None, *recommend, config, &mut rng, probe)
        }
        PlannerSpec::Gct { c, recommend, epsilon } => {
            uct::plan(mdp, s0, budget, *c, Some(*epsilon), *recommend, config, &mut rng, probe)
        }
        PlannerSpec::Brue { alpha, permissive } => {
            brue::plan(mdp, s0, budget, *alpha, *permissive, config, &mut rng, probe)
        }
        PlannerSpec::NaiveUniform => flat::plan_naive(mdp, s0, budget, config, &mut rng, probe),
        PlannerSpec::CraftyUniform => flat::plan_crafty(mdp, s0, budget, config, &mut rng, probe),
    }
}

/// Episode length limit for one planning simulation.
pub(crate) fn episode_limit(mdp: &dyn GenerativeMdp, config: &PlanConfig) -> usize {
    if mdp.goal_driven() {
        mdp.horizon().saturating_mul(config.rollout_cap_factor.max(1))
    } else {
        mdp.horizon()
    }
}

/// Uniform draw from a non-empty candidate list.
pub(crate) fn choose_uniform(candidates: &[ActionId], rng: &mut ChaCha8Rng) -> ActionId {
    use rand::Rng;
    debug_assert!(!candidates.is_empty());
    candidates[rng.gen_range(0..candidates.len())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "uct",
            "uct:c=1.4",
            "uct:rec=visits",
            "uct:c=2,rec=visits",
            "gct",
            "gct:eps=0.25",
            "gct:c=1.4,eps=0.25,rec=visits",
            "brue",
            "brue-alpha:0.9",
            "brue-per",
            "brue-per-alpha:0.9",
            "naive",
            "crafty",
        ] {
            let spec = PlannerSpec::parse(s).unwrap();
            assert_eq!(PlannerSpec::parse(&spec.to_string()).unwrap(), spec, "spec {s}");
        }
    }

    #[test]
    fn defaults_are_as_documented() {
        assert_eq!(
            PlannerSpec::parse("uct").unwrap(),
            PlannerSpec::Uct { c: CParam::Auto, recommend: Recommend::MeanBest }
        );
        assert_eq!(
            PlannerSpec::parse("gct").unwrap(),
            PlannerSpec::Gct { c: CParam::Auto, recommend: Recommend::MeanBest, epsilon: 0.5 }
        );
        assert_eq!(
            PlannerSpec::parse("brue").unwrap(),
            PlannerSpec::Brue { alpha: 1.0, permissive: false }
        );
        assert_eq!(
            PlannerSpec::parse("brue-per-alpha:0.7").unwrap(),
            PlannerSpec::Brue { alpha: 0.7, permissive: true }
        );
    }

    #[test]
    fn bad_specs_are_rejected_as_configuration_errors() {
        for s in [
            "uctx",
            "uct:c=",
            "uct:c=-1",
            "uct:eps=0.5", // eps is a gct option
            "uct:rec=best",
            "gct:eps=1.5",
            "brue:0.9",
            "brue-alpha",
            "brue-alpha:0",
            "brue-alpha:1.5",
            "naive:fast",
            "",
        ] {
            let err = PlannerSpec::parse(s).unwrap_err();
            assert_eq!(err.exit_code(), 2, "spec {s:?} should be a config error");
        }
    }
}

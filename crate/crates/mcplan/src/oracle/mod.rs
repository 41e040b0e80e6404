//! Exact solvers used to score planner recommendations.
//!
//! [`OracleTable`] runs finite-horizon value iteration over the set of states
//! reachable from a model's start states, producing the optimal value
//! `V_h(s)` and action values `Q_h(s, a)` for every reachable state and every
//! number of remaining steps `h`. Construction fails with
//! [`ResourceCap`](crate::Error::ResourceCap) if the table would exceed a
//! cell budget, and tables can be cached on disk ([`cache`]).
//!
//! Alongside the values, construction extracts the model parameters that the
//! analytic bound calculators consume ([`BoundParams`]): the largest action
//! count, the largest outcome count, the smallest positive transition
//! probability, and the smallest one-step action gap.
//!
//! [`minimax`] holds a specialized exact solver for the deterministic game
//! trees, working directly in payoff units.

pub mod cache;
pub mod minimax;

use std::collections::{HashMap, HashSet, VecDeque};

use crate::mdp::{ActionId, GenerativeMdp, Objective, StateId};
use crate::{Error, Result};

/// Default limit on stored `(state, steps-to-go, action)` value cells.
pub const DEFAULT_CELL_CAP: u64 = 20_000_000;

/// Model parameters extracted while solving; inputs to the bound calculators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    /// Largest number of applicable actions at any reachable state.
    pub max_actions: u32,
    /// Largest number of distinct outcomes of any reachable (state, action).
    pub max_outcomes: u32,
    /// Smallest positive transition probability over reachable transitions.
    pub min_probability: f64,
    /// Smallest gap between the best and second-best one-step action value
    /// over reachable states with at least two actions; `None` when some
    /// state has a tie (the gap-based bounds are then inapplicable).
    pub one_step_gap: Option<f64>,
}

/// Exact values for one `(state, steps-to-go)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct VEntry {
    /// Action values; empty at terminal states.
    pub q: Vec<f64>,
    /// Optimal value (0 at terminal states).
    pub v: f64,
    /// Lowest-index optimal action; `None` at terminal states.
    pub best: Option<ActionId>,
    /// Whether this state's mover maximizes (false: minimizes).
    pub maximizing: bool,
}

/// Exact finite-horizon solution of a model over its reachable states.
#[derive(Clone, Debug)]
pub struct OracleTable {
    horizon: usize,
    /// Keyed by `(state, steps-to-go)` for steps 1..=horizon. Zero steps to
    /// go is implicit: every value is 0.
    entries: HashMap<(StateId, u32), VEntry>,
    params: BoundParams,
    model_key: String,
}

impl OracleTable {
    /// Solve `mdp` exactly by bottom-up value iteration over the reachable
    /// state set, refusing to allocate more than `cell_cap` action-value
    /// cells. The model must implement
    /// [`enumerate_outcomes`](GenerativeMdp::enumerate_outcomes).
    pub fn build(mdp: &dyn GenerativeMdp, cell_cap: u64) -> Result<OracleTable> {
        let horizon = mdp.horizon();
        if horizon == 0 {
            return Err(Error::Config("oracle needs a horizon of at least 1".into()));
        }

        // Reachability closure, with bound-parameter extraction on the way.
        let mut queue: VecDeque<StateId> = mdp.start_states().into();
        let mut seen: HashSet<StateId> = queue.iter().copied().collect();
        if seen.is_empty() {
            return Err(Error::Config("model has no start states".into()));
        }
        let mut states: Vec<StateId> = Vec::new();
        let mut max_actions = 0u32;
        let mut max_outcomes = 0u32;
        let mut min_probability = f64::INFINITY;
        let mut cells = 0u64;
        while let Some(s) = queue.pop_front() {
            states.push(s);
            let k = mdp.action_count(s);
            max_actions = max_actions.max(k as u32);
            cells += (k.max(1) as u64) * horizon as u64;
            if cells > cell_cap {
                return Err(Error::ResourceCap(format!(
                    "oracle table for {} exceeds {cell_cap} value cells",
                    mdp.name()
                )));
            }
            for a in 0..k {
                let outcomes = mdp.enumerate_outcomes(s, a as ActionId).ok_or_else(|| {
                    Error::Config(format!(
                        "oracle needs enumerable outcomes, which {} does not provide",
                        mdp.name()
                    ))
                })?;
                max_outcomes = max_outcomes.max(outcomes.len() as u32);
                for o in &outcomes {
                    min_probability = min_probability.min(o.probability);
                    if seen.insert(o.state) {
                        queue.push_back(o.state);
                    }
                }
            }
        }
        states.sort_unstable();

        // Bottom-up sweep: values with h steps to go come from h-1.
        let mut entries: HashMap<(StateId, u32), VEntry> =
            HashMap::with_capacity(states.len() * horizon);
        for h in 1..=horizon as u32 {
            for &s in &states {
                let k = mdp.action_count(s);
                let maximizing = mdp.objective(s) == Objective::Maximize;
                if k == 0 {
                    entries.insert(
                        (s, h),
                        VEntry { q: Vec::new(), v: 0.0, best: None, maximizing },
                    );
                    continue;
                }
                let mut q = Vec::with_capacity(k);
                for a in 0..k {
                    let outcomes = mdp
                        .enumerate_outcomes(s, a as ActionId)
                        .expect("checked during closure");
                    let mut total = 0.0;
                    for o in &outcomes {
                        let tail = if h == 1 {
                            0.0
                        } else {
                            entries[&(o.state, h - 1)].v
                        };
                        total += o.probability * (o.reward + tail);
                    }
                    q.push(total);
                }
                let (best, v) = pick(&q, maximizing);
                entries.insert((s, h), VEntry { q, v, best: Some(best), maximizing });
            }
        }

        let one_step_gap = one_step_gap(&entries, &states);
        let model_key = model_key(mdp);
        Ok(OracleTable {
            horizon,
            entries,
            params: BoundParams {
                max_actions,
                max_outcomes,
                min_probability,
                one_step_gap,
            },
            model_key,
        })
    }

    /// Steps-to-go range covered by the table.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Extracted bound parameters.
    pub fn params(&self) -> BoundParams {
        self.params
    }

    /// Identity of the model this table solves.
    pub fn model_key(&self) -> &str {
        &self.model_key
    }

    /// Number of stored `(state, steps-to-go)` entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Optimal value of `s` with `h` steps to go, if `s` is reachable.
    pub fn try_value(&self, s: StateId, h: usize) -> Option<f64> {
        if h == 0 {
            return Some(0.0);
        }
        if h > self.horizon {
            return None;
        }
        self.entries.get(&(s, h as u32)).map(|e| e.v)
    }

    /// Optimal value of `s` with `h` steps to go. Panics on unreachable
    /// states — scoring a state the oracle never solved is a caller bug.
    pub fn value(&self, s: StateId, h: usize) -> f64 {
        self.try_value(s, h)
            .unwrap_or_else(|| panic!("state {s} with {h} steps to go is not in the oracle table"))
    }

    /// Full entry for `(s, h)`, `h ≥ 1`.
    pub fn entry(&self, s: StateId, h: usize) -> Option<&VEntry> {
        self.entries.get(&(s, h as u32))
    }

    /// Lowest-index optimal action at `(s, h)`; `None` at terminal states.
    pub fn best_action(&self, s: StateId, h: usize) -> Option<ActionId> {
        self.entries.get(&(s, h as u32)).and_then(|e| e.best)
    }

    /// Simple regret of recommending `a` at `s` with `h` steps to go: the
    /// value lost relative to the optimal action, non-negative, in the
    /// model's reward units.
    pub fn simple_regret(&self, s: StateId, h: usize, a: ActionId) -> f64 {
        let e = &self.entries[&(s, h as u32)];
        let q = e.q[a as usize];
        let r = if e.maximizing { e.v - q } else { q - e.v };
        debug_assert!(r > -1e-9, "exact Q exceeded exact V by {}", -r);
        r.max(0.0)
    }

    /// Largest Bellman residual over all stored entries when each value is
    /// recomputed from the level below: a self-check that the sweep reached a
    /// fixed point of the finite-horizon recursion.
    pub fn bellman_residual(&self, mdp: &dyn GenerativeMdp) -> f64 {
        let mut worst = 0.0f64;
        for (&(s, h), e) in &self.entries {
            for (a, &q_stored) in e.q.iter().enumerate() {
                let outcomes = mdp
                    .enumerate_outcomes(s, a as ActionId)
                    .expect("table was built from enumerable outcomes");
                let mut q = 0.0;
                for o in &outcomes {
                    let tail = if h == 1 { 0.0 } else { self.entries[&(o.state, h - 1)].v };
                    q += o.probability * (o.reward + tail);
                }
                worst = worst.max((q - q_stored).abs());
            }
        }
        worst
    }

    /// Entries sorted by `(state, steps-to-go)`, for serialization.
    fn sorted_entries(&self) -> Vec<(&(StateId, u32), &VEntry)> {
        let mut items: Vec<_> = self.entries.iter().collect();
        items.sort_unstable_by_key(|(k, _)| **k);
        items
    }
}

/// Cache key tying a table to the model that produced it.
fn model_key(mdp: &dyn GenerativeMdp) -> String {
    format!("{}:{:016x}:h{}", mdp.name(), mdp.config_hash(), mdp.horizon())
}

/// First-index argmax (or argmin) and its value.
fn pick(q: &[f64], maximizing: bool) -> (ActionId, f64) {
    let mut best = 0usize;
    for (i, &v) in q.iter().enumerate().skip(1) {
        let better = if maximizing { v > q[best] } else { v < q[best] };
        if better {
            best = i;
        }
    }
    (best as ActionId, q[best])
}

/// Smallest difference between the best and second-best one-step action
/// value over states with at least two actions; `None` on a tie.
fn one_step_gap(
    entries: &HashMap<(StateId, u32), VEntry>,
    states: &[StateId],
) -> Option<f64> {
    let mut min_gap = f64::INFINITY;
    for &s in states {
        let e = &entries[&(s, 1)];
        if e.q.len() < 2 {
            continue;
        }
        let mut sorted = e.q.clone();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let gap = if e.maximizing {
            sorted[sorted.len() - 1] - sorted[sorted.len() - 2]
        } else {
            sorted[1] - sorted[0]
        };
        if gap <= 1e-12 {
            return None;
        }
        min_gap = min_gap.min(gap);
    }
    if min_gap.is_finite() {
        Some(min_gap)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::TableMdp;
    use approx::assert_relative_eq;

    #[test]
    fn two_level_tree_matches_hand_solution() {
        let m = TableMdp::two_level_tree();
        let t = OracleTable::build(&m, DEFAULT_CELL_CAP).unwrap();
        // One step to go at the middle states.
        assert_relative_eq!(t.value(1, 1), 0.8);
        assert_relative_eq!(t.value(2, 1), 0.75);
        // Root action values with two steps to go:
        //   a0: 0.45 + (0.8 + 0.75)/2 = 1.225,  a1: 0.15 + 0.775 = 0.925.
        let e = t.entry(0, 2).unwrap();
        assert_relative_eq!(e.q[0], 1.225);
        assert_relative_eq!(e.q[1], 0.925);
        assert_relative_eq!(t.value(0, 2), 1.225);
        assert_eq!(t.best_action(0, 2), Some(0));
        assert_relative_eq!(t.simple_regret(0, 2, 1), 0.3);
        assert_eq!(t.simple_regret(0, 2, 0), 0.0);
    }

    #[test]
    fn bound_parameters_are_extracted() {
        let m = TableMdp::two_level_tree();
        let t = OracleTable::build(&m, DEFAULT_CELL_CAP).unwrap();
        let p = t.params();
        assert_eq!(p.max_actions, 2);
        assert_eq!(p.max_outcomes, 2);
        assert_relative_eq!(p.min_probability, 0.5);
        // One-step gaps: 0.3 at root, 0.6 at both middle states.
        assert_relative_eq!(p.one_step_gap.unwrap(), 0.3);
    }

    #[test]
    fn cell_cap_is_enforced() {
        let m = TableMdp::three_level_lattice();
        let err = OracleTable::build(&m, 10).unwrap_err();
        assert!(matches!(err, Error::ResourceCap(_)));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn bellman_residual_is_tiny() {
        let m = TableMdp::three_level_lattice();
        let t = OracleTable::build(&m, DEFAULT_CELL_CAP).unwrap();
        assert!(t.bellman_residual(&m) <= 1e-12);
    }
}

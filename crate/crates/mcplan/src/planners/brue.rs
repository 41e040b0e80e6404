//! The BRUE family: two-phase episodes with a cycling switch depth.
//!
//! Iteration `i` (1-based) uses switch depth `σ(i) = H − ((i−1) mod H)`,
//! where `H` is the nominal horizon. The episode explores *uniformly* at
//! depths `0..σ−1`, then follows the greedy estimation policy (uniform among
//! the tried actions with the best estimate; uniform over everything at
//! untracked points) from depth `σ` on. One episode feeds exactly one
//! statistics level: the cell `(s_{σ−1}, a_σ)` folds in the reward-to-go
//! collected from depth `σ−1` onward. As `σ` cycles `H, H−1, …, 1`, estimates
//! propagate from the deepest level to the root. An episode that reaches a
//! terminal state before taking `σ` steps feeds its deepest decision instead,
//! so every iteration updates exactly one switch cell either way.
//!
//! Variants:
//! - **windowed** (`brue-alpha:α`, α < 1): a cell's estimate is the exact
//!   mean of the newest `ceil(α·count)` update targets instead of the
//!   full-history mean. `α = 1` is *identical* to the plain planner — both
//!   take the same incremental-mean code path.
//! - **permissive** (`brue-per[-alpha:α]`): besides the switch cell, every
//!   shallower on-episode cell `(s_d, a_{d+1})`, `d < σ−1`, also updates when
//!   its decision point still has an untried action or when `a_{d+1}` is
//!   currently among its best tried actions. Conditions are evaluated on the
//!   statistics as they stood before any of the episode's updates.

use rand_chacha::ChaCha8Rng;

use crate::mdp::{uniform_action, ActionId, GenerativeMdp, Objective, StateId, Trajectory};
use crate::{Error, Result};

use super::tree::{NodeIdx, NodeStats, SearchTree};
use super::{choose_uniform, episode_limit, PlanConfig, PlanOutcome, Probe};

/// Switch depth of the given 1-based iteration: cycles `H, H-1, …, 1`.
pub(crate) fn switch_depth(iter: u64, horizon: usize) -> usize {
    horizon - ((iter - 1) as usize % horizon)
}

/// Estimation-phase action choice: uniform among the best tried actions,
/// uniform over all actions where nothing is tried.
fn estimation_select(
    st: Option<&NodeStats>,
    k: usize,
    maximizing: bool,
    rng: &mut ChaCha8Rng,
) -> ActionId {
    if let Some(st) = st {
        let best = st.best_visited_set(maximizing);
        if !best.is_empty() {
            return choose_uniform(&best, rng);
        }
    }
    uniform_action(k, rng)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn plan(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    budget: u64,
    alpha: f64,
    permissive: bool,
    config: &PlanConfig,
    rng: &mut ChaCha8Rng,
    probe: &mut dyn Probe,
) -> Result<PlanOutcome> {
    let horizon = mdp.horizon();
    let limit = episode_limit(mdp, config);
    let windowed = alpha < 1.0;
    let mut tree = SearchTree::new(config.keying, mdp.state_count().is_some(), windowed);
    let root_idx = tree.insert_root(s0, mdp.action_count(s0));
    let mut traj = Trajectory {
        states: Vec::new(),
        actions: Vec::new(),
        rewards: Vec::new(),
        switch_index: None,
    };
    let mut node_path: Vec<Option<NodeIdx>> = Vec::new();
    // (node, action, depth, target) updates of the current episode.
    let mut pending: Vec<(NodeIdx, ActionId, usize, f64)> = Vec::new();

    for iter in 1..=budget {
        let sigma = switch_depth(iter, horizon);
        traj.states.clear();
        traj.actions.clear();
        traj.rewards.clear();
        traj.switch_index = Some(sigma);
        node_path.clear();
        traj.states.push(s0);
        node_path.push(Some(root_idx));

        let mut depth = 0usize;
        loop {
            let s = traj.states[depth];
            if depth == limit || mdp.is_terminal(s) {
                break;
            }
            let k = mdp.action_count(s);
            let a = if depth < sigma {
                uniform_action(k, rng)
            } else {
                let maximizing = mdp.objective(s) == Objective::Maximize;
                let st = node_path[depth].map(|idx| tree.stats(idx));
                estimation_select(st, k, maximizing, rng)
            };
            let (s2, r) = mdp.sample_transition(s, a, rng);
            traj.actions.push(a);
            traj.rewards.push(r);
            traj.states.push(s2);
            let child = tree.find_node(node_path[depth], a, s2, depth + 1);
            node_path.push(child);
            depth += 1;
        }

        // An episode may end at a terminal state before its scheduled switch
        // depth. The iteration still feeds exactly one cell — the deepest
        // decision actually taken — and the credited reward-to-go is then an
        // exact sample, since nothing follows a terminal state.
        let eff = sigma.min(traj.len());

        // Materialize the decision points above the switch.
        for d in 1..eff {
            if node_path[d].is_none() {
                let parent = node_path[d - 1].expect("prefix is materialized in order");
                let idx = tree.insert_child(
                    parent,
                    traj.actions[d - 1],
                    traj.states[d],
                    d,
                    mdp.action_count(traj.states[d]),
                );
                node_path[d] = Some(idx);
            }
        }

        pending.clear();
        if permissive {
            // Evaluate every level's condition before any update lands.
            for d in 0..eff - 1 {
                let idx = node_path[d].expect("materialized above");
                let st = tree.stats(idx);
                let maximizing = mdp.objective(traj.states[d]) == Objective::Maximize;
                let eligible = st.has_unvisited()
                    || st.best_visited_set(maximizing).contains(&traj.actions[d]);
                if eligible {
                    pending.push((idx, traj.actions[d], d, traj.reward_to_go(d)));
                }
            }
        }
        let switch_cell = node_path[eff - 1].expect("materialized above");
        pending.push((switch_cell, traj.actions[eff - 1], eff - 1, traj.reward_to_go(eff - 1)));

        for &(idx, a, d, target) in pending.iter() {
            let st = tree.stats_mut(idx);
            if windowed {
                st.push_windowed(a, target, alpha);
            } else {
                st.push_incremental(a, target);
            }
            probe.update(iter, d, traj.states[d], a, target);
        }
        probe.iteration(iter, &traj);
    }

    let st = tree.stats(root_idx);
    let maximizing = mdp.objective(s0) == Objective::Maximize;
    let best = st.best_visited_set(maximizing);
    if best.is_empty() {
        return Err(Error::InsufficientBudget(format!(
            "no root update happened in {budget} episodes; the root level is fed every \
             {horizon} episodes, so the budget must be at least the horizon"
        )));
    }
    Ok(PlanOutcome {
        action: choose_uniform(&best, rng),
        root_q: st.q.to_vec(),
        root_n: st.n.to_vec(),
    })
}

//! Shared helpers for the integration suites: independent reference solvers
//! and small purpose-built models.
//!
//! The reference solvers here are deliberately written top-down (recursive),
//! while the library's exact solver works bottom-up over level tables —
//! agreement between the two routes is evidence against a shared bug rather
//! than a tautology.

// Each integration binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use std::collections::HashMap;

use mcplan::domains::gametree::GameTreeMdp;
use mcplan::domains::table::TableMdp;
use mcplan::mdp::{ActionId, GenerativeMdp, Objective, Outcome, StateId};
use rand_chacha::ChaCha8Rng;

/// Top-down expected-value recursion with memoization on `(state, steps)`.
/// Maximizing states take the best action; minimizing states the worst.
pub fn expectimax_value(
    mdp: &dyn GenerativeMdp,
    s: StateId,
    steps: usize,
    memo: &mut HashMap<(StateId, usize), f64>,
) -> f64 {
    if steps == 0 || mdp.is_terminal(s) {
        return 0.0;
    }
    if let Some(&v) = memo.get(&(s, steps)) {
        return v;
    }
    let q: Vec<f64> = (0..mdp.action_count(s))
        .map(|a| expectimax_q(mdp, s, steps, a as ActionId, memo))
        .collect();
    let v = match mdp.objective(s) {
        Objective::Maximize => q.into_iter().fold(f64::NEG_INFINITY, f64::max),
        Objective::Minimize => q.into_iter().fold(f64::INFINITY, f64::min),
    };
    memo.insert((s, steps), v);
    v
}

/// Action value under the same recursion as [`expectimax_value`].
pub fn expectimax_q(
    mdp: &dyn GenerativeMdp,
    s: StateId,
    steps: usize,
    a: ActionId,
    memo: &mut HashMap<(StateId, usize), f64>,
) -> f64 {
    let outcomes = mdp
        .enumerate_outcomes(s, a)
        .expect("reference solver needs enumerable outcomes");
    outcomes
        .iter()
        .map(|o| o.probability * (o.reward + expectimax_value(mdp, o.state, steps - 1, memo)))
        .sum()
}

/// The same recursion with no memoization at all — exponential, so only for
/// shallow horizons, but free of any caching logic that could mask errors.
pub fn expectimax_value_nomemo(mdp: &dyn GenerativeMdp, s: StateId, steps: usize) -> f64 {
    if steps == 0 || mdp.is_terminal(s) {
        return 0.0;
    }
    let q = (0..mdp.action_count(s)).map(|a| {
        mdp.enumerate_outcomes(s, a as ActionId)
            .expect("reference solver needs enumerable outcomes")
            .iter()
            .map(|o| o.probability * (o.reward + expectimax_value_nomemo(mdp, o.state, steps - 1)))
            .sum::<f64>()
    });
    match mdp.objective(s) {
        Objective::Maximize => q.fold(f64::NEG_INFINITY, f64::max),
        Objective::Minimize => q.fold(f64::INFINITY, f64::min),
    }
}

/// Independent alternating-turns recursion over a game tree in raw payoff
/// units (the sum of signed edge values along the principal variation).
pub fn minimax_raw(tree: &GameTreeMdp, node: StateId) -> f64 {
    if tree.is_terminal(node) {
        return 0.0;
    }
    let q = (0..tree.action_count(node)).map(|a| {
        let child = tree.child(node, a as ActionId);
        tree.edge_value(child) + minimax_raw(tree, child)
    });
    match tree.objective(node) {
        Objective::Maximize => q.fold(f64::NEG_INFINITY, f64::max),
        Objective::Minimize => q.fold(f64::INFINITY, f64::min),
    }
}

/// Two-armed one-step bandit: arm 0 pays 1 with probability 0.6, arm 1 pays
/// 1 with probability 0.4.
pub fn bernoulli_bandit() -> TableMdp {
    TableMdp::new(
        "bernoulli-bandit",
        1,
        vec![
            vec![
                vec![(1, 0.6, 1.0), (2, 0.4, 0.0)],
                vec![(1, 0.4, 1.0), (2, 0.6, 0.0)],
            ],
            vec![],
            vec![],
        ],
        0,
    )
    .expect("bandit tables are valid")
}

/// Wrapper that adds a constant to every reward of an inner model, leaving
/// dynamics untouched. Used to probe shift-invariance of recommendations.
pub struct ShiftedMdp<'a, M: GenerativeMdp> {
    pub inner: &'a M,
    pub shift: f64,
}

impl<M: GenerativeMdp> GenerativeMdp for ShiftedMdp<'_, M> {
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn action_count(&self, s: StateId) -> usize {
        self.inner.action_count(s)
    }

    fn sample_transition(&self, s: StateId, a: ActionId, rng: &mut ChaCha8Rng) -> (StateId, f64) {
        let (next, reward) = self.inner.sample_transition(s, a, rng);
        (next, reward + self.shift)
    }

    fn objective(&self, s: StateId) -> Objective {
        self.inner.objective(s)
    }

    fn reward_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.reward_bounds();
        (lo + self.shift, hi + self.shift)
    }

    fn enumerate_outcomes(&self, s: StateId, a: ActionId) -> Option<Vec<Outcome>> {
        self.inner.enumerate_outcomes(s, a).map(|outcomes| {
            outcomes
                .into_iter()
                .map(|o| Outcome { reward: o.reward + self.shift, ..o })
                .collect()
        })
    }

    fn start_states(&self) -> Vec<StateId> {
        self.inner.start_states()
    }

    fn state_count(&self) -> Option<u64> {
        self.inner.state_count()
    }

    fn goal_driven(&self) -> bool {
        self.inner.goal_driven()
    }

    fn name(&self) -> &str {
        "shifted"
    }

    fn config_hash(&self) -> u64 {
        self.inner.config_hash() ^ self.shift.to_bits()
    }
}

//! Exact minimax solver for the deterministic game trees, in payoff units.
//!
//! The generic value-iteration oracle solves game trees too, but it works on
//! the `[0, 1]`-rescaled rewards the planners see. This solver computes, for
//! every node, the optimal *remaining* payoff (the game value of the subtree
//! in raw edge-sum units), which is the natural scale for reporting.

use std::collections::HashMap;

use crate::domains::GameTreeMdp;
use crate::mdp::{ActionId, StateId};
use crate::{Error, Result};

/// Optimal remaining payoff and best move for every node of a game tree.
#[derive(Clone, Debug)]
pub struct MinimaxTable {
    /// node -> (optimal remaining payoff, lowest-index optimal move).
    values: HashMap<StateId, (f64, Option<ActionId>)>,
}

impl MinimaxTable {
    /// Solve `tree` by depth-first search, visiting at most `node_cap` nodes.
    pub fn solve(tree: &GameTreeMdp, node_cap: u64) -> Result<MinimaxTable> {
        let mut table = MinimaxTable { values: HashMap::new() };
        let mut budget = node_cap;
        table.fill(tree, tree.root(), &mut budget)?;
        Ok(table)
    }

    fn fill(&mut self, tree: &GameTreeMdp, node: StateId, budget: &mut u64) -> Result<f64> {
        if *budget == 0 {
            return Err(Error::ResourceCap(format!(
                "minimax search of {} exceeds its node budget",
                crate::mdp::GenerativeMdp::name(tree)
            )));
        }
        *budget -= 1;
        let k = crate::mdp::GenerativeMdp::action_count(tree, node);
        if k == 0 {
            self.values.insert(node, (0.0, None));
            return Ok(0.0);
        }
        let maximizing = tree.depth_of(node) % 2 == 0;
        let mut best_value = f64::NAN;
        let mut best_move = 0;
        for a in 0..k as ActionId {
            let child = tree.child(node, a);
            let value = tree.edge_value(child) + self.fill(tree, child, budget)?;
            let better = best_value.is_nan()
                || if maximizing { value > best_value } else { value < best_value };
            if better {
                best_value = value;
                best_move = a;
            }
        }
        self.values.insert(node, (best_value, Some(best_move)));
        Ok(best_value)
    }

    /// Optimal remaining payoff below `node`.
    pub fn value(&self, node: StateId) -> f64 {
        self.values[&node].0
    }

    /// Lowest-index optimal move at `node`; `None` at leaves.
    pub fn best_move(&self, node: StateId) -> Option<ActionId> {
        self.values[&node].1
    }

    /// Remaining payoff of playing `a` at `node` and then optimally.
    pub fn move_value(&self, tree: &GameTreeMdp, node: StateId, a: ActionId) -> f64 {
        let child = tree.child(node, a);
        tree.edge_value(child) + self.value(child)
    }

    /// Payoff lost by playing `a` at the root instead of the optimal move,
    /// in raw payoff units (the root is a max node).
    pub fn root_regret(&self, tree: &GameTreeMdp, a: ActionId) -> f64 {
        let root = tree.root();
        let r = self.value(root) - self.move_value(tree, root, a);
        debug_assert!(r > -1e-9);
        r.max(0.0)
    }

    /// Number of solved nodes.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{GameTreeSpec, GameTreeMdp};
    use approx::assert_relative_eq;

    #[test]
    fn four_leaf_example_solves_by_hand() {
        let t = GameTreeMdp::four_leaf_example();
        let mm = MinimaxTable::solve(&t, 1_000).unwrap();
        let root = t.root();
        assert_relative_eq!(mm.value(root), 50.0);
        assert_eq!(mm.best_move(root), Some(0));
        assert_relative_eq!(mm.move_value(&t, root, 1), -127.0);
        assert_relative_eq!(mm.root_regret(&t, 1), 177.0);
        assert_eq!(mm.root_regret(&t, 0), 0.0);
        // Min replies: under move 0 the minimizer picks the -50 edge.
        let c0 = t.child(root, 0);
        assert_relative_eq!(mm.value(c0), -50.0);
        assert_eq!(mm.best_move(c0), Some(0));
        assert_eq!(mm.len(), 7);
    }

    #[test]
    fn node_budget_is_enforced() {
        let t = GameTreeMdp::new(GameTreeSpec { branching: 2, depth: 8, seed: 3 }).unwrap();
        assert!(MinimaxTable::solve(&t, 100).is_err());
        assert!(MinimaxTable::solve(&t, 1_000).is_ok());
    }
}

//! Search-statistics storage shared by the Monte-Carlo planners.
//!
//! A [`SearchTree`] maps visited decision points to per-action visit counts
//! and value estimates. Two keying disciplines are supported:
//!
//! - **Dag**: nodes are keyed by `(state, depth)`, so all paths reaching the
//!   same state after the same number of steps share statistics. Natural for
//!   domains with compact enumerable state spaces.
//! - **Tree**: nodes are keyed by their path from the root (parent node,
//!   action, resulting state), so no sharing occurs. Natural for domains
//!   whose state ids are already path-unique, or when sharing is undesirable.
//!
//! `Keying::Auto` picks Dag when the domain can count its states and Tree
//! otherwise.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::mdp::{ActionId, StateId};

/// Index of a node inside a [`SearchTree`].
pub type NodeIdx = u32;

/// How decision points are identified. See the module docs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keying {
    /// Dag when the state space is enumerable, Tree otherwise.
    Auto,
    Dag,
    Tree,
}

/// Per-action statistics of one decision point.
#[derive(Clone, Debug)]
pub struct NodeStats {
    /// Visit count per action.
    pub n: SmallVec<[u64; 8]>,
    /// Value estimate per action.
    pub q: SmallVec<[f64; 8]>,
    /// Raw update targets per action, newest last; kept only by planners
    /// whose estimate averages a trailing window of the targets.
    pub samples: Option<Vec<Vec<f64>>>,
}

impl NodeStats {
    fn new(k: usize, track_samples: bool) -> NodeStats {
        NodeStats {
            n: smallvec::smallvec![0; k],
            q: smallvec::smallvec![0.0; k],
            samples: track_samples.then(|| vec![Vec::new(); k]),
        }
    }

    /// Number of actions at this decision point.
    pub fn arity(&self) -> usize {
        self.n.len()
    }

    /// Total visits over all actions.
    pub fn total_visits(&self) -> u64 {
        self.n.iter().sum()
    }

    /// Whether some action has never been tried.
    pub fn has_unvisited(&self) -> bool {
        self.n.iter().any(|&n| n == 0)
    }

    /// Actions never tried, in index order.
    pub fn unvisited(&self) -> SmallVec<[ActionId; 8]> {
        (0..self.arity())
            .filter(|&a| self.n[a] == 0)
            .map(|a| a as ActionId)
            .collect()
    }

    /// Fold `target` into the running mean of action `a`.
    pub fn push_incremental(&mut self, a: ActionId, target: f64) {
        let a = a as usize;
        self.n[a] += 1;
        self.q[a] += (target - self.q[a]) / self.n[a] as f64;
    }

    /// Record `target` for action `a` and re-estimate its value as the exact
    /// mean of the newest `ceil(alpha · count)` recorded targets.
    pub fn push_windowed(&mut self, a: ActionId, target: f64, alpha: f64) {
        let a = a as usize;
        let list = &mut self.samples.as_mut().expect("windowed planner tracks samples")[a];
        list.push(target);
        self.n[a] += 1;
        let count = list.len();
        let window = ((alpha * count as f64).ceil() as usize).clamp(1, count);
        self.q[a] = list[count - window..].iter().sum::<f64>() / window as f64;
    }

    /// Tried actions whose estimate equals the best (highest when
    /// `maximizing`, lowest otherwise) tried estimate; empty if nothing has
    /// been tried.
    pub fn best_visited_set(&self, maximizing: bool) -> SmallVec<[ActionId; 8]> {
        let mut best = f64::NAN;
        for a in 0..self.arity() {
            if self.n[a] == 0 {
                continue;
            }
            if best.is_nan() || (maximizing && self.q[a] > best) || (!maximizing && self.q[a] < best)
            {
                best = self.q[a];
            }
        }
        if best.is_nan() {
            return SmallVec::new();
        }
        (0..self.arity())
            .filter(|&a| self.n[a] > 0 && self.q[a] == best)
            .map(|a| a as ActionId)
            .collect()
    }

    /// Best tried estimate (by the node's orientation), if any action has
    /// been tried.
    pub fn best_visited_value(&self, maximizing: bool) -> Option<f64> {
        let set = self.best_visited_set(maximizing);
        set.first().map(|&a| self.q[a as usize])
    }
}

enum Keys {
    /// `(state, depth)` -> node.
    Dag(HashMap<(StateId, u32), NodeIdx>),
    /// `(parent, action, resulting state)` -> node.
    Tree(HashMap<(NodeIdx, ActionId, StateId), NodeIdx>),
}

/// Statistics for every visited decision point of one planning invocation.
pub struct SearchTree {
    keys: Keys,
    nodes: Vec<NodeStats>,
    root: Option<NodeIdx>,
    track_samples: bool,
}

impl SearchTree {
    /// `state_countable` drives `Keying::Auto`; `track_samples` makes every
    /// node keep its raw update targets (for windowed estimates).
    pub fn new(keying: Keying, state_countable: bool, track_samples: bool) -> SearchTree {
        let keys = match keying {
            Keying::Dag => Keys::Dag(HashMap::new()),
            Keying::Tree => Keys::Tree(HashMap::new()),
            Keying::Auto if state_countable => Keys::Dag(HashMap::new()),
            Keying::Auto => Keys::Tree(HashMap::new()),
        };
        SearchTree { keys, nodes: Vec::new(), root: None, track_samples }
    }

    /// Node of the planning root, if created.
    pub fn root(&self) -> Option<NodeIdx> {
        self.root
    }

    /// Create the root node for `state` with `k` actions. Idempotent.
    pub fn insert_root(&mut self, state: StateId, k: usize) -> NodeIdx {
        if let Some(r) = self.root {
            return r;
        }
        let idx = self.push_node(k);
        if let Keys::Dag(map) = &mut self.keys {
            map.insert((state, 0), idx);
        }
        self.root = Some(idx);
        idx
    }

    /// Node reached from `parent` by `action` into `state` at `depth`, if it
    /// was ever created. Under Dag keying only `(state, depth)` matters.
    pub fn find_child(
        &self,
        parent: NodeIdx,
        action: ActionId,
        state: StateId,
        depth: usize,
    ) -> Option<NodeIdx> {
        match &self.keys {
            Keys::Dag(map) => map.get(&(state, depth as u32)).copied(),
            Keys::Tree(map) => map.get(&(parent, action, state)).copied(),
        }
    }

    /// Node for `state` at `depth`, reached from an optionally-tracked
    /// `parent` by `action`. Under Dag keying the position alone identifies
    /// the node, so statistics are found even when the walk passed through
    /// untracked territory; under Tree keying identity follows the path, so
    /// an untracked parent means an untracked node.
    pub fn find_node(
        &self,
        parent: Option<NodeIdx>,
        action: ActionId,
        state: StateId,
        depth: usize,
    ) -> Option<NodeIdx> {
        match &self.keys {
            Keys::Dag(map) => map.get(&(state, depth as u32)).copied(),
            Keys::Tree(map) => {
                parent.and_then(|p| map.get(&(p, action, state)).copied())
            }
        }
    }

    /// Create (or find) the child node, giving it `k` actions when new.
    pub fn insert_child(
        &mut self,
        parent: NodeIdx,
        action: ActionId,
        state: StateId,
        depth: usize,
        k: usize,
    ) -> NodeIdx {
        if let Some(existing) = self.find_child(parent, action, state, depth) {
            return existing;
        }
        let idx = self.push_node(k);
        match &mut self.keys {
            Keys::Dag(map) => {
                map.insert((state, depth as u32), idx);
            }
            Keys::Tree(map) => {
                map.insert((parent, action, state), idx);
            }
        }
        idx
    }

    fn push_node(&mut self, k: usize) -> NodeIdx {
        let idx = NodeIdx::try_from(self.nodes.len()).expect("search tree outgrew u32 indices");
        self.nodes.push(NodeStats::new(k, self.track_samples));
        idx
    }

    pub fn stats(&self, idx: NodeIdx) -> &NodeStats {
        &self.nodes[idx as usize]
    }

    pub fn stats_mut(&mut self, idx: NodeIdx) -> &mut NodeStats {
        &mut self.nodes[idx as usize]
    }

    /// Number of created nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn incremental_mean_follows_the_running_average() {
        let mut s = NodeStats::new(2, false);
        // Mean of 1, 0, 1, 0 is exactly one half.
        for (i, x) in [1.0, 0.0, 1.0, 0.0].into_iter().enumerate() {
            s.push_incremental(0, x);
            assert_eq!(s.n[0], i as u64 + 1);
        }
        assert_relative_eq!(s.q[0], 0.5);
        // One step of the running average: mean 0.5 after one sample, target
        // 0.9 lifts it to 0.7.
        s.push_incremental(1, 0.5);
        s.push_incremental(1, 0.9);
        assert_relative_eq!(s.q[1], 0.7);
    }

    #[test]
    fn windowed_mean_averages_the_newest_targets() {
        let mut s = NodeStats::new(1, true);
        for x in [1.0, 0.0, 0.5, 0.9] {
            s.push_windowed(0, x, 0.5);
        }
        // ceil(0.5 * 4) = 2 newest targets: 0.5 and 0.9.
        assert_relative_eq!(s.q[0], 0.7);
        assert_eq!(s.n[0], 4);
        // A window fraction of 1 keeps the full-history mean.
        let mut full = NodeStats::new(1, true);
        for x in [1.0, 0.0, 0.5, 0.9] {
            full.push_windowed(0, x, 1.0);
        }
        assert_relative_eq!(full.q[0], 0.6);
    }

    #[test]
    fn best_visited_respects_orientation_and_ties() {
        let mut s = NodeStats::new(3, false);
        s.push_incremental(0, 0.4);
        s.push_incremental(2, 0.4);
        // Action 1 never tried: excluded even though its estimate (0.0)
        // would win a minimization.
        assert_eq!(s.best_visited_set(true).as_slice(), &[0, 2]);
        assert_eq!(s.best_visited_set(false).as_slice(), &[0, 2]);
        s.push_incremental(1, 0.1);
        assert_eq!(s.best_visited_set(true).as_slice(), &[0, 2]);
        assert_eq!(s.best_visited_set(false).as_slice(), &[1]);
        assert_eq!(s.best_visited_value(false), Some(0.1));
    }

    #[test]
    fn dag_keying_shares_by_state_and_depth() {
        let mut t = SearchTree::new(Keying::Dag, true, false);
        let root = t.insert_root(7, 2);
        let a = t.insert_child(root, 0, 9, 1, 2);
        // Different action, same resulting state and depth: same node.
        assert_eq!(t.find_child(root, 1, 9, 1), Some(a));
        // Same state at a different depth: distinct node.
        assert_eq!(t.find_child(root, 0, 9, 2), None);
        let b = t.insert_child(a, 0, 9, 2, 2);
        assert_ne!(a, b);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn tree_keying_separates_paths() {
        let mut t = SearchTree::new(Keying::Tree, true, false);
        let root = t.insert_root(7, 2);
        let via0 = t.insert_child(root, 0, 9, 1, 2);
        let via1 = t.insert_child(root, 1, 9, 1, 2);
        assert_ne!(via0, via1);
        assert_eq!(t.find_child(root, 0, 9, 1), Some(via0));
        assert_eq!(t.insert_child(root, 0, 9, 1, 2), via0);
    }

    #[test]
    fn node_lookup_ignores_the_path_only_under_dag_keying() {
        let mut dag = SearchTree::new(Keying::Dag, true, false);
        let root = dag.insert_root(7, 2);
        let child = dag.insert_child(root, 0, 9, 1, 2);
        // Position alone identifies the node: an untracked parent (or a
        // different action) still resolves to the same statistics.
        assert_eq!(dag.find_node(None, 1, 9, 1), Some(child));
        assert_eq!(dag.find_node(Some(root), 0, 9, 1), Some(child));
        assert_eq!(dag.find_node(None, 0, 9, 2), None);

        let mut tree = SearchTree::new(Keying::Tree, true, false);
        let root = tree.insert_root(7, 2);
        let child = tree.insert_child(root, 0, 9, 1, 2);
        // Path identity: the node is only reachable through its parent edge.
        assert_eq!(tree.find_node(Some(root), 0, 9, 1), Some(child));
        assert_eq!(tree.find_node(Some(root), 1, 9, 1), None);
        assert_eq!(tree.find_node(None, 0, 9, 1), None);
    }

    #[test]
    fn auto_prefers_dag_for_countable_spaces() {
        let dag = SearchTree::new(Keying::Auto, true, false);
        assert!(matches!(dag.keys, Keys::Dag(_)));
        let tree = SearchTree::new(Keying::Auto, false, false);
        assert!(matches!(tree.keys, Keys::Tree(_)));
    }
}

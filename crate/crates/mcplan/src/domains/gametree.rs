//! Synthetic two-player zero-sum game trees.
//!
//! A tree of uniform branching factor and depth, with the maximizing player
//! to move at even depths and the minimizing player at odd depths. Every edge
//! carries an integer value — non-negative below max nodes, non-positive
//! below min nodes — and a leaf is worth the sum of edge values along its
//! path, so nearby leaves have correlated payoffs. Edge values are drawn
//! from a counter-mode hash of `(tree seed, node id)`: the whole tree is a
//! pure function of its parameters and no part of it is materialized in
//! memory.
//!
//! Node ids encode the root-to-node path in a fixed number of bits per move
//! behind a leading 1 bit, so an id is globally unique and self-describing.
//! Transitions are deterministic; internal moves yield reward 0 and the move
//! onto a leaf yields the leaf payoff rescaled affinely to `[0, 1]` (planners
//! see a bounded reward scale; [`GameTreeMdp::raw_scale`] converts regrets
//! back to payoff units).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

use crate::mdp::{ActionId, GenerativeMdp, Objective, Outcome, StateId};
use crate::rng::mix64;
use crate::{Error, Result};

/// Stream tag separating edge-value hashing from other hash consumers.
const EDGE_TAG: u64 = 0x9a3e_71ee;

/// Largest edge magnitude (values are integers in `[0, 127]` below max
/// nodes and `[-127, 0]` below min nodes).
const EDGE_RANGE: u64 = 128;

/// Construction parameters for a [`GameTreeMdp`].
#[derive(Clone, Copy, Debug)]
pub struct GameTreeSpec {
    /// Moves available at every internal node.
    pub branching: u16,
    /// Number of moves from the root to a leaf.
    pub depth: usize,
    /// Seed determining every edge value.
    pub seed: u64,
}

/// A deterministic alternating-move game tree. See the module docs.
#[derive(Clone, Debug)]
pub struct GameTreeMdp {
    branching: u16,
    depth: usize,
    seed: u64,
    /// Bits reserved per move in the node id.
    bits: u32,
    /// Raw payoff range used for the affine rescale to `[0, 1]`.
    raw_min: f64,
    raw_span: f64,
    /// Explicit edge values (tests); keyed by child node id.
    explicit: Option<HashMap<StateId, f64>>,
    name: String,
    config_hash: u64,
}

impl GameTreeMdp {
    /// Tree with hashed edge values.
    pub fn new(spec: GameTreeSpec) -> Result<GameTreeMdp> {
        let bits = Self::check_shape(spec.branching, spec.depth)?;
        // Max nodes contribute edges in [0, 127] and move at even depths;
        // min nodes contribute edges in [-127, 0] at odd depths.
        let max_moves = spec.depth.div_ceil(2) as f64;
        let min_moves = (spec.depth / 2) as f64;
        let raw_min = -127.0 * min_moves;
        let raw_max = 127.0 * max_moves;
        let name = format!("gametree-b{}-d{}-s{}", spec.branching, spec.depth, spec.seed);
        let config_hash = mix64(
            mix64(spec.seed ^ EDGE_TAG) ^ ((spec.branching as u64) << 32 | spec.depth as u64),
        );
        Ok(GameTreeMdp {
            branching: spec.branching,
            depth: spec.depth,
            seed: spec.seed,
            bits,
            raw_min,
            raw_span: raw_max - raw_min,
            explicit: None,
            name,
            config_hash,
        })
    }

    /// Tree with explicitly listed edge values, keyed by child node id.
    /// Every internal node must have all `branching` outgoing edges listed.
    pub fn from_edges(
        branching: u16,
        depth: usize,
        edges: HashMap<StateId, f64>,
    ) -> Result<GameTreeMdp> {
        let bits = Self::check_shape(branching, depth)?;
        let mut tree = GameTreeMdp {
            branching,
            depth,
            seed: 0,
            bits,
            raw_min: 0.0,
            raw_span: 1.0,
            explicit: Some(edges),
            name: "gametree-explicit".to_string(),
            config_hash: 0,
        };
        // Walk the whole tree once: validate coverage, find the payoff range,
        // and fold the edge values into the config hash.
        let mut raw_min = f64::INFINITY;
        let mut raw_max = f64::NEG_INFINITY;
        let mut hash = mix64((branching as u64) << 32 | depth as u64);
        let mut stack = vec![(1u64, 0.0f64)];
        while let Some((node, sum)) = stack.pop() {
            if tree.depth_of(node) == depth {
                raw_min = raw_min.min(sum);
                raw_max = raw_max.max(sum);
                continue;
            }
            for a in 0..branching {
                let child = tree.child(node, a as ActionId);
                let edge = *tree
                    .explicit
                    .as_ref()
                    .expect("constructed above")
                    .get(&child)
                    .ok_or_else(|| {
                        Error::Config(format!("explicit game tree missing edge to node {child}"))
                    })?;
                hash = mix64(hash ^ child ^ edge.to_bits());
                stack.push((child, sum + edge));
            }
        }
        tree.raw_min = raw_min;
        tree.raw_span = if raw_max > raw_min { raw_max - raw_min } else { 1.0 };
        tree.config_hash = hash;
        Ok(tree)
    }

    fn check_shape(branching: u16, depth: usize) -> Result<u32> {
        if branching < 2 {
            return Err(Error::Config("game tree needs branching of at least 2".into()));
        }
        if depth == 0 {
            return Err(Error::Config("game tree needs depth of at least 1".into()));
        }
        let bits = 64 - u64::from(branching - 1).leading_zeros();
        if depth as u64 * bits as u64 > 62 {
            return Err(Error::Config(format!(
                "game tree too deep to address: {depth} moves at {bits} bits per move"
            )));
        }
        Ok(bits)
    }

    /// Root node id.
    pub fn root(&self) -> StateId {
        1
    }

    /// Id of the node obtained by playing `a` at `node`.
    pub fn child(&self, node: StateId, a: ActionId) -> StateId {
        (node << self.bits) | a as u64
    }

    /// Moves played between the root and `node`.
    pub fn depth_of(&self, node: StateId) -> usize {
        let bit_length = 64 - node.leading_zeros() as usize;
        (bit_length - 1) / self.bits as usize
    }

    /// Signed value of the edge entering `child` (in raw payoff units).
    pub fn edge_value(&self, child: StateId) -> f64 {
        if let Some(map) = &self.explicit {
            return map[&child];
        }
        let magnitude = (mix64(mix64(self.seed ^ EDGE_TAG) ^ child) % EDGE_RANGE) as f64;
        // The mover at the parent's depth owns the edge: max edges are
        // non-negative, min edges non-positive. A child at depth d hangs off
        // a parent at depth d-1.
        if self.depth_of(child) % 2 == 1 {
            magnitude
        } else {
            -magnitude
        }
    }

    /// Raw payoff of the leaf `node` (sum of edge values along its path).
    pub fn raw_leaf_value(&self, node: StateId) -> f64 {
        debug_assert_eq!(self.depth_of(node), self.depth);
        let mut sum = 0.0;
        let mut id = node;
        while id != 1 {
            sum += self.edge_value(id);
            id >>= self.bits;
        }
        sum
    }

    /// Factor converting `[0, 1]`-scale value differences back to raw payoff
    /// units.
    pub fn raw_scale(&self) -> f64 {
        self.raw_span
    }

    /// Lower end of the raw payoff range used in the rescale.
    pub fn raw_offset(&self) -> f64 {
        self.raw_min
    }

    fn leaf_reward(&self, leaf: StateId) -> f64 {
        (self.raw_leaf_value(leaf) - self.raw_min) / self.raw_span
    }
}

impl GenerativeMdp for GameTreeMdp {
    fn horizon(&self) -> usize {
        self.depth
    }

    fn action_count(&self, s: StateId) -> usize {
        if self.depth_of(s) == self.depth {
            0
        } else {
            self.branching as usize
        }
    }

    fn objective(&self, s: StateId) -> Objective {
        if self.depth_of(s) % 2 == 0 {
            Objective::Maximize
        } else {
            Objective::Minimize
        }
    }

    fn sample_transition(&self, s: StateId, a: ActionId, _rng: &mut ChaCha8Rng) -> (StateId, f64) {
        let child = self.child(s, a);
        let reward = if self.depth_of(child) == self.depth {
            self.leaf_reward(child)
        } else {
            0.0
        };
        (child, reward)
    }

    fn reward_bounds(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn enumerate_outcomes(&self, s: StateId, a: ActionId) -> Option<Vec<Outcome>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0); // unused: moves are deterministic
        let (state, reward) = self.sample_transition(s, a, &mut rng);
        Some(vec![Outcome {
            state,
            probability: 1.0,
            reward,
        }])
    }

    fn start_states(&self) -> Vec<StateId> {
        vec![self.root()]
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn config_hash(&self) -> u64 {
        self.config_hash
    }

    fn describe_state(&self, s: StateId) -> String {
        // Render the move path, most recent move last.
        let mut moves = Vec::new();
        let mut id = s;
        let mask = (1u64 << self.bits) - 1;
        while id != 1 {
            moves.push(id & mask);
            id >>= self.bits;
        }
        moves.reverse();
        if moves.is_empty() {
            "root".to_string()
        } else {
            moves
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

impl GameTreeMdp {
    /// A fully hand-analyzable four-leaf instance: two moves per player, one
    /// max move then one min move. Max's edges are worth 100 and 0; min's
    /// replies are worth {-50, -10} after the first move and {0, -127} after
    /// the second. Leaf payoffs are {50, 90, 0, -127}: minimax value 50,
    /// best max move 0.
    pub fn four_leaf_example() -> GameTreeMdp {
        // Ids with one bit per move: root 1, its children 2 and 3, leaves
        // 4..8 (child = parent << 1 | move).
        let edges = HashMap::from([
            (2u64, 100.0),
            (3, 0.0),
            (4, -50.0),
            (5, -10.0),
            (6, 0.0),
            (7, -127.0),
        ]);
        GameTreeMdp::from_edges(2, 2, edges).expect("hand-built tree is valid")
    }
}

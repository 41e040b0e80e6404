//! Explicit-table MDPs small enough to enumerate exhaustively.
//!
//! A [`TableMdp`] stores, for every state and action, the full outcome
//! distribution `(successor, probability, reward)`. These models back the
//! analytical experiments: they are the only domains on which flat-policy
//! enumeration and exact policy evaluation stay tractable, and they let every
//! statistic a planner produces be checked against exact arithmetic.
//!
//! Two fixed instances ship with the crate ([`TableMdp::two_level_tree`] and
//! [`TableMdp::three_level_lattice`]) along with a seeded generator of random
//! leveled instances ([`TableMdp::random_leveled`]).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::mdp::{ActionId, GenerativeMdp, Outcome, StateId};
use crate::rng::{mix64, RngStream};
use crate::{Error, Result};

/// Stream tag separating table-generator draws from all other consumers.
const TABLE_GEN_STREAM: u64 = 0x7ab1e;

/// Outcome rows per (state, action): `(successor, probability, reward)`.
type OutcomeRow = Vec<(StateId, f64, f64)>;

/// A finite-horizon MDP given by explicit transition tables.
///
/// State identifiers are dense: `0..states()`. A state with an empty action
/// list is terminal.
#[derive(Clone, Debug)]
pub struct TableMdp {
    name: String,
    horizon: usize,
    /// `actions[s][a]` lists the outcomes of taking `a` in `s`.
    actions: Vec<Vec<OutcomeRow>>,
    start: StateId,
    reward_bounds: (f64, f64),
    config_hash: u64,
}

impl TableMdp {
    /// Build and validate a table MDP.
    ///
    /// Validation: probabilities per (state, action) are positive and sum to
    /// 1 within 1e-12; successors are in range; successors within one action
    /// are distinct; the horizon is at least 1.
    pub fn new(
        name: impl Into<String>,
        horizon: usize,
        actions: Vec<Vec<OutcomeRow>>,
        start: StateId,
    ) -> Result<Self> {
        let name = name.into();
        if horizon == 0 {
            return Err(Error::Config(format!("{name}: horizon must be at least 1")));
        }
        let n = actions.len() as u64;
        if start >= n {
            return Err(Error::Config(format!("{name}: start state {start} out of range")));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut hash = mix64(horizon as u64 ^ mix64(start));
        for (s, acts) in actions.iter().enumerate() {
            for (a, outcomes) in acts.iter().enumerate() {
                if outcomes.is_empty() {
                    return Err(Error::Config(format!(
                        "{name}: state {s} action {a} has no outcomes"
                    )));
                }
                let mut total = 0.0;
                for (i, &(next, p, r)) in outcomes.iter().enumerate() {
                    if next >= n {
                        return Err(Error::Config(format!(
                            "{name}: state {s} action {a} successor {next} out of range"
                        )));
                    }
                    if !(p > 0.0 && p <= 1.0) {
                        return Err(Error::Config(format!(
                            "{name}: state {s} action {a} has non-positive probability {p}"
                        )));
                    }
                    if outcomes[..i].iter().any(|&(other, _, _)| other == next) {
                        return Err(Error::Config(format!(
                            "{name}: state {s} action {a} lists successor {next} twice"
                        )));
                    }
                    total += p;
                    lo = lo.min(r);
                    hi = hi.max(r);
                    hash = mix64(hash ^ next ^ p.to_bits() ^ mix64(r.to_bits()));
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "{name}: state {s} action {a} probabilities sum to {total}, not 1"
                    )));
                }
            }
        }
        if !lo.is_finite() {
            // All states terminal: harmless but useless; keep bounds sane.
            lo = 0.0;
            hi = 0.0;
        }
        Ok(TableMdp {
            name,
            horizon,
            actions,
            start,
            reward_bounds: (lo, hi),
            config_hash: hash,
        })
    }

    /// Number of states.
    pub fn states(&self) -> usize {
        self.actions.len()
    }

    /// Horizon-2 instance shaped like a depth-2 tree: one root, two middle
    /// states, two terminal sinks. Two actions everywhere, two equally likely
    /// outcomes per action.
    ///
    /// Designed so the minimal action-value gap with one step to go, the
    /// minimal gap at the root, and the minimal gap between complete
    /// deterministic policies all equal 0.3 — which keeps the uniform-sampling
    /// baseline bounds non-vacuous at small budgets.
    pub fn two_level_tree() -> TableMdp {
        let s0: Vec<OutcomeRow> = vec![
            vec![(1, 0.5, 0.5), (2, 0.5, 0.4)], // mean immediate reward 0.45
            vec![(1, 0.5, 0.2), (2, 0.5, 0.1)], // mean immediate reward 0.15
        ];
        let x0: Vec<OutcomeRow> = vec![
            vec![(3, 0.5, 1.0), (4, 0.5, 0.6)], // mean 0.8  (best)
            vec![(3, 0.5, 0.3), (4, 0.5, 0.1)], // mean 0.2
        ];
        let x1: Vec<OutcomeRow> = vec![
            vec![(3, 0.5, 0.3), (4, 0.5, 0.0)], // mean 0.15
            vec![(3, 0.5, 0.9), (4, 0.5, 0.6)], // mean 0.75 (best)
        ];
        TableMdp::new("two-level-tree", 2, vec![s0, x0, x1, vec![], vec![]], 0)
            .expect("hand-built instance is valid")
    }

    /// Horizon-3 instance with two shared states per level (a lattice, not a
    /// tree), two actions everywhere, and outcome probabilities 0.6/0.4.
    ///
    /// Design targets: the action-value gap at every reachable decision is at
    /// least 0.1 (the root gap is 0.1096, the smallest), outcome spreads
    /// within each action are wide so Monte-Carlo planners keep a measurable
    /// error rate at budgets in the thousands, and the state sharing keeps
    /// the flat-policy count at 32.
    pub fn three_level_lattice() -> TableMdp {
        // Level assignments: 0 = root, {1,2} middle, {3,4} last decisions,
        // {5,6} terminal sinks. Action values, bottom-up: the last decisions
        // are worth (0.70, 0.55) and (0.20, 0.41), the middle ones
        // (0.998, 1.126) and (0.696, 0.904), the root (1.3732, 1.4828).
        let s0: Vec<OutcomeRow> = vec![
            vec![(1, 0.6, 0.5), (2, 0.4, 0.09)],
            vec![(2, 0.6, 0.35), (1, 0.4, 0.7)],
        ];
        let u0: Vec<OutcomeRow> = vec![
            vec![(3, 0.6, 0.55), (4, 0.4, 0.21)],
            vec![(4, 0.6, 0.9), (3, 0.4, 0.15)],
        ];
        let u1: Vec<OutcomeRow> = vec![
            vec![(4, 0.6, 0.05), (3, 0.4, 0.35)],
            vec![(3, 0.6, 0.5), (4, 0.4, 0.05)],
        ];
        let v0: Vec<OutcomeRow> = vec![
            vec![(5, 0.6, 1.0), (6, 0.4, 0.25)],
            vec![(5, 0.6, 0.85), (6, 0.4, 0.1)],
        ];
        let v1: Vec<OutcomeRow> = vec![
            vec![(5, 0.6, 0.0), (6, 0.4, 0.5)],
            vec![(5, 0.6, 0.65), (6, 0.4, 0.05)],
        ];
        TableMdp::new(
            "three-level-lattice",
            3,
            vec![s0, u0, u1, v0, v1, vec![], vec![]],
            0,
        )
        .expect("hand-built instance is valid")
    }

    /// Seeded random leveled MDP with `levels` decision levels, `width`
    /// states per non-root level, `k` actions per state, and (where the next
    /// level allows it) two outcomes per action. Probabilities stay at least
    /// 0.2 away from zero; rewards are uniform on [0, 1]. The horizon equals
    /// `levels`.
    pub fn random_leveled(seed: u64, levels: usize, width: usize, k: usize) -> Result<TableMdp> {
        if levels == 0 || width == 0 || k == 0 {
            return Err(Error::Config(
                "random_leveled needs at least one level, one state per level, one action".into(),
            ));
        }
        let mut rng = RngStream::new(seed, TABLE_GEN_STREAM).rng();
        let terminals = width.max(2);
        // States are laid out level by level: root, decision levels, sinks.
        let mut level_start = vec![0u64];
        let mut total = 1u64;
        for _ in 1..levels {
            level_start.push(total);
            total += width as u64;
        }
        let terminal_start = total;
        total += terminals as u64;

        let mut actions: Vec<Vec<OutcomeRow>> = Vec::with_capacity(total as usize);
        for lvl in 0..levels {
            let count = if lvl == 0 { 1 } else { width };
            let (next_base, next_width) = if lvl == levels - 1 {
                (terminal_start, terminals)
            } else {
                (level_start[lvl + 1], width)
            };
            for _ in 0..count {
                let mut rows = Vec::with_capacity(k);
                for _ in 0..k {
                    let first = rng.gen_range(0..next_width) as u64;
                    if next_width == 1 {
                        rows.push(vec![(next_base + first, 1.0, rng.gen())]);
                        continue;
                    }
                    // Second successor distinct from the first.
                    let mut second = rng.gen_range(0..next_width - 1) as u64;
                    if second >= first {
                        second += 1;
                    }
                    let p = 0.2 + 0.6 * rng.gen::<f64>();
                    rows.push(vec![
                        (next_base + first, p, rng.gen()),
                        (next_base + second, 1.0 - p, rng.gen()),
                    ]);
                }
                actions.push(rows);
            }
        }
        for _ in 0..terminals {
            actions.push(vec![]);
        }
        TableMdp::new(format!("random-leveled-{seed}"), levels, actions, 0)
    }
}

impl GenerativeMdp for TableMdp {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn action_count(&self, s: StateId) -> usize {
        self.actions[s as usize].len()
    }

    fn sample_transition(&self, s: StateId, a: ActionId, rng: &mut ChaCha8Rng) -> (StateId, f64) {
        let outcomes = &self.actions[s as usize][a as usize];
        if outcomes.len() == 1 {
            let (next, _, r) = outcomes[0];
            return (next, r);
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(next, p, r) in outcomes {
            acc += p;
            if u < acc {
                return (next, r);
            }
        }
        let &(next, _, r) = outcomes.last().expect("validated non-empty");
        (next, r)
    }

    fn reward_bounds(&self) -> (f64, f64) {
        self.reward_bounds
    }

    fn enumerate_outcomes(&self, s: StateId, a: ActionId) -> Option<Vec<Outcome>> {
        Some(
            self.actions[s as usize][a as usize]
                .iter()
                .map(|&(state, probability, reward)| Outcome {
                    state,
                    probability,
                    reward,
                })
                .collect(),
        )
    }

    fn start_states(&self) -> Vec<StateId> {
        vec![self.start]
    }

    fn state_count(&self) -> Option<u64> {
        Some(self.actions.len() as u64)
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn config_hash(&self) -> u64 {
        self.config_hash
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_tables() {
        // Probabilities not summing to one.
        let bad = TableMdp::new("bad", 1, vec![vec![vec![(1, 0.5, 0.0)]], vec![]], 0);
        assert!(matches!(bad, Err(Error::Config(_))));
        // Successor out of range.
        let bad = TableMdp::new("bad", 1, vec![vec![vec![(5, 1.0, 0.0)]], vec![]], 0);
        assert!(matches!(bad, Err(Error::Config(_))));
        // Duplicate successor within one action.
        let bad = TableMdp::new(
            "bad",
            1,
            vec![vec![vec![(1, 0.5, 0.0), (1, 0.5, 0.0)]], vec![]],
            0,
        );
        assert!(matches!(bad, Err(Error::Config(_))));
    }

    #[test]
    fn fixed_instances_have_documented_shape() {
        let tree = TableMdp::two_level_tree();
        assert_eq!(tree.horizon(), 2);
        assert_eq!(tree.states(), 5);
        assert_eq!(tree.action_count(0), 2);
        assert!(tree.is_terminal(3) && tree.is_terminal(4));

        let lattice = TableMdp::three_level_lattice();
        assert_eq!(lattice.horizon(), 3);
        assert_eq!(lattice.states(), 7);
        for s in 0..5 {
            assert_eq!(lattice.action_count(s), 2);
        }
        assert!(lattice.is_terminal(5) && lattice.is_terminal(6));
    }

    #[test]
    fn sampling_matches_enumerated_distribution() {
        let lattice = TableMdp::three_level_lattice();
        let mut rng = RngStream::new(11, 1).rng();
        let outcomes = lattice.enumerate_outcomes(0, 0).unwrap();
        let mut counts = vec![0u64; lattice.states()];
        let n = 200_000;
        for _ in 0..n {
            let (next, r) = lattice.sample_transition(0, 0, &mut rng);
            counts[next as usize] += 1;
            let expected = outcomes.iter().find(|o| o.state == next).unwrap();
            assert_eq!(r, expected.reward);
        }
        for o in &outcomes {
            let freq = counts[o.state as usize] as f64 / n as f64;
            let sigma = (o.probability * (1.0 - o.probability) / n as f64).sqrt();
            assert!(
                (freq - o.probability).abs() < 4.0 * sigma,
                "state {} frequency {freq} vs probability {}",
                o.state,
                o.probability
            );
        }
    }

    #[test]
    fn random_leveled_is_reproducible() {
        let a = TableMdp::random_leveled(3, 2, 2, 2).unwrap();
        let b = TableMdp::random_leveled(3, 2, 2, 2).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        let c = TableMdp::random_leveled(4, 2, 2, 2).unwrap();
        assert_ne!(a.config_hash(), c.config_hash());
    }
}

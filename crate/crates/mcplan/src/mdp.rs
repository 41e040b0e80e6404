//! Core abstractions for finite-horizon generative MDPs.
//!
//! Planners interact with a domain exclusively through [`GenerativeMdp`]: a
//! sampling model that, given a state and an action, draws a successor state
//! and an immediate reward. Domains that can also *enumerate* their outcome
//! distributions (needed by the exact oracles and the flat-policy baselines)
//! advertise that through [`GenerativeMdp::enumerate_outcomes`].
//!
//! States are opaque 64-bit identifiers; each domain defines its own packing.
//! Actions are indices into the state's applicable-action list, so an action
//! identifier is only meaningful together with its state.

use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Opaque, domain-defined state identifier.
pub type StateId = u64;

/// Index into a state's applicable-action list.
pub type ActionId = u16;

/// Whether the decision maker at a state maximizes or minimizes value.
///
/// Single-agent domains maximize everywhere; adversarial game trees alternate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Maximize,
    Minimize,
}

impl Objective {
    /// +1.0 for maximizing states, -1.0 for minimizing states.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Objective::Maximize => 1.0,
            Objective::Minimize => -1.0,
        }
    }
}

/// One entry of an enumerated outcome distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub state: StateId,
    pub probability: f64,
    pub reward: f64,
}

/// A finite-horizon MDP accessed through sampling.
///
/// Implementations must be deterministic functions of their construction
/// parameters plus the provided RNG: two calls with equal arguments and
/// equally-seeded generators return identical results. Domains are immutable
/// after construction and safe to share across threads.
pub trait GenerativeMdp: Sync {
    /// Planning horizon: the number of decisions available from a start state.
    fn horizon(&self) -> usize;

    /// Number of applicable actions at `s`. Zero if and only if `s` is
    /// terminal. Action identifiers `0..action_count(s)` index a canonical,
    /// stable ordering chosen by the domain.
    fn action_count(&self, s: StateId) -> usize;

    /// Draw `(successor, reward)` for taking action `a` in state `s`.
    fn sample_transition(&self, s: StateId, a: ActionId, rng: &mut ChaCha8Rng) -> (StateId, f64);

    /// True when no action is applicable in `s`.
    fn is_terminal(&self, s: StateId) -> bool {
        self.action_count(s) == 0
    }

    /// Whether the state maximizes or minimizes. Defaults to maximizing.
    fn objective(&self, _s: StateId) -> Objective {
        Objective::Maximize
    }

    /// Inclusive bounds on single-step rewards.
    fn reward_bounds(&self) -> (f64, f64);

    /// Full outcome distribution of `(s, a)`, if the domain supports
    /// enumeration. Probabilities must be positive and sum to 1 within 1e-12.
    fn enumerate_outcomes(&self, _s: StateId, _a: ActionId) -> Option<Vec<Outcome>> {
        None
    }

    /// Declared start states; exact oracles cover everything reachable from
    /// these within the horizon.
    fn start_states(&self) -> Vec<StateId>;

    /// If every state identifier is below some dense bound, that bound.
    /// Lets search trees use flat arrays instead of hash maps.
    fn state_count(&self) -> Option<u64> {
        None
    }

    /// Whether rollouts should, by default, continue past the decision
    /// horizon until a terminal state is reached (goal-driven domains) rather
    /// than stop at depth `horizon()`.
    fn goal_driven(&self) -> bool {
        false
    }

    /// Stable name identifying the domain family (used in cache keys and CSV
    /// metadata).
    fn name(&self) -> &str;

    /// Hash of the construction parameters, for cache keys. Must change
    /// whenever the model dynamics change.
    fn config_hash(&self) -> u64;

    /// Human-readable rendering of a state, for reports.
    fn describe_state(&self, s: StateId) -> String {
        format!("{s}")
    }

    /// Human-readable rendering of an action, for reports.
    fn describe_action(&self, _s: StateId, a: ActionId) -> String {
        format!("{a}")
    }
}

/// A sampled episode: `k` steps of `(state, action, reward)` plus the final
/// state, so `states.len() == k + 1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
    pub rewards: Vec<f64>,
    /// For two-phase planners: the index of the first estimation-phase
    /// decision, when one applies to this episode.
    pub switch_index: Option<usize>,
}

impl Trajectory {
    /// Number of steps taken.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Sum of rewards from step `i` (inclusive) to the end of the episode.
    pub fn reward_to_go(&self, i: usize) -> f64 {
        self.rewards[i..].iter().sum()
    }

    /// Total episode return.
    pub fn total_return(&self) -> f64 {
        self.reward_to_go(0)
    }

    /// Internal consistency: `k+1` states, `k` actions, `k` rewards.
    pub fn is_consistent(&self) -> bool {
        self.states.len() == self.actions.len() + 1 && self.rewards.len() == self.actions.len()
    }
}

/// Sample one episode from `start`, choosing actions with `select`.
///
/// `select(state, depth, action_count, rng)` must return an action below
/// `action_count`; anything else is reported as a contract violation. The
/// episode ends at the first terminal state or after `max_depth` steps,
/// whichever comes first.
pub fn rollout<M, F>(
    mdp: &M,
    start: StateId,
    max_depth: usize,
    mut select: F,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory>
where
    M: GenerativeMdp + ?Sized,
    F: FnMut(StateId, usize, usize, &mut ChaCha8Rng) -> ActionId,
{
    if max_depth == 0 {
        return Err(Error::Config("rollout max_depth must be at least 1".into()));
    }
    let mut traj = Trajectory {
        states: Vec::with_capacity(max_depth + 1),
        actions: Vec::with_capacity(max_depth),
        rewards: Vec::with_capacity(max_depth),
        switch_index: None,
    };
    traj.states.push(start);
    let mut s = start;
    for depth in 0..max_depth {
        let k = mdp.action_count(s);
        if k == 0 {
            break;
        }
        let a = select(s, depth, k, rng);
        if (a as usize) >= k {
            return Err(Error::Contract(format!(
                "policy chose action {a} but state {s} has only {k} applicable actions"
            )));
        }
        let (next, r) = mdp.sample_transition(s, a, rng);
        traj.actions.push(a);
        traj.rewards.push(r);
        traj.states.push(next);
        s = next;
    }
    debug_assert!(traj.is_consistent());
    Ok(traj)
}

/// Uniform-random action choice; the default rollout policy.
#[inline]
pub fn uniform_action(k: usize, rng: &mut ChaCha8Rng) -> ActionId {
    use rand::Rng;
    debug_assert!(k > 0);
    rng.gen_range(0..k) as ActionId
}

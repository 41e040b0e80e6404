//! Flat-policy baselines: planning as a bandit over deterministic policies.
//!
//! A *flat policy* assigns one action to every `(depth, state)` pair it can
//! itself reach from the planning root within the horizon — a minimal
//! deterministic policy. [`enumerate_policies`] lists all of them in a
//! canonical order by backtracking over pairs (shallowest depth first,
//! then lowest state id), refusing via
//! [`ResourceCap`](crate::Error::ResourceCap) when there are more than a cap.
//!
//! Two planners consume the list:
//!
//! - `naive`: cycles through the policies round-robin, one dedicated rollout
//!   per policy per sweep, and recommends the root action of the policy with
//!   the best sampled mean return.
//! - `crafty`: runs uniformly random rollouts and credits each rollout's
//!   *full return* to every policy consistent with it (the policies that
//!   would have produced that trajectory), so one rollout feeds many arms.
//!
//! Both require a pure maximization problem; decision points that minimize
//! are rejected as a configuration error.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand_chacha::ChaCha8Rng;

use crate::mdp::{rollout, uniform_action, ActionId, GenerativeMdp, Objective, StateId};
use crate::{Error, Result};

use super::{choose_uniform, PlanConfig, PlanOutcome, Probe};

/// Upper limit on the `(depth, state)` closure walked before enumeration.
const PAIR_CAP: usize = 5_000_000;

/// A minimal deterministic policy: one action per reachable `(depth, state)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatPolicy {
    /// `(depth, state) -> action`, covering exactly the pairs reachable from
    /// the root under the policy itself.
    pub choices: BTreeMap<(u32, StateId), ActionId>,
}

impl FlatPolicy {
    /// The action this policy plays first.
    pub fn root_action(&self, s0: StateId) -> ActionId {
        self.choices[&(0, s0)]
    }
}

/// Natural logarithm of the crude policy-count bound `K^(Σ_{i<H} B^i)`:
/// at most `B^i` distinct states at depth `i`, each with at most `K` choices.
/// The true count is usually far smaller because depth levels share states.
pub fn policy_count_bound_log(max_actions: u32, max_outcomes: u32, horizon: u32) -> f64 {
    let b = max_outcomes as f64;
    let mut level = 1.0;
    let mut states = 0.0;
    for _ in 0..horizon {
        states += level;
        level *= b;
    }
    states * (max_actions.max(1) as f64).ln()
}

/// All flat policies rooted at `s0`, in canonical order (pairs processed
/// shallowest-first then by state id, actions in index order).
pub fn enumerate_policies(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    cap: u64,
) -> Result<Vec<FlatPolicy>> {
    if mdp.is_terminal(s0) {
        return Err(Error::Config("cannot enumerate policies at a terminal state".into()));
    }
    let horizon = mdp.horizon() as u32;

    // Depth-aware closure walk: collects the action/outcome widths for the
    // count bound and rejects minimizing decision points up front.
    let mut max_actions = 0u32;
    let mut max_outcomes = 0u32;
    let mut seen: BTreeSet<(u32, StateId)> = BTreeSet::new();
    seen.insert((0, s0));
    let mut frontier = vec![(0u32, s0)];
    while let Some((d, s)) = frontier.pop() {
        if mdp.objective(s) == Objective::Minimize {
            return Err(Error::Config(
                "flat-policy planners require a pure maximization problem".into(),
            ));
        }
        let k = mdp.action_count(s);
        max_actions = max_actions.max(k as u32);
        for a in 0..k {
            let outcomes = mdp.enumerate_outcomes(s, a as ActionId).ok_or_else(|| {
                Error::Config(format!(
                    "flat-policy planners need enumerable outcomes, which {} does not provide",
                    mdp.name()
                ))
            })?;
            max_outcomes = max_outcomes.max(outcomes.len() as u32);
            if d + 1 >= horizon {
                continue;
            }
            for o in &outcomes {
                if !mdp.is_terminal(o.state) && seen.insert((d + 1, o.state)) {
                    frontier.push((d + 1, o.state));
                    if seen.len() > PAIR_CAP {
                        return Err(Error::ResourceCap(format!(
                            "state-depth closure of {} exceeds {PAIR_CAP} pairs",
                            mdp.name()
                        )));
                    }
                }
            }
        }
    }

    // When even the crude bound fits under the cap, enumeration cannot
    // overrun and the per-policy cap check is skipped.
    let watch_cap = policy_count_bound_log(max_actions, max_outcomes, horizon) > (cap as f64).ln();

    let mut out = Vec::new();
    let mut assigned: BTreeMap<(u32, StateId), ActionId> = BTreeMap::new();
    let mut pending: BTreeSet<(u32, StateId)> = BTreeSet::new();
    pending.insert((0, s0));
    extend(mdp, horizon, cap, watch_cap, &mut assigned, &mut pending, &mut out)?;
    Ok(out)
}

fn extend(
    mdp: &dyn GenerativeMdp,
    horizon: u32,
    cap: u64,
    watch_cap: bool,
    assigned: &mut BTreeMap<(u32, StateId), ActionId>,
    pending: &mut BTreeSet<(u32, StateId)>,
    out: &mut Vec<FlatPolicy>,
) -> Result<()> {
    let Some(&(d, s)) = pending.iter().next() else {
        if watch_cap && out.len() as u64 >= cap {
            return Err(Error::ResourceCap(format!(
                "{} has more than {cap} flat policies",
                mdp.name()
            )));
        }
        out.push(FlatPolicy { choices: assigned.clone() });
        return Ok(());
    };
    pending.remove(&(d, s));
    let k = mdp.action_count(s);
    for a in 0..k as ActionId {
        let outcomes = mdp.enumerate_outcomes(s, a).expect("checked in the closure walk");
        let mut added: Vec<(u32, StateId)> = Vec::new();
        if d + 1 < horizon {
            for o in &outcomes {
                let pair = (d + 1, o.state);
                debug_assert!(!assigned.contains_key(&pair), "pairs are popped depth-first");
                if !mdp.is_terminal(o.state) && pending.insert(pair) {
                    added.push(pair);
                }
            }
        }
        assigned.insert((d, s), a);
        let result = extend(mdp, horizon, cap, watch_cap, assigned, pending, out);
        assigned.remove(&(d, s));
        for pair in added {
            pending.remove(&pair);
        }
        result?;
    }
    pending.insert((d, s));
    Ok(())
}

/// Exact expected return of following `policy` from `s0`.
pub fn policy_value(mdp: &dyn GenerativeMdp, s0: StateId, policy: &FlatPolicy) -> f64 {
    fn eval(
        mdp: &dyn GenerativeMdp,
        policy: &FlatPolicy,
        d: u32,
        s: StateId,
        horizon: u32,
        memo: &mut HashMap<(u32, StateId), f64>,
    ) -> f64 {
        if d >= horizon || mdp.is_terminal(s) {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(d, s)) {
            return v;
        }
        let a = *policy
            .choices
            .get(&(d, s))
            .expect("policy domain covers its own reachable pairs");
        let mut v = 0.0;
        for o in mdp.enumerate_outcomes(s, a).expect("enumerable model") {
            v += o.probability * (o.reward + eval(mdp, policy, d + 1, o.state, horizon, memo));
        }
        memo.insert((d, s), v);
        v
    }
    eval(mdp, policy, 0, s0, mdp.horizon() as u32, &mut HashMap::new())
}

/// Every flat policy with its exact value.
pub fn flat_policy_values(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    cap: u64,
) -> Result<Vec<(FlatPolicy, f64)>> {
    Ok(enumerate_policies(mdp, s0, cap)?
        .into_iter()
        .map(|p| {
            let v = policy_value(mdp, s0, &p);
            (p, v)
        })
        .collect())
}

/// Gap between the best flat policy and the best strictly worse one, or
/// `None` when all policies are equivalent (within 1e-12).
pub fn flat_policy_gap(mdp: &dyn GenerativeMdp, s0: StateId, cap: u64) -> Result<Option<f64>> {
    let values = flat_policy_values(mdp, s0, cap)?;
    let best = values.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let runner_up = values
        .iter()
        .map(|&(_, v)| v)
        .filter(|&v| v < best - 1e-12)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(runner_up.is_finite().then(|| best - runner_up))
}

/// Outcome of a flat planning run, exposing the policy-level statistics.
pub struct FlatRun {
    /// Index (into the canonical policy order) of the recommended policy.
    pub chosen: usize,
    /// Sampled mean return per policy.
    pub means: Vec<f64>,
    /// Rollouts credited to each policy.
    pub counts: Vec<u64>,
}

/// Round-robin dedicated rollouts: sweep the policies in order, one episode
/// each, and recommend the best sampled mean.
pub fn naive_run(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    budget: u64,
    policies: &[FlatPolicy],
    rng: &mut ChaCha8Rng,
    probe: &mut dyn Probe,
) -> Result<FlatRun> {
    let mut means = vec![0.0; policies.len()];
    let mut counts = vec![0u64; policies.len()];
    let horizon = mdp.horizon();
    for iter in 0..budget {
        let idx = (iter % policies.len() as u64) as usize;
        let policy = &policies[idx];
        let traj = rollout(
            mdp,
            s0,
            horizon,
            |s, d, _k, _rng| policy.choices[&(d as u32, s)],
            rng,
        )?;
        counts[idx] += 1;
        means[idx] += (traj.total_return() - means[idx]) / counts[idx] as f64;
        probe.iteration(iter + 1, &traj);
    }
    Ok(finish_run(means, counts, rng))
}

/// Shared uniform rollouts: every policy consistent with the episode is
/// credited with the episode's full return.
pub fn crafty_run(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    budget: u64,
    policies: &[FlatPolicy],
    rng: &mut ChaCha8Rng,
    probe: &mut dyn Probe,
) -> Result<FlatRun> {
    // Dense choice matrix for fast consistency checks: rows are policies,
    // columns are the pairs appearing in any policy's domain.
    let mut pair_index: HashMap<(u32, StateId), u32> = HashMap::new();
    for p in policies {
        for &pair in p.choices.keys() {
            let next = pair_index.len() as u32;
            pair_index.entry(pair).or_insert(next);
        }
    }
    const ABSENT: u16 = u16::MAX;
    let mut dense = vec![vec![ABSENT; pair_index.len()]; policies.len()];
    for (row, p) in policies.iter().enumerate() {
        for (&pair, &a) in &p.choices {
            dense[row][pair_index[&pair] as usize] = a;
        }
    }

    let mut means = vec![0.0; policies.len()];
    let mut counts = vec![0u64; policies.len()];
    let horizon = mdp.horizon();
    let mut step_pairs: Vec<(u32, ActionId)> = Vec::new();
    for iter in 0..budget {
        let traj = rollout(mdp, s0, horizon, |_s, _d, k, rng| uniform_action(k, rng), rng)?;
        let ret = traj.total_return();
        step_pairs.clear();
        let mut in_any_domain = true;
        for (d, (&s, &a)) in traj.states.iter().zip(&traj.actions).enumerate() {
            match pair_index.get(&(d as u32, s)) {
                Some(&col) => step_pairs.push((col, a)),
                None => {
                    in_any_domain = false;
                    break;
                }
            }
        }
        if in_any_domain {
            for (row, choices) in dense.iter().enumerate() {
                if step_pairs.iter().all(|&(col, a)| choices[col as usize] == a) {
                    counts[row] += 1;
                    means[row] += (ret - means[row]) / counts[row] as f64;
                }
            }
        }
        probe.iteration(iter + 1, &traj);
    }
    Ok(finish_run(means, counts, rng))
}

fn finish_run(means: Vec<f64>, counts: Vec<u64>, rng: &mut ChaCha8Rng) -> FlatRun {
    let best = means
        .iter()
        .zip(&counts)
        .filter(|&(_, &c)| c > 0)
        .map(|(&m, _)| m)
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<u16> = (0..means.len())
        .filter(|&i| counts[i] > 0 && means[i] == best)
        .map(|i| i as u16)
        .collect();
    debug_assert!(!tied.is_empty(), "some policy is always sampled");
    let chosen = choose_uniform(&tied, rng) as usize;
    FlatRun { chosen, means, counts }
}

pub(crate) fn plan_naive(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    budget: u64,
    config: &PlanConfig,
    rng: &mut ChaCha8Rng,
    probe: &mut dyn Probe,
) -> Result<PlanOutcome> {
    let policies = enumerate_policies(mdp, s0, config.policy_cap)?;
    let run = naive_run(mdp, s0, budget, &policies, rng, probe)?;
    Ok(PlanOutcome {
        action: policies[run.chosen].root_action(s0),
        root_q: Vec::new(),
        root_n: Vec::new(),
    })
}

pub(crate) fn plan_crafty(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    budget: u64,
    config: &PlanConfig,
    rng: &mut ChaCha8Rng,
    probe: &mut dyn Probe,
) -> Result<PlanOutcome> {
    let policies = enumerate_policies(mdp, s0, config.policy_cap)?;
    let run = crafty_run(mdp, s0, budget, &policies, rng, probe)?;
    Ok(PlanOutcome {
        action: policies[run.chosen].root_action(s0),
        root_q: Vec::new(),
        root_n: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{GameTreeMdp, TableMdp};
    use crate::planners::{plan as plan_any, PlanConfig, PlannerSpec};
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    #[test]
    fn two_level_tree_has_eight_policies_with_known_values() {
        let m = TableMdp::two_level_tree();
        let values = flat_policy_values(&m, 0, 1_000).unwrap();
        assert_eq!(values.len(), 8);
        // Crude bound is exact here: no state is shared between depths.
        assert_relative_eq!(policy_count_bound_log(2, 2, 2), (8f64).ln());
        let best = values.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(best, 1.225, epsilon = 1e-12);
        // Best and second-best distinct values are 1.225 and 0.925.
        assert_relative_eq!(flat_policy_gap(&m, 0, 1_000).unwrap().unwrap(), 0.3, epsilon = 1e-12);
        // Canonical order: the first policy plays action 0 everywhere.
        assert!(values[0].0.choices.values().all(|&a| a == 0));
    }

    #[test]
    fn lattice_policy_maximum_matches_value_iteration() {
        let m = TableMdp::three_level_lattice();
        let values = flat_policy_values(&m, 0, 1_000).unwrap();
        assert_eq!(values.len(), 32);
        let best = values.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
        let oracle = crate::oracle::OracleTable::build(&m, 1 << 20).unwrap();
        assert_relative_eq!(best, oracle.value(0, 3), epsilon = 1e-12);
    }

    #[test]
    fn policy_cap_is_enforced() {
        let m = TableMdp::two_level_tree();
        let err = enumerate_policies(&m, 0, 7).unwrap_err();
        assert!(matches!(err, Error::ResourceCap(_)));
        assert_eq!(enumerate_policies(&m, 0, 8).unwrap().len(), 8);
    }

    #[test]
    fn minimizing_nodes_are_rejected() {
        let t = GameTreeMdp::four_leaf_example();
        let err = enumerate_policies(&t, 1, 1_000).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn both_baselines_find_the_best_root_action() {
        let m = TableMdp::two_level_tree();
        for spec in ["naive", "crafty"] {
            let config = PlanConfig::new(PlannerSpec::parse(spec).unwrap());
            let out = plan_any(&m, 0, 2_000, &config, &RngStream::new(31, 0)).unwrap();
            assert_eq!(out.action, 0, "planner {spec}");
        }
    }

    #[test]
    fn naive_spreads_rollouts_round_robin() {
        let m = TableMdp::two_level_tree();
        let policies = enumerate_policies(&m, 0, 1_000).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        let run =
            naive_run(&m, 0, 20, &policies, &mut rng, &mut crate::planners::NoProbe).unwrap();
        // 20 rollouts over 8 policies: the first four policies get 3 each.
        assert_eq!(run.counts.iter().sum::<u64>(), 20);
        assert_eq!(&run.counts[..4], &[3, 3, 3, 3]);
        assert_eq!(&run.counts[4..], &[2, 2, 2, 2]);
    }

    #[test]
    fn crafty_shares_each_rollout_with_all_consistent_policies() {
        let m = TableMdp::two_level_tree();
        let policies = enumerate_policies(&m, 0, 1_000).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let budget = 50;
        let run =
            crafty_run(&m, 0, budget, &policies, &mut rng, &mut crate::planners::NoProbe).unwrap();
        // Each episode fixes the root choice and one middle choice, leaving
        // the other middle state free: exactly 2 of the 8 policies match.
        assert_eq!(run.counts.iter().sum::<u64>(), 2 * budget);
    }

    #[test]
    fn runs_replay_identically() {
        let m = TableMdp::three_level_lattice();
        for spec in ["naive", "crafty"] {
            let config = PlanConfig::new(PlannerSpec::parse(spec).unwrap());
            let stream = RngStream::new(77, 1);
            let a = plan_any(&m, 0, 300, &config, &stream).unwrap();
            let b = plan_any(&m, 0, 300, &config, &stream).unwrap();
            assert_eq!(a.action, b.action, "planner {spec}");
        }
    }
}

//! UCT and its root-ε-greedy variant GCT.
//!
//! Each episode walks from the root. At decision points that already have
//! statistics, actions are chosen by UCB1 — untried actions first (uniformly
//! among them), then the argmax of `value + c·sqrt(ln N / n_a)` (argmin
//! oriented at minimizing nodes). The first state encountered without
//! statistics is added to the tree, and the rest of the episode is a uniform
//! rollout. Afterwards every tracked decision on the episode folds its
//! reward-to-go into the running mean of the action taken (one running
//! average per state–action cell).
//!
//! GCT differs at the root only: with probability ε it explores uniformly
//! over all applicable actions, otherwise it exploits the best tried action.
//! Untried-first does not apply at the root under GCT.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::mdp::{uniform_action, GenerativeMdp, Objective, StateId, Trajectory};
use crate::{Error, Result};

use super::tree::{NodeStats, SearchTree};
use super::{choose_uniform, episode_limit, CParam, PlanConfig, PlanOutcome, Probe, Recommend};

/// UCB1 action choice at a tracked decision point.
pub(crate) fn ucb1_select(
    st: &NodeStats,
    maximizing: bool,
    c: CParam,
    rng: &mut ChaCha8Rng,
) -> u16 {
    let untried = st.unvisited();
    if !untried.is_empty() {
        return choose_uniform(&untried, rng);
    }
    let ln_total = (st.total_visits() as f64).ln();
    let cv = match c {
        CParam::Fixed(v) => v,
        // The automatic coefficient is the node owner's best empirical value
        // as-is (max when maximizing, min when minimizing). On domains where
        // every return is negative this makes the bonus term negative, i.e.
        // the rule turns greedy once every action has been tried; that is the
        // documented behaviour, not an accident.
        CParam::Auto => st
            .best_visited_value(maximizing)
            .expect("every action has been tried here"),
    };
    let sign = if maximizing { 1.0 } else { -1.0 };
    let mut ties: Vec<u16> = Vec::with_capacity(st.arity());
    let mut best_score = f64::NEG_INFINITY;
    for a in 0..st.arity() {
        let score = sign * st.q[a] + cv * (ln_total / st.n[a] as f64).sqrt();
        if score > best_score {
            best_score = score;
            ties.clear();
            ties.push(a as u16);
        } else if score == best_score {
            ties.push(a as u16);
        }
    }
    choose_uniform(&ties, rng)
}

/// ε-greedy action choice (the GCT root rule): explore uniformly with
/// probability ε, otherwise exploit the best tried action (uniformly among
/// exact ties); with nothing tried yet, explore.
pub(crate) fn epsilon_greedy_select(
    st: &NodeStats,
    epsilon: f64,
    maximizing: bool,
    rng: &mut ChaCha8Rng,
) -> u16 {
    if rng.gen::<f64>() < epsilon {
        return uniform_action(st.arity(), rng);
    }
    let best = st.best_visited_set(maximizing);
    if best.is_empty() {
        uniform_action(st.arity(), rng)
    } else {
        choose_uniform(&best, rng)
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn plan(
    mdp: &dyn GenerativeMdp,
    s0: StateId,
    budget: u64,
    c: CParam,
    epsilon: Option<f64>,
    recommend: Recommend,
    config: &PlanConfig,
    rng: &mut ChaCha8Rng,
    probe: &mut dyn Probe,
) -> Result<PlanOutcome> {
    let limit = episode_limit(mdp, config);
    let mut tree = SearchTree::new(config.keying, mdp.state_count().is_some(), false);
    let mut traj = Trajectory {
        states: Vec::new(),
        actions: Vec::new(),
        rewards: Vec::new(),
        switch_index: None,
    };
    let mut node_path = Vec::new();

    for iter in 1..=budget {
        traj.states.clear();
        traj.actions.clear();
        traj.rewards.clear();
        node_path.clear();
        traj.states.push(s0);

        // The tree starts empty: the first episode's expansion is the root
        // itself. Later episodes expand the first untracked state they reach.
        let mut expanded = tree.root().is_none();
        let root_idx = tree.insert_root(s0, mdp.action_count(s0));
        node_path.push(Some(root_idx));

        let mut depth = 0usize;
        loop {
            let s = traj.states[depth];
            if depth == limit || mdp.is_terminal(s) {
                break;
            }
            let cur = node_path[depth];
            let a = match cur {
                Some(idx) => {
                    let st = tree.stats(idx);
                    let maximizing = mdp.objective(s) == Objective::Maximize;
                    match (depth, epsilon) {
                        (0, Some(eps)) => epsilon_greedy_select(st, eps, maximizing, rng),
                        _ => ucb1_select(st, maximizing, c, rng),
                    }
                }
                None => uniform_action(mdp.action_count(s), rng),
            };
            let (s2, r) = mdp.sample_transition(s, a, rng);
            traj.actions.push(a);
            traj.rewards.push(r);
            traj.states.push(s2);
            let child = if expanded {
                None
            } else {
                match cur {
                    Some(idx) => match tree.find_child(idx, a, s2, depth + 1) {
                        Some(ch) => Some(ch),
                        None => {
                            expanded = true;
                            Some(tree.insert_child(idx, a, s2, depth + 1, mdp.action_count(s2)))
                        }
                    },
                    None => None,
                }
            };
            node_path.push(child);
            depth += 1;
        }

        // Fold rewards-to-go into the tracked prefix of the episode.
        for d in 0..traj.len() {
            let Some(idx) = node_path[d] else { break };
            let target = traj.reward_to_go(d);
            tree.stats_mut(idx).push_incremental(traj.actions[d], target);
            probe.update(iter, d, traj.states[d], traj.actions[d], target);
        }
        probe.iteration(iter, &traj);
    }

    let root_idx = tree.root().expect("created in the first episode");
    let st = tree.stats(root_idx);
    let maximizing = mdp.objective(s0) == Objective::Maximize;
    let candidates = match recommend {
        Recommend::MeanBest => st.best_visited_set(maximizing),
        Recommend::VisitBest => {
            let top = st.n.iter().copied().max().unwrap_or(0);
            (0..st.arity())
                .filter(|&a| st.n[a] == top && top > 0)
                .map(|a| a as u16)
                .collect()
        }
    };
    if candidates.is_empty() {
        return Err(Error::InsufficientBudget(
            "no root action was ever tried; increase the budget".into(),
        ));
    }
    Ok(PlanOutcome {
        action: choose_uniform(&candidates, rng),
        root_q: st.q.to_vec(),
        root_n: st.n.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::TableMdp;
    use crate::planners::{plan as plan_any, PlanConfig, PlannerSpec};
    use crate::rng::RngStream;

    fn stats(q: &[f64], n: &[u64]) -> NodeStats {
        assert_eq!(q.len(), n.len());
        NodeStats {
            n: n.iter().copied().collect(),
            q: q.iter().copied().collect(),
            samples: None,
        }
    }

    #[test]
    fn ucb1_balances_value_and_exploration() {
        let mut rng = RngStream::new(1, 1).rng();
        // Scores at c=1: 0.6 + sqrt(ln 2) ≈ 1.4326 and 0.4 + sqrt(ln 2)
        // ≈ 1.2326, so the better arm wins while counts are equal.
        let st = stats(&[0.6, 0.4], &[1, 1]);
        assert_eq!(ucb1_select(&st, true, CParam::Fixed(1.0), &mut rng), 0);
        // The undersampled arm overtakes once its bonus dominates.
        let st = stats(&[0.6, 0.4], &[1000, 1]);
        assert_eq!(ucb1_select(&st, true, CParam::Fixed(1.0), &mut rng), 1);
        // At a minimizing node the orientation flips.
        let st = stats(&[0.6, 0.4], &[1, 1]);
        assert_eq!(ucb1_select(&st, false, CParam::Fixed(1.0), &mut rng), 1);
    }

    #[test]
    fn untried_actions_go_first() {
        let mut rng = RngStream::new(1, 2).rng();
        let st = stats(&[9.9, 0.0, 0.0], &[5, 0, 0]);
        for _ in 0..50 {
            let a = ucb1_select(&st, true, CParam::Fixed(1.0), &mut rng);
            assert!(a == 1 || a == 2);
        }
    }

    #[test]
    fn automatic_exploration_constant_tracks_the_best_estimate() {
        let mut rng = RngStream::new(1, 3).rng();
        for (q, n) in [
            (vec![0.6, 0.4], vec![1u64, 1]),
            (vec![-3.0, -9.0], vec![4, 2]),
            (vec![0.05, 0.4, 0.2], vec![30, 5, 9]),
        ] {
            let st = stats(&q, &n);
            for &maximizing in &[true, false] {
                let best = st.best_visited_value(maximizing).unwrap();
                assert_eq!(
                    ucb1_select(&st, maximizing, CParam::Auto, &mut rng),
                    ucb1_select(&st, maximizing, CParam::Fixed(best), &mut rng),
                );
            }
        }
    }

    #[test]
    fn epsilon_greedy_exploits_at_the_documented_rate() {
        let mut rng = RngStream::new(7, 4).rng();
        let st = stats(&[0.7, 0.2], &[3, 3]);
        let trials = 40_000u64;
        let mut best = 0u64;
        for _ in 0..trials {
            if epsilon_greedy_select(&st, 0.5, true, &mut rng) == 0 {
                best += 1;
            }
        }
        // Exploit (1-ε) of the time plus half of the exploring half:
        // 0.5 + 0.25 = 0.75, checked within four binomial sigmas.
        let freq = best as f64 / trials as f64;
        let sigma = (0.75f64 * 0.25 / trials as f64).sqrt();
        assert!(
            (freq - 0.75).abs() < 4.0 * sigma,
            "exploit frequency {freq} too far from 0.75"
        );
    }

    #[test]
    fn epsilon_greedy_ignores_untried_actions_when_exploiting() {
        let mut rng = RngStream::new(7, 5).rng();
        // Action 1 is untried; exploitation must never pick it even though
        // its default estimate (0) beats the tried action under minimization.
        let st = stats(&[0.4, 0.0], &[6, 0]);
        for _ in 0..200 {
            assert_eq!(epsilon_greedy_select(&st, 0.0, false, &mut rng), 0);
        }
        // With nothing tried at all, exploitation falls back to exploring.
        let empty = stats(&[0.0, 0.0], &[0, 0]);
        let mut seen = [false, false];
        for _ in 0..100 {
            seen[epsilon_greedy_select(&empty, 0.0, true, &mut rng) as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn uct_finds_the_better_root_action() {
        let m = TableMdp::two_level_tree();
        for spec in ["uct", "uct:c=1", "uct:rec=visits", "gct"] {
            let config = PlanConfig::new(PlannerSpec::parse(spec).unwrap());
            let out = plan_any(&m, 0, 4_000, &config, &RngStream::new(42, 0)).unwrap();
            assert_eq!(out.action, 0, "planner {spec}");
            assert_eq!(out.root_n.iter().sum::<u64>(), 4_000);
        }
    }

    #[test]
    fn fully_exploring_root_splits_visits_evenly() {
        let m = TableMdp::two_level_tree();
        let config = PlanConfig::new(PlannerSpec::parse("gct:eps=1").unwrap());
        let budget = 10_000u64;
        let out = plan_any(&m, 0, budget, &config, &RngStream::new(9, 0)).unwrap();
        let sigma = (budget as f64 * 0.25).sqrt();
        for &n in &out.root_n {
            assert!(
                (n as f64 - budget as f64 / 2.0).abs() < 4.0 * sigma,
                "root visits {:?} not close to uniform",
                out.root_n
            );
        }
    }

    #[test]
    fn replays_are_identical() {
        let m = TableMdp::three_level_lattice();
        let config = PlanConfig::new(PlannerSpec::parse("uct").unwrap());
        let stream = RngStream::new(3, 17);
        let a = plan_any(&m, 0, 500, &config, &stream).unwrap();
        let b = plan_any(&m, 0, 500, &config, &stream).unwrap();
        assert_eq!(a.action, b.action);
        assert_eq!(a.root_q, b.root_q);
        assert_eq!(a.root_n, b.root_n);
    }
}

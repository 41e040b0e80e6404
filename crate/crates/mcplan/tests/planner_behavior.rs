//! Whole-run behavioral invariants of the planners, checked through the
//! instrumentation probe on real planning runs: estimator bookkeeping,
//! exploration discipline, invariance properties, and statistical
//! convergence on a bandit with a known best arm.

mod common;

use std::collections::HashMap;

use common::{bernoulli_bandit, ShiftedMdp};
use mcplan::domains::table::TableMdp;
use mcplan::mdp::{ActionId, GenerativeMdp, StateId, Trajectory};
use mcplan::planners::{plan, plan_probed, PlanConfig, PlannerSpec, Probe};
use mcplan::rng::RngStream;

/// Probe that records every episode and every statistics update.
#[derive(Default)]
struct Recorder {
    /// `(iteration, switch depth if any, episode length)`.
    episodes: Vec<(u64, Option<usize>, usize)>,
    /// `(iteration, depth, state, action, target)`.
    updates: Vec<(u64, usize, StateId, ActionId, f64)>,
}

impl Probe for Recorder {
    fn iteration(&mut self, iter: u64, traj: &Trajectory) {
        self.episodes.push((iter, traj.switch_index, traj.len()));
    }

    fn update(&mut self, iter: u64, depth: usize, state: StateId, action: ActionId, target: f64) {
        self.updates.push((iter, depth, state, action, target));
    }
}

fn config(spec: &str) -> PlanConfig {
    PlanConfig::new(PlannerSpec::parse(spec).unwrap())
}

#[test]
fn uct_root_estimates_are_exact_means_of_credited_returns() {
    let mdp = TableMdp::three_level_lattice();
    let s0 = mdp.start_states()[0];
    for spec in ["uct", "gct", "uct:c=2,rec=visits"] {
        let mut probe = Recorder::default();
        let outcome =
            plan_probed(&mdp, s0, 500, &config(spec), &RngStream::root(41), &mut probe).unwrap();
        // Shadow accumulator: group root-cell updates by action and compare
        // the arithmetic mean with the planner's reported estimate.
        let mut sums: HashMap<ActionId, (f64, u64)> = HashMap::new();
        for &(_, depth, state, action, target) in &probe.updates {
            if depth == 0 && state == s0 {
                let e = sums.entry(action).or_default();
                e.0 += target;
                e.1 += 1;
            }
        }
        let total: u64 = sums.values().map(|&(_, n)| n).sum();
        assert_eq!(total, 500, "{spec}: every episode feeds the root");
        for (a, (sum, n)) in sums {
            assert_eq!(outcome.root_n[a as usize], n, "{spec}: visit count, action {a}");
            let mean = sum / n as f64;
            assert!(
                (outcome.root_q[a as usize] - mean).abs() <= 1e-12,
                "{spec}: estimate for action {a} is {} but credited mean is {mean}",
                outcome.root_q[a as usize]
            );
        }
    }
}

#[test]
fn uct_visits_every_action_of_a_node_before_revisiting_any() {
    let mdp = TableMdp::three_level_lattice();
    let s0 = mdp.start_states()[0];
    let mut probe = Recorder::default();
    plan_probed(&mdp, s0, 400, &config("uct"), &RngStream::root(17), &mut probe).unwrap();
    let mut first_actions: HashMap<(usize, StateId), Vec<ActionId>> = HashMap::new();
    for &(_, depth, state, action, _) in &probe.updates {
        first_actions.entry((depth, state)).or_default().push(action);
    }
    let mut multi = 0;
    for ((depth, state), actions) in first_actions {
        let k = mdp.action_count(state).min(actions.len());
        let mut seen = actions[..k].to_vec();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(
            seen.len(),
            k,
            "node ({depth}, {state}) repeated an action among its first {k} updates: {actions:?}"
        );
        if k > 1 {
            multi += 1;
        }
    }
    assert!(multi > 3, "the run should exercise several multi-action nodes");
}

#[test]
fn switch_planner_cycles_levels_evenly_and_updates_once_per_episode() {
    let mdp = TableMdp::three_level_lattice();
    let s0 = mdp.start_states()[0];
    let sweeps = 100;
    let budget = sweeps * mdp.horizon() as u64;
    let mut probe = Recorder::default();
    plan_probed(&mdp, s0, budget, &config("brue"), &RngStream::root(5), &mut probe).unwrap();

    assert_eq!(probe.episodes.len(), budget as usize);
    assert_eq!(probe.updates.len(), budget as usize, "exactly one cell update per episode");
    let mut per_level: HashMap<usize, u64> = HashMap::new();
    for &(_, switch, len) in &probe.episodes {
        let switch = switch.expect("switch planners tag every episode");
        assert_eq!(len, mdp.horizon(), "fixed-length episodes on this model");
        *per_level.entry(switch).or_default() += 1;
    }
    assert_eq!(per_level.len(), mdp.horizon());
    for level in 1..=mdp.horizon() {
        assert_eq!(per_level[&level], sweeps, "level {level} gets one episode per sweep");
    }
    // The updated cell sits directly above the switch: depth = switch - 1.
    for (&(iter, depth, _, _, _), &(iter_e, switch, _)) in
        probe.updates.iter().zip(&probe.episodes)
    {
        assert_eq!(iter, iter_e);
        assert_eq!(depth, switch.unwrap() - 1);
    }
}

#[test]
fn switch_planner_recommendations_are_invariant_to_reward_shifts() {
    // Every greedy decision compares estimates at a single depth, where a
    // constant reward shift moves all of them by the same amount, so with the
    // same RNG stream the whole run must replay identically. Exact per-seed
    // equality only holds when no two estimates collide to the last bit:
    // re-rounding `mean(r_i + shift)` can break an exact tie in either
    // direction. The generated model below has continuous rewards, so every
    // pair of estimates is separated by far more than the rounding noise and
    // the replay must be bit-for-bit.
    let specs = ["brue", "brue-per-alpha:0.9", "brue-alpha:0.5"];
    for model_seed in [11u64, 12] {
        let mdp = TableMdp::random_leveled(model_seed, 3, 3, 2).unwrap();
        let s0 = mdp.start_states()[0];
        for spec in specs {
            for seed in 0..50 {
                let stream = RngStream::root(seed);
                let base = plan(&mdp, s0, 120, &config(spec), &stream).unwrap();
                for shift in [5.0, -2.5] {
                    let shifted = ShiftedMdp { inner: &mdp, shift };
                    let moved = plan(&shifted, s0, 120, &config(spec), &stream).unwrap();
                    assert_eq!(
                        moved.action, base.action,
                        "{spec}, model {model_seed}, seed {seed}, shift {shift}: recommendation moved"
                    );
                    assert_eq!(
                        moved.root_n, base.root_n,
                        "{spec}, model {model_seed}, seed {seed}, shift {shift}: visit counts moved"
                    );
                    // Root estimates average full-horizon returns, so they
                    // move by exactly horizon * shift up to rounding.
                    for a in 0..base.root_q.len() {
                        if base.root_n[a] == 0 {
                            continue;
                        }
                        let predicted = base.root_q[a] + 3.0 * shift;
                        assert!(
                            (moved.root_q[a] - predicted).abs() < 1e-8,
                            "{spec}, model {model_seed}, seed {seed}, shift {shift}: root estimate \
                             for action {a} is {} instead of {predicted}",
                            moved.root_q[a]
                        );
                    }
                }
            }
        }
    }

    // On a model with short-decimal rewards, estimates tie exactly all the
    // time and re-rounding under a shift resolves some ties deterministically,
    // so individual runs may replay differently. The recommendation frequency
    // must still stay put: a genuine level-dependence (say, an unvisited-entry
    // sentinel of 0 competing against shifted estimates) would drag most of
    // the 2000 runs to one side, far beyond tie-resolution noise.
    let lattice = TableMdp::three_level_lattice();
    let s0 = lattice.start_states()[0];
    for spec in specs {
        for shift in [5.0, -2.5] {
            let mut base_hits = 0u64;
            let mut moved_hits = 0u64;
            for seed in 0..2000 {
                let stream = RngStream::root(seed);
                let base = plan(&lattice, s0, 120, &config(spec), &stream).unwrap();
                let shifted = ShiftedMdp { inner: &lattice, shift };
                let moved = plan(&shifted, s0, 120, &config(spec), &stream).unwrap();
                base_hits += u64::from(base.action == 1);
                moved_hits += u64::from(moved.action == 1);
            }
            let drift = (moved_hits as f64 - base_hits as f64) / 2000.0;
            assert!(
                drift.abs() < 0.08,
                "{spec}, shift {shift}: recommendation frequency drifted by {drift}"
            );
        }
    }
}

#[test]
fn tied_root_actions_are_recommended_uniformly() {
    // Both arms pay 0.7 deterministically, so estimates tie exactly whenever
    // both arms have been sampled and the tie-break must be uniform.
    let bandit = TableMdp::new(
        "tied-bandit",
        1,
        vec![vec![vec![(1, 1.0, 0.7)], vec![(2, 1.0, 0.7)]], vec![], vec![]],
        0,
    )
    .unwrap();
    let reps = 10_000;
    let sigma3 = 3.0 * (0.25f64 / reps as f64).sqrt();

    // Switch planner with enough budget to visit both arms almost surely.
    let mut zero = 0u64;
    for seed in 0..reps {
        let outcome = plan(&bandit, 0, 16, &config("brue"), &RngStream::root(seed)).unwrap();
        zero += u64::from(outcome.action == 0);
    }
    let freq = zero as f64 / reps as f64;
    assert!((freq - 0.5).abs() <= sigma3, "tie split {freq} strays from 1/2");

    // Budget 1: only the single sampled arm is visited, and it is the
    // recommendation; the sampled arm itself is uniform.
    let mut zero = 0u64;
    for seed in 0..reps {
        let outcome = plan(&bandit, 0, 1, &config("uct"), &RngStream::root(seed)).unwrap();
        zero += u64::from(outcome.action == 0);
    }
    let freq = zero as f64 / reps as f64;
    assert!((freq - 0.5).abs() <= sigma3, "single-sample split {freq} strays from 1/2");
}

#[test]
fn deterministic_two_arm_rewards_are_solved_at_two_sweeps() {
    // Arm 0 pays 1, arm 1 pays 0, deterministically. Planners with
    // systematic exploration are exact at budget 2K; uniform-exploration
    // planners converge as the budget grows.
    let bandit = TableMdp::new(
        "deterministic-bandit",
        1,
        vec![vec![vec![(1, 1.0, 1.0)], vec![(2, 1.0, 0.0)]], vec![], vec![]],
        0,
    )
    .unwrap();
    // Unexplored-first selection (uct) and round-robin sweeps (naive) touch
    // both arms within any 4-episode run, so they are exact at that budget.
    for spec in ["uct", "naive"] {
        for seed in 0..100 {
            let outcome = plan(&bandit, 0, 4, &config(spec), &RngStream::root(seed)).unwrap();
            assert_eq!(outcome.action, 0, "{spec}, seed {seed}");
        }
    }
    // The rest explore by coin flips, so a short run can miss the better arm
    // entirely (the root epsilon-greedy step has no unexplored-first rule and
    // shared uniform rollouts choose arms at random). At budget 64 the miss
    // probability is at most 0.75^64 < 1e-8 per run.
    for spec in ["gct", "crafty", "brue", "brue-per-alpha:0.9"] {
        let mut wrong = 0u64;
        for seed in 0..1000 {
            let outcome = plan(&bandit, 0, 64, &config(spec), &RngStream::root(seed)).unwrap();
            wrong += u64::from(outcome.action != 0);
        }
        assert!(wrong == 0, "{spec}: {wrong} of 1000 runs missed a deterministic best arm");
    }
}

#[test]
fn every_planner_solves_the_bernoulli_bandit_at_large_budget() {
    let bandit = bernoulli_bandit();
    let reps = 10_000u64;
    let budget = 4096;
    for spec in
        ["uct", "gct", "brue", "brue-alpha:0.9", "brue-per-alpha:0.9", "naive", "crafty"]
    {
        let cfg = config(spec);
        let mut wrong = 0u64;
        for rep in 0..reps {
            let stream = RngStream::root(991).child(&[rep]);
            let outcome = plan(&bandit, 0, budget, &cfg, &stream).unwrap();
            wrong += u64::from(outcome.action != 0);
        }
        let freq = wrong as f64 / reps as f64;
        assert!(freq < 0.01, "{spec}: error frequency {freq} at budget {budget}");
    }
}

//! Benchmark execution: runs planners against domains and collects rows.
//!
//! Determinism contract: every unit of work (one planning call, one
//! repetition, one scenario) derives its own random stream from the master
//! seed by a fixed integer path, and results are assembled in a canonical
//! order that does not depend on scheduling. Serial and parallel runs of the
//! same configuration therefore produce byte-identical output — provided the
//! optional wall-clock timing column stays off.
//!
//! Stream derivation paths from the master root: `[1, trial]` draws the
//! shared sailing start state for a trial, `[2, algorithm, budget, trial]`
//! seeds one planning call, `[3, trial]` seeds one random game tree,
//! `[4, planner, budget, rep]` seeds one flat-baseline repetition, and
//! `[5, scenario]` seeds one concentration-check scenario.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::bench::config::{AzumaBench, GameTreeBench, SailingBench, SandboxBench};
use crate::bench::csvout::{float_field, opt_float_field, CsvDoc};
use crate::domains::gametree::{GameTreeMdp, GameTreeSpec};
use crate::domains::sailing::{SailingConfig, SailingMdp};
use crate::domains::table::TableMdp;
use crate::mdp::{ActionId, GenerativeMdp, StateId};
use crate::oracle::{cache, minimax::MinimaxTable, OracleTable};
use crate::planners::flat::{crafty_run, flat_policy_gap, flat_policy_values, naive_run};
use crate::planners::{plan, NoProbe, PlanConfig, PlannerSpec};
use crate::rng::RngStream;
use crate::stats;
use crate::theory::{check_tails, flat_bounds, BoundConstants, FlatBounds, TailCheckRow, TailScenario};
use crate::Result;

/// One planning call: which trial, where it started, what it recommended,
/// and how far that recommendation falls short of optimal.
#[derive(Clone, Debug)]
pub struct DetailRow {
    pub domain: String,
    /// Canonical planner name (round-trips through the planner parser).
    pub algorithm: String,
    pub budget: u64,
    pub trial: u64,
    pub state: StateId,
    pub action: ActionId,
    /// Simple regret of the recommended action, in the domain's native
    /// value units; non-negative up to solver round-off.
    pub error: f64,
    /// Wall-clock planning time in milliseconds; only with `--timing`.
    pub wall_ms: Option<f64>,
}

/// Aggregate over all trials of one `(algorithm, budget)` cell.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub domain: String,
    pub algorithm: String,
    pub budget: u64,
    pub n: u64,
    pub mean_error: f64,
    pub stderr: f64,
    pub mean_wall_ms: Option<f64>,
}

/// Full result of a planning benchmark: per-call rows plus aggregates.
#[derive(Clone, Debug, Default)]
pub struct BenchOutput {
    pub details: Vec<DetailRow>,
    pub summaries: Vec<SummaryRow>,
}

/// Parse an algorithm list once; the canonical display name travels with
/// the plan configuration.
fn parse_algorithms(
    names: &[String],
    rollout_cap_factor: usize,
) -> Result<Vec<(String, PlanConfig)>> {
    names
        .iter()
        .map(|raw| {
            let spec = PlannerSpec::parse(raw)?;
            let canonical = spec.to_string();
            let mut config = PlanConfig::new(spec);
            config.rollout_cap_factor = rollout_cap_factor;
            Ok((canonical, config))
        })
        .collect()
}

/// Sort detail rows canonically and fold each `(algorithm, budget)` group
/// into a summary row.
fn sort_and_summarize(mut details: Vec<DetailRow>) -> BenchOutput {
    details.sort_by(|a, b| {
        (a.algorithm.as_str(), a.budget, a.trial).cmp(&(b.algorithm.as_str(), b.budget, b.trial))
    });
    let mut summaries = Vec::new();
    let mut i = 0;
    while i < details.len() {
        let mut j = i + 1;
        while j < details.len()
            && details[j].algorithm == details[i].algorithm
            && details[j].budget == details[i].budget
        {
            j += 1;
        }
        let group = &details[i..j];
        let errors: Vec<f64> = group.iter().map(|r| r.error).collect();
        let walls: Option<Vec<f64>> = group.iter().map(|r| r.wall_ms).collect();
        summaries.push(SummaryRow {
            domain: group[0].domain.clone(),
            algorithm: group[0].algorithm.clone(),
            budget: group[0].budget,
            n: group.len() as u64,
            mean_error: stats::mean(&errors),
            stderr: stats::stderr(&errors),
            mean_wall_ms: walls.as_deref().map(stats::mean),
        });
        i = j;
    }
    BenchOutput { details, summaries }
}

/// Run the sailing benchmark. Each trial draws one start state that is
/// shared by every algorithm and budget, so comparisons are paired; errors
/// come from the exact dynamic-programming table.
pub fn run_sailing(cfg: &SailingBench, seed: u64, timing: bool) -> Result<BenchOutput> {
    let mdp = SailingMdp::new(SailingConfig::new(cfg.grid))?;
    let oracle = cache::load_or_build(&mdp, cfg.cell_cap)?;
    let horizon = mdp.horizon();
    let starts = mdp.start_states();
    let root = RngStream::root(seed);
    let domain = format!("sailing-{g}x{g}", g = cfg.grid);
    let algorithms = parse_algorithms(&cfg.algorithms, cfg.rollout_cap_factor)?;

    let start_for_trial: Vec<StateId> = (0..cfg.trials)
        .map(|trial| {
            let mut rng = root.child(&[1, trial]).rng();
            starts[rng.gen_range(0..starts.len())]
        })
        .collect();

    let mut tasks = Vec::new();
    for alg in 0..algorithms.len() {
        for &budget in &cfg.budgets {
            for trial in 0..cfg.trials {
                tasks.push((alg, budget, trial));
            }
        }
    }
    let details: Vec<DetailRow> = tasks
        .into_par_iter()
        .map(|(alg, budget, trial)| {
            let s0 = start_for_trial[trial as usize];
            let stream = root.child(&[2, alg as u64, budget, trial]);
            let started = timing.then(Instant::now);
            let outcome = plan(&mdp, s0, budget, &algorithms[alg].1, &stream)?;
            let wall_ms = started.map(|t| t.elapsed().as_secs_f64() * 1e3);
            Ok(DetailRow {
                domain: domain.clone(),
                algorithm: algorithms[alg].0.clone(),
                budget,
                trial,
                state: s0,
                action: outcome.action,
                error: oracle.simple_regret(s0, horizon, outcome.action),
                wall_ms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sort_and_summarize(details))
}

/// Run the adversarial game-tree benchmark. Each trial synthesizes a fresh
/// tree from a derived seed, solves it exactly, and scores every algorithm
/// and budget on that same tree; errors are root-move regrets in the tree's
/// raw payoff units.
pub fn run_gametree(cfg: &GameTreeBench, seed: u64, timing: bool) -> Result<BenchOutput> {
    let root = RngStream::root(seed);
    let domain = format!("gametree-b{}-d{}", cfg.branching, cfg.depth);
    let algorithms = parse_algorithms(&cfg.algorithms, 16)?;

    let per_trial: Vec<Vec<DetailRow>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let tree_seed: u64 = root.child(&[3, trial]).rng().gen();
            let tree = GameTreeMdp::new(GameTreeSpec {
                branching: cfg.branching,
                depth: cfg.depth,
                seed: tree_seed,
            })?;
            let table = MinimaxTable::solve(&tree, cfg.node_cap)?;
            let s0 = tree.root();
            let mut rows = Vec::new();
            for (alg, (name, config)) in algorithms.iter().enumerate() {
                for &budget in &cfg.budgets {
                    let stream = root.child(&[2, alg as u64, budget, trial]);
                    let started = timing.then(Instant::now);
                    let outcome = plan(&tree, s0, budget, config, &stream)?;
                    let wall_ms = started.map(|t| t.elapsed().as_secs_f64() * 1e3);
                    rows.push(DetailRow {
                        domain: domain.clone(),
                        algorithm: name.clone(),
                        budget,
                        trial,
                        state: s0,
                        action: outcome.action,
                        error: table.root_regret(&tree, outcome.action),
                        wall_ms,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sort_and_summarize(per_trial.into_iter().flatten().collect()))
}

/// One aggregate row of the flat-baseline comparison.
#[derive(Clone, Debug)]
pub struct SandboxRow {
    /// `"naive"` (round-robin) or `"crafty"` (rollout-sharing).
    pub algorithm: String,
    /// Budget in full sweeps of the policy list.
    pub sweeps: u64,
    /// Budget in episodes (`sweeps * policy_count`).
    pub budget: u64,
    pub reps: u64,
    pub mean_regret: f64,
    pub stderr_regret: f64,
    /// Fraction of repetitions that picked a sub-optimal policy.
    pub error_freq: f64,
    /// Analytic expected-regret bound at this budget.
    pub regret_bound: f64,
    /// Analytic error-probability bound at this budget.
    pub error_bound: f64,
}

/// Full result of the flat-baseline comparison, including the per-rep
/// regret samples needed for paired significance tests.
#[derive(Clone, Debug)]
pub struct SandboxOutput {
    pub policy_count: usize,
    pub sweeps: Vec<u64>,
    /// Episode budgets, aligned with `sweeps`.
    pub budgets: Vec<u64>,
    pub best_value: f64,
    /// Value gap between the best policy and the best strictly-worse one
    /// (zero when every policy ties).
    pub policy_gap: f64,
    /// `naive_regrets[i][r]` is repetition `r`'s regret at budget `i`.
    pub naive_regrets: Vec<Vec<f64>>,
    pub crafty_regrets: Vec<Vec<f64>>,
    pub rows: Vec<SandboxRow>,
}

/// Compare the round-robin and rollout-sharing flat planners on the
/// built-in three-level lattice, with analytic bounds alongside the
/// measured regrets. Repetitions are paired by index across the two
/// planners at each budget.
pub fn run_sandbox(cfg: &SandboxBench, seed: u64) -> Result<SandboxOutput> {
    let mdp = TableMdp::three_level_lattice();
    let s0 = mdp.start_states()[0];
    let valued = flat_policy_values(&mdp, s0, cfg.policy_cap)?;
    let policies: Vec<_> = valued.iter().map(|(p, _)| p.clone()).collect();
    let values: Vec<f64> = valued.iter().map(|&(_, v)| v).collect();
    let best_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let policy_gap = flat_policy_gap(&mdp, s0, cfg.policy_cap)?.unwrap_or(0.0);
    let params = OracleTable::build(&mdp, 1_000_000)?.params();
    let horizon = mdp.horizon() as u32;
    let root = RngStream::root(seed);

    let policy_count = policies.len();
    let budgets: Vec<u64> = cfg.sweeps.iter().map(|&s| s * policy_count as u64).collect();
    let mut naive_regrets = Vec::new();
    let mut crafty_regrets = Vec::new();
    let mut rows = Vec::new();
    for (&sweeps, &budget) in cfg.sweeps.iter().zip(&budgets) {
        let pairs: Vec<(f64, f64)> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = root.child(&[4, 0, budget, rep]).rng();
                let naive = naive_run(&mdp, s0, budget, &policies, &mut rng, &mut NoProbe)?;
                let mut rng = root.child(&[4, 1, budget, rep]).rng();
                let crafty = crafty_run(&mdp, s0, budget, &policies, &mut rng, &mut NoProbe)?;
                Ok((best_value - values[naive.chosen], best_value - values[crafty.chosen]))
            })
            .collect::<Result<Vec<_>>>()?;
        let naive: Vec<f64> = pairs.iter().map(|&(n, _)| n).collect();
        let crafty: Vec<f64> = pairs.iter().map(|&(_, c)| c).collect();
        let bounds = flat_bounds(
            params.max_actions,
            params.max_outcomes,
            horizon,
            policy_gap,
            budget,
        )?;
        for (name, samples, regret_bound, error_bound) in [
            ("naive", &naive, bounds.naive_regret, bounds.naive_error),
            ("crafty", &crafty, bounds.crafty_regret, bounds.crafty_error),
        ] {
            let errors = samples.iter().filter(|&&r| r > 1e-9).count();
            rows.push(SandboxRow {
                algorithm: name.to_string(),
                sweeps,
                budget,
                reps: cfg.reps,
                mean_regret: stats::mean(samples),
                stderr_regret: stats::stderr(samples),
                error_freq: errors as f64 / cfg.reps as f64,
                regret_bound,
                error_bound,
            });
        }
        naive_regrets.push(naive);
        crafty_regrets.push(crafty);
    }
    rows.sort_by(|a, b| (a.algorithm.as_str(), a.sweeps).cmp(&(b.algorithm.as_str(), b.sweeps)));
    Ok(SandboxOutput {
        policy_count,
        sweeps: cfg.sweeps.clone(),
        budgets,
        best_value,
        policy_gap,
        naive_regrets,
        crafty_regrets,
        rows,
    })
}

/// Run the concentration checks over the full scenario grid. Scenarios are
/// enumerated in the declared list order (h, then δ fraction, then decay
/// rate, then contamination scale), each on its own derived stream.
pub fn run_azuma(cfg: &AzumaBench, seed: u64) -> Result<Vec<TailCheckRow>> {
    let root = RngStream::root(seed);
    let mut rows = Vec::new();
    let mut scenario = 0u64;
    for &h in &cfg.h_values {
        for &fraction in &cfg.delta_fractions {
            for &c_e in &cfg.c_e_values {
                for &c_p in &cfg.c_p_values {
                    let spec = TailScenario::new(h, fraction * h, c_p, c_e)?;
                    let stream = root.child(&[5, scenario]);
                    rows.extend(check_tails(&spec, &cfg.alphas, &cfg.t_grid, cfg.trials, &stream)?);
                    scenario += 1;
                }
            }
        }
    }
    Ok(rows)
}

/// Render a planning benchmark as CSV. Detail rows carry per-call errors;
/// summary rows carry the per-cell mean and standard error.
pub fn bench_csv(output: &BenchOutput, timing: bool) -> CsvDoc {
    let mut header = vec![
        "row_type", "domain", "algorithm", "budget", "trial", "state", "action", "n", "error",
        "stderr",
    ];
    if timing {
        header.push("wall_ms");
    }
    let mut doc = CsvDoc::new(&header);
    for r in &output.details {
        let mut row = vec![
            "detail".to_string(),
            r.domain.clone(),
            r.algorithm.clone(),
            r.budget.to_string(),
            r.trial.to_string(),
            r.state.to_string(),
            r.action.to_string(),
            String::new(),
            float_field(r.error),
            String::new(),
        ];
        if timing {
            row.push(opt_float_field(r.wall_ms));
        }
        doc.push_row(row);
    }
    for r in &output.summaries {
        let mut row = vec![
            "summary".to_string(),
            r.domain.clone(),
            r.algorithm.clone(),
            r.budget.to_string(),
            String::new(),
            String::new(),
            String::new(),
            r.n.to_string(),
            float_field(r.mean_error),
            float_field(r.stderr),
        ];
        if timing {
            row.push(opt_float_field(r.mean_wall_ms));
        }
        doc.push_row(row);
    }
    doc
}

/// Render the flat-baseline comparison as CSV (aggregate rows only).
pub fn sandbox_csv(output: &SandboxOutput) -> CsvDoc {
    let mut doc = CsvDoc::new(&[
        "row_type",
        "algorithm",
        "sweeps",
        "budget",
        "reps",
        "mean_regret",
        "stderr_regret",
        "error_freq",
        "regret_bound",
        "error_bound",
    ]);
    doc.push_meta("policy_count", output.policy_count.to_string());
    doc.push_meta("best_value", float_field(output.best_value));
    doc.push_meta("policy_gap", float_field(output.policy_gap));
    for r in &output.rows {
        doc.push_row(vec![
            "summary".to_string(),
            r.algorithm.clone(),
            r.sweeps.to_string(),
            r.budget.to_string(),
            r.reps.to_string(),
            float_field(r.mean_regret),
            float_field(r.stderr_regret),
            float_field(r.error_freq),
            float_field(r.regret_bound),
            float_field(r.error_bound),
        ]);
    }
    doc
}

/// Render concentration-check rows as CSV.
pub fn azuma_csv(rows: &[TailCheckRow]) -> CsvDoc {
    let mut doc = CsvDoc::new(&[
        "h", "delta", "c_p", "c_e", "alpha", "tail", "t", "trials", "hits", "empirical",
        "ci_lower", "ci_upper", "bound", "violation",
    ]);
    for r in rows {
        doc.push_row(vec![
            float_field(r.h),
            float_field(r.delta),
            float_field(r.c_p),
            float_field(r.c_e),
            float_field(r.alpha),
            r.tail.name().to_string(),
            r.t.to_string(),
            r.trials.to_string(),
            r.hits.to_string(),
            float_field(r.empirical),
            float_field(r.ci_lower),
            float_field(r.ci_upper),
            float_field(r.bound),
            r.violation.to_string(),
        ]);
    }
    doc
}

/// Render bound constants (and optional flat-baseline bounds) as long-form
/// CSV: one `(row_type, h, name, value)` row per quantity.
pub fn bounds_csv(constants: &BoundConstants, flat: Option<&FlatBounds>) -> CsvDoc {
    let mut doc = CsvDoc::new(&["row_type", "h", "name", "value"]);
    let global = |doc: &mut CsvDoc, name: &str, value: f64| {
        doc.push_row(vec!["global".into(), String::new(), name.into(), float_field(value)]);
    };
    global(&mut doc, "log_c", constants.log_c);
    global(&mut doc, "log_c_prime", constants.log_c_prime);
    global(&mut doc, "c", constants.c);
    global(&mut doc, "c_prime", constants.c_prime);
    global(&mut doc, "transition_n", constants.transition_n);
    global(&mut doc, "basis_log_c1_prime", constants.basis_log_c1_prime);
    for level in &constants.levels {
        for (name, value) in [
            ("log_c", level.log_c),
            ("log_c_prime", level.log_c_prime),
            ("c", level.c()),
            ("c_prime", level.c_prime()),
        ] {
            doc.push_row(vec![
                "level".into(),
                level.h.to_string(),
                name.into(),
                float_field(value),
            ]);
        }
    }
    if let Some(fb) = flat {
        for (name, value) in [
            ("log_naive_regret", fb.log_naive_regret),
            ("log_crafty_regret", fb.log_crafty_regret),
            ("naive_regret", fb.naive_regret),
            ("crafty_regret", fb.crafty_regret),
            ("naive_error", fb.naive_error),
            ("crafty_error", fb.crafty_error),
            ("crafty_transition_n", fb.crafty_transition_n),
        ] {
            doc.push_row(vec!["flat".into(), String::new(), name.into(), float_field(value)]);
        }
    }
    doc
}

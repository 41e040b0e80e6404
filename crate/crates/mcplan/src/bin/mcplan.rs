//! Command-line front end for the planning benchmarks and bound calculators.
//!
//! Every subcommand reads its parameters from three layers — command-line
//! flags, an optional `--config` TOML file, and built-in defaults, in that
//! priority order — and writes CSV to `--out` (or stdout). Results are a
//! deterministic function of the resolved configuration and `--seed`;
//! `--jobs` only changes how the work is scheduled, and `--timing` adds
//! wall-clock columns (the one opt-in that breaks byte-for-byte identity
//! between runs). Exit codes: 0 on success, 2 for configuration/usage
//! errors, 3 when a resource cap fires, 1 for other failures.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use mcplan::bench::{
    azuma_csv, bench_csv, bounds_csv, config_meta, resolved_toml, run_azuma, run_gametree,
    run_sailing, run_sandbox, sandbox_csv, AzumaBench, AzumaFlags, BoundsFlags, BoundsQuery,
    FileConfig, GameTreeBench, GameTreeFlags, SailingBench, SailingFlags, SandboxBench,
    SandboxFlags, DEFAULT_SEED,
};
use mcplan::theory::{bound_constants, flat_bounds, BoundConstants, FlatBounds};
use mcplan::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mcplan",
    version,
    about = "Monte-Carlo planning benchmarks, flat-sampling baselines, and bound calculators"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    globals: Globals,
}

#[derive(Args)]
struct Globals {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed; every random stream in a run derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per logical CPU).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Record wall-clock time per planning call (breaks serial/parallel
    /// byte identity; off by default).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Planning benchmark on the stochastic sailing grid.
    BenchSailing {
        /// Grid side length (states are position x wind x tack).
        #[arg(long)]
        grid: Option<u32>,
        /// Episode budgets, comma separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<u64>>,
        /// Paired trials per (algorithm, budget) cell.
        #[arg(long)]
        trials: Option<u64>,
        /// Planner list, comma separated (e.g. uct, gct, brue,
        /// brue-per-alpha:0.9, uct:c=2,rec=visits).
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
        /// Exact-solver size cap in value cells.
        #[arg(long)]
        cell_cap: Option<u64>,
        /// Episode length cap, as a multiple of the horizon.
        #[arg(long)]
        rollout_cap_factor: Option<usize>,
    },
    /// Planning benchmark on random adversarial game trees.
    BenchGametree {
        /// Moves per position.
        #[arg(long)]
        branching: Option<u16>,
        /// Tree depth in plies.
        #[arg(long)]
        depth: Option<usize>,
        /// Episode budgets, comma separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<u64>>,
        /// Trees per (algorithm, budget) cell; one fresh tree per trial.
        #[arg(long)]
        trials: Option<u64>,
        /// Planner list, comma separated.
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
        /// Exhaustive-solver node cap per tree.
        #[arg(long)]
        node_cap: Option<u64>,
    },
    /// Round-robin vs rollout-sharing flat sampling on the built-in lattice.
    Sandbox {
        /// Budgets in full sweeps of the policy list, comma separated.
        #[arg(long, value_delimiter = ',')]
        sweeps: Option<Vec<u64>>,
        /// Paired repetitions per budget.
        #[arg(long)]
        reps: Option<u64>,
        /// Policy-enumeration cap.
        #[arg(long)]
        policy_cap: Option<u64>,
    },
    /// Print convergence-rate constants for the switch-based planner.
    Bounds {
        /// Least transition probability in (0, 1].
        #[arg(long)]
        p: Option<f64>,
        /// Least positive action gap in (0, 1].
        #[arg(long)]
        d: Option<f64>,
        /// Actions per state (at least 2).
        #[arg(long = "K")]
        k: Option<u32>,
        /// Horizon (at least 1).
        #[arg(long = "H")]
        h: Option<u32>,
        /// Outcomes per action; enables the flat-sampling bounds.
        #[arg(long = "B")]
        b: Option<u32>,
        /// Episode count for the flat-sampling bounds.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Empirically stress the concentration bounds behind the analysis.
    AzumaCheck {
        /// Independent streams per scenario.
        #[arg(long)]
        trials: Option<u64>,
        /// Prefix lengths to check, comma separated.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<u64>>,
        /// Window fractions in (0, 1], comma separated (1 = full mean).
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Range widths h, comma separated.
        #[arg(long, value_delimiter = ',')]
        h_values: Option<Vec<f64>>,
        /// Deviations as fractions of h in (0, 0.5], comma separated.
        #[arg(long, value_delimiter = ',')]
        delta_fractions: Option<Vec<f64>>,
        /// Contamination decay rates in (0, 1], comma separated.
        #[arg(long, value_delimiter = ',')]
        c_e_values: Option<Vec<f64>>,
        /// Contamination scales (0 disables), comma separated.
        #[arg(long, value_delimiter = ',')]
        c_p_values: Option<Vec<f64>>,
    },
}

/// Re-join planner options that the comma delimiter split off: a segment
/// starting with `c=`, `eps=`, or `rec=` can never begin a planner name, so
/// it belongs to the previous segment (`uct:c=2,rec=visits` arrives as two
/// pieces).
fn regroup_algorithms(raw: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for segment in raw {
        let is_option =
            segment.starts_with("c=") || segment.starts_with("eps=") || segment.starts_with("rec=");
        match out.last_mut() {
            Some(last) if is_option => {
                last.push(',');
                last.push_str(&segment);
            }
            _ => out.push(segment),
        }
    }
    out
}

fn print_bounds(query: &BoundsQuery, constants: &BoundConstants, flat: Option<&FlatBounds>) {
    println!(
        "inputs: p = {}, d = {}, K = {}, H = {}",
        query.p, query.d, query.k, query.h
    );
    println!("c = {}", constants.c);
    println!("c' = {}", constants.c_prime);
    println!("ln c = {}", constants.log_c);
    println!("ln c' = {}", constants.log_c_prime);
    println!("transition n = {}", constants.transition_n);
    println!("first-level sharing basis ln c_1' = {}", constants.basis_log_c1_prime);
    println!("per-level constants:");
    for level in &constants.levels {
        println!(
            "  h = {}: c_h = {}, c_h' = {}, ln c_h = {}, ln c_h' = {}",
            level.h,
            level.c(),
            level.c_prime(),
            level.log_c,
            level.log_c_prime
        );
    }
    if let Some(fb) = flat {
        println!("flat sampling with B = {}, n = {}:", query.b.unwrap(), query.n);
        println!("  round-robin regret bound = {}", fb.naive_regret);
        println!("  rollout-sharing regret bound = {}", fb.crafty_regret);
        println!("  round-robin error bound = {}", fb.naive_error);
        println!("  rollout-sharing error bound = {}", fb.crafty_error);
        println!("  rollout-sharing transition n = {}", fb.crafty_transition_n);
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.globals.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = cli.globals.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let jobs = cli.globals.jobs.or(file.jobs).unwrap_or(0);
    let timing = cli.globals.timing || file.timing.unwrap_or(false);
    let out = cli.globals.out.clone().or(file.out.clone());

    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot size worker pool: {e}")))?;
    }

    match cli.cmd {
        Cmd::BenchSailing {
            grid,
            budgets,
            trials,
            algorithms,
            cell_cap,
            rollout_cap_factor,
        } => {
            let flags = SailingFlags {
                grid,
                budgets,
                trials,
                algorithms: algorithms.map(regroup_algorithms),
                cell_cap,
                rollout_cap_factor,
            };
            let cfg = SailingBench::resolve(flags, file.sailing.as_ref())?;
            let output = run_sailing(&cfg, seed, timing)?;
            let mut doc = bench_csv(&output, timing);
            config_meta(&mut doc, seed, &resolved_toml("sailing", &cfg, seed));
            doc.write_to(out.as_deref())
        }
        Cmd::BenchGametree {
            branching,
            depth,
            budgets,
            trials,
            algorithms,
            node_cap,
        } => {
            let flags = GameTreeFlags {
                branching,
                depth,
                budgets,
                trials,
                algorithms: algorithms.map(regroup_algorithms),
                node_cap,
            };
            let cfg = GameTreeBench::resolve(flags, file.gametree.as_ref())?;
            let output = run_gametree(&cfg, seed, timing)?;
            let mut doc = bench_csv(&output, timing);
            config_meta(&mut doc, seed, &resolved_toml("gametree", &cfg, seed));
            doc.write_to(out.as_deref())
        }
        Cmd::Sandbox { sweeps, reps, policy_cap } => {
            let flags = SandboxFlags { sweeps, reps, policy_cap };
            let cfg = SandboxBench::resolve(flags, file.sandbox.as_ref())?;
            let output = run_sandbox(&cfg, seed)?;
            let mut doc = sandbox_csv(&output);
            config_meta(&mut doc, seed, &resolved_toml("sandbox", &cfg, seed));
            doc.write_to(out.as_deref())
        }
        Cmd::Bounds { p, d, k, h, b, n } => {
            let flags = BoundsFlags { p, d, k, h, b, n };
            let query = BoundsQuery::resolve(flags, file.bounds.as_ref())?;
            let constants = bound_constants(query.p, query.d, query.k, query.h)?;
            let flat = match query.b {
                Some(b) => Some(flat_bounds(query.k, b, query.h, query.d, query.n)?),
                None => None,
            };
            print_bounds(&query, &constants, flat.as_ref());
            if out.is_some() {
                let mut doc = bounds_csv(&constants, flat.as_ref());
                config_meta(&mut doc, seed, &resolved_toml("bounds", &query, seed));
                doc.write_to(out.as_deref())?;
            }
            Ok(())
        }
        Cmd::AzumaCheck {
            trials,
            t_grid,
            alphas,
            h_values,
            delta_fractions,
            c_e_values,
            c_p_values,
        } => {
            let flags = AzumaFlags {
                trials,
                t_grid,
                alphas,
                h_values,
                delta_fractions,
                c_e_values,
                c_p_values,
            };
            let cfg = AzumaBench::resolve(flags, file.azuma.as_ref())?;
            let rows = run_azuma(&cfg, seed)?;
            let mut doc = azuma_csv(&rows);
            config_meta(&mut doc, seed, &resolved_toml("azuma", &cfg, seed));
            doc.write_to(out.as_deref())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        if matches!(e, Error::Config(_)) {
            eprintln!("run `mcplan --help` or `mcplan <subcommand> --help` for usage");
        }
        std::process::exit(e.exit_code());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_regroup_onto_their_planner() {
        let raw = ["uct:c=2", "rec=visits", "brue", "gct:eps=0.3", "c=1.5"]
            .map(String::from)
            .to_vec();
        assert_eq!(
            regroup_algorithms(raw),
            vec!["uct:c=2,rec=visits", "brue", "gct:eps=0.3,c=1.5"]
        );
        assert_eq!(regroup_algorithms(vec!["uct".into()]), vec!["uct".to_string()]);
        // A stray leading option is preserved so the parser can reject it
        // with a clear message.
        assert_eq!(regroup_algorithms(vec!["c=2".into()]), vec!["c=2".to_string()]);
    }

    #[test]
    fn cli_parses_the_documented_invocations() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from([
            "mcplan",
            "bench-sailing",
            "--grid",
            "5",
            "--budgets",
            "128,256",
            "--trials",
            "4",
            "--algorithms",
            "uct",
            "--seed",
            "1",
        ])
        .unwrap();
        match cli.cmd {
            Cmd::BenchSailing { grid, budgets, trials, algorithms, .. } => {
                assert_eq!(grid, Some(5));
                assert_eq!(budgets, Some(vec![128, 256]));
                assert_eq!(trials, Some(4));
                assert_eq!(algorithms, Some(vec!["uct".to_string()]));
            }
            _ => panic!("wrong subcommand"),
        }
        assert_eq!(cli.globals.seed, Some(1));

        let cli = Cli::try_parse_from([
            "mcplan", "bounds", "--p", "0.5", "--d", "0.3", "--K", "2", "--H", "1",
        ])
        .unwrap();
        match cli.cmd {
            Cmd::Bounds { p, d, k, h, b, n } => {
                assert_eq!((p, d, k, h), (Some(0.5), Some(0.3), Some(2), Some(1)));
                assert_eq!((b, n), (None, None));
            }
            _ => panic!("wrong subcommand"),
        }

        assert!(Cli::try_parse_from(["mcplan", "warp"]).is_err());
        assert!(Cli::try_parse_from(["mcplan", "bounds", "--zeta", "1"]).is_err());
    }
}

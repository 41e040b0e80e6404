//! Scratch: criterion-4 style paired comparison at full scale.

use mcplan::bench::{run_sandbox, SandboxBench};
use mcplan::stats::paired_t_pvalue_less;

fn main() {
    let cfg = SandboxBench { sweeps: (1..=8).collect(), reps: 10_000, policy_cap: 100_000 };
    let out = run_sandbox(&cfg, 7).unwrap();
    println!("policies {} gap {:.4} best {:.4}", out.policy_count, out.policy_gap, out.best_value);
    for (i, &budget) in out.budgets.iter().enumerate() {
        let naive = &out.naive_regrets[i];
        let crafty = &out.crafty_regrets[i];
        let mn: f64 = naive.iter().sum::<f64>() / naive.len() as f64;
        let mc: f64 = crafty.iter().sum::<f64>() / crafty.len() as f64;
        let diffs: Vec<f64> = crafty.iter().zip(naive).map(|(c, n)| c - n).collect();
        let p = paired_t_pvalue_less(&diffs);
        println!(
            "budget {budget:>4} ({} sweeps): naive {mn:.5} crafty {mc:.5} p(crafty<naive) {p:.2e}",
            budget / 32
        );
    }
    for row in &out.rows {
        if row.algorithm == "naive" {
            println!(
                "bounds at {} sweeps: naive err bound {:.3e} crafty err bound {:.3e}",
                row.sweeps, row.error_bound, out.rows.iter()
                    .find(|r| r.algorithm == "crafty" && r.sweeps == row.sweeps)
                    .map_or(f64::NAN, |r| r.error_bound)
            );
        }
    }
}

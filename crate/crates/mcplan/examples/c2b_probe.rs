//! Scratch: game-tree brue-vs-uct comparison at the largest budget across
//! master seeds, to see whether seed 1 is typical.

use std::collections::HashMap;

use mcplan::bench::{run_gametree, GameTreeBench, GameTreeFlags};
use mcplan::stats::{paired_t_pvalue_less, stderr};

fn main() {
    let cfg = GameTreeBench::resolve(
        GameTreeFlags {
            branching: Some(2),
            depth: Some(10),
            budgets: Some(vec![16384]),
            algorithms: Some(vec!["uct".into(), "brue".into()]),
            ..Default::default()
        },
        None,
    )
    .unwrap();
    println!("trials: {}", cfg.trials);
    for seed in 1..=10u64 {
        let out = run_gametree(&cfg, seed, false).unwrap();
        let mut errors: HashMap<String, Vec<f64>> = HashMap::new();
        for row in &out.details {
            errors.entry(row.algorithm.clone()).or_default().push(row.error);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let uct = &errors["uct"];
        let brue = &errors["brue"];
        let worse: Vec<f64> = uct.iter().zip(brue).map(|(u, b)| u - b).collect();
        let nz_u = uct.iter().filter(|&&e| e > 0.0).count();
        let nz_b = brue.iter().filter(|&&e| e > 0.0).count();
        println!(
            "seed {seed}: uct {:.4} ({nz_u} wrong) brue {:.4} ({nz_b} wrong)  p(uct<brue) {:.3}  diff se {:.4}",
            mean(uct),
            mean(brue),
            paired_t_pvalue_less(&worse),
            stderr(&worse),
        );
    }
}

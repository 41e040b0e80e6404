//! Scratch probe: sailing ordering at the two largest budgets across seeds.

use mcplan::bench::{run_sailing, SailingBench, SailingFlags};
use mcplan::stats::paired_t_pvalue_less;

fn main() {
    let flags = SailingFlags {
        grid: Some(5),
        budgets: Some(vec![16384, 32768]),
        ..Default::default()
    };
    let cfg = SailingBench::resolve(flags, None).unwrap();
    println!("algorithms: {:?} trials: {}", cfg.algorithms, cfg.trials);
    for seed in 1..=6u64 {
        let out = run_sailing(&cfg, seed, false).unwrap();
        for &budget in &[16384u64, 32768] {
            let err = |alg: &str| -> Vec<f64> {
                let mut v: Vec<(u64, f64)> = out
                    .details
                    .iter()
                    .filter(|d| d.algorithm == alg && d.budget == budget)
                    .map(|d| (d.trial, d.error))
                    .collect();
                v.sort_by(|a, b| a.0.cmp(&b.0));
                v.into_iter().map(|(_, e)| e).collect()
            };
            let uct = err("uct");
            let gct = err("gct");
            let brue = err("brue");
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let diff_gu: Vec<f64> = gct.iter().zip(&uct).map(|(g, u)| g - u).collect();
            let diff_bg: Vec<f64> = brue.iter().zip(&gct).map(|(b, g)| b - g).collect();
            println!(
                "seed {seed} b={budget}: uct {:.4} gct {:.4} brue {:.4}  p(g<u) {:.3e}  p(b<g) {:.3e}",
                mean(&uct),
                mean(&gct),
                mean(&brue),
                paired_t_pvalue_less(&diff_gu),
                paired_t_pvalue_less(&diff_bg),
            );
        }
    }
}

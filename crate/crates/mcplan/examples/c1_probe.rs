//! Scratch: criterion-1 style sailing ordering at full scale, with timing.

use std::collections::HashMap;
use std::time::Instant;

use mcplan::bench::{run_sailing, SailingBench, SailingFlags};
use mcplan::stats::paired_t_pvalue_less;

fn main() {
    let cfg = SailingBench::resolve(
        SailingFlags { grid: Some(5), ..Default::default() },
        None,
    )
    .unwrap();
    println!("algorithms: {:?} budgets: {:?} trials: {}", cfg.algorithms, cfg.budgets, cfg.trials);
    let t0 = Instant::now();
    let out = run_sailing(&cfg, 1, false).unwrap();
    println!("run_sailing wall: {:.1}s", t0.elapsed().as_secs_f64());

    // errors[(alg, budget)][trial]
    let mut errors: HashMap<(String, u64), Vec<f64>> = HashMap::new();
    for row in &out.details {
        errors.entry((row.algorithm.clone(), row.budget)).or_default().push(row.error);
    }
    let top2 = &cfg.budgets[cfg.budgets.len() - 2..];
    for &b in top2 {
        let uct = &errors[&("uct".to_string(), b)];
        let gct = &errors[&("gct".to_string(), b)];
        let brue = &errors[&("brue".to_string(), b)];
        let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        let d1: Vec<f64> = gct.iter().zip(uct).map(|(g, u)| g - u).collect();
        let d2: Vec<f64> = brue.iter().zip(gct).map(|(r, g)| r - g).collect();
        println!(
            "budget {b}: uct {:.4} gct {:.4} brue {:.4}  p(gct<uct) {:.3e}  p(brue<gct) {:.3e}",
            mean(uct), mean(gct), mean(brue),
            paired_t_pvalue_less(&d1),
            paired_t_pvalue_less(&d2)
        );
    }
    for &b in &cfg.budgets {
        let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        print!("b={b}:");
        for alg in ["uct", "gct", "brue", "brue-per-alpha:0.9"] {
            print!(" {}={:.4}", alg, mean(&errors[&(alg.to_string(), b)]));
        }
        println!();
    }
}

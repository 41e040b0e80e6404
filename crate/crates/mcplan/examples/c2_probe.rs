//! Scratch: criterion-2 style game-tree ordering at full scale.

use std::collections::HashMap;
use std::time::Instant;

use mcplan::bench::{run_gametree, GameTreeBench, GameTreeFlags};
use mcplan::stats::{paired_t_pvalue_less, stderr};

fn main() {
    let cfg = GameTreeBench::resolve(
        GameTreeFlags { branching: Some(2), depth: Some(10), ..Default::default() },
        None,
    )
    .unwrap();
    println!("algorithms: {:?} budgets: {:?} trials: {}", cfg.algorithms, cfg.budgets, cfg.trials);
    let t0 = Instant::now();
    let out = run_gametree(&cfg, 1, false).unwrap();
    println!("run_gametree wall: {:.1}s", t0.elapsed().as_secs_f64());

    let mut errors: HashMap<(String, u64), Vec<f64>> = HashMap::new();
    for row in &out.details {
        errors.entry((row.algorithm.clone(), row.budget)).or_default().push(row.error);
    }
    let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let largest = *cfg.budgets.last().unwrap();
    let uct = &errors[&("uct".to_string(), largest)];
    let brue = &errors[&("brue".to_string(), largest)];
    let diffs: Vec<f64> = brue.iter().zip(uct).map(|(b, u)| b - u).collect();
    println!(
        "largest budget {largest}: uct {:.4} brue {:.4} p(brue<uct) {:.3e}  diff mean {:.4} se {:.4}",
        mean(uct), mean(brue), paired_t_pvalue_less(&diffs), mean(&diffs), stderr(&diffs)
    );
    let mut prev: Option<Vec<f64>> = None;
    for &b in &cfg.budgets {
        let cur = errors[&("brue".to_string(), b)].clone();
        let m = mean(&cur);
        if let Some(p) = prev {
            let d: Vec<f64> = cur.iter().zip(&p).map(|(c, q)| c - q).collect();
            println!("brue b={b:>6}: mean {m:.4} step {:.4} se {:.4}", mean(&d), stderr(&d));
        } else {
            println!("brue b={b:>6}: mean {m:.4}");
        }
        prev = Some(cur);
    }
}

//! Scratch: criterion-3 style error curves on the retuned lattice.

use mcplan::domains::table::TableMdp;
use mcplan::planners::{plan, PlanConfig, PlannerSpec};
use mcplan::rng::RngStream;

fn main() {
    let m = TableMdp::three_level_lattice();
    let reps = 10_000u64;
    for spec in ["brue", "brue-alpha:0.9"] {
        let cfg = PlanConfig::new(PlannerSpec::parse(spec).unwrap());
        let mut line = format!("{spec:16}");
        for budget in [256u64, 512, 1024, 2048] {
            let mut wrong = 0u64;
            for rep in 0..reps {
                let stream = RngStream::root(2026).child(&[spec.len() as u64, budget, rep]);
                let out = plan(&m, 0, budget, &cfg, &stream).unwrap();
                wrong += u64::from(out.action != 1);
            }
            line.push_str(&format!("  {:>7.4}", wrong as f64 / reps as f64));
        }
        println!("{line}");
    }
}

//! Scratch: where does BRUE's sailing error come from at large budgets?

use mcplan::domains::{SailingConfig, SailingMdp};
use mcplan::mdp::{ActionId, GenerativeMdp, StateId, Trajectory};
use mcplan::oracle::cache;
use mcplan::planners::{plan_probed, PlanConfig, PlannerSpec, Probe};
use mcplan::rng::RngStream;
use rand::Rng;

#[derive(Default)]
struct Tally {
    episodes: u64,
    wasted: u64,
    root_updates: u64,
    traj_len_sum: u64,
}

impl Probe for Tally {
    fn iteration(&mut self, _iter: u64, traj: &Trajectory) {
        self.episodes += 1;
        self.traj_len_sum += traj.len() as u64;
        if let Some(sigma) = traj.switch_index {
            if traj.len() < sigma {
                self.wasted += 1;
            }
        }
    }

    fn update(&mut self, _i: u64, depth: usize, _s: StateId, _a: ActionId, _t: f64) {
        if depth == 0 {
            self.root_updates += 1;
        }
    }
}

fn main() {
    let mdp = SailingMdp::new(SailingConfig::new(5)).unwrap();
    let oracle = cache::load_or_build(&mdp, 1_000_000).unwrap();
    let horizon = mdp.horizon();
    let starts = mdp.start_states();
    let root = RngStream::root(1);
    let budget = 16384u64;
    let trials = 60u64;

    let mut gap_sum = 0.0;
    for trial in 0..trials {
        let s0 = {
            let mut rng = root.child(&[1, trial]).rng();
            starts[rng.gen_range(0..starts.len())]
        };
        let e = oracle.entry(s0, horizon).unwrap();
        let mut qs: Vec<f64> = e.q.clone();
        qs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        gap_sum += qs[0] - qs[1];
    }
    println!("mean oracle best-vs-second gap over starts: {:.4}", gap_sum / trials as f64);

    for spec_name in ["brue", "gct", "brue-per-alpha:0.9"] {
        let config = PlanConfig::new(PlannerSpec::parse(spec_name).unwrap());
        let mut total_err = 0.0;
        let mut wrong = 0u64;
        let mut waste = 0.0;
        let mut bias = 0.0;
        let mut bias_n = 0u64;
        let mut mean_len = 0.0;
        let mut root_updates = 0.0;
        for trial in 0..trials {
            let s0 = {
                let mut rng = root.child(&[1, trial]).rng();
                starts[rng.gen_range(0..starts.len())]
            };
            let stream = root.child(&[9, trial]);
            let mut tally = Tally::default();
            let out = plan_probed(&mdp, s0, budget, &config, &stream, &mut tally).unwrap();
            let err = oracle.simple_regret(s0, horizon, out.action);
            total_err += err;
            if err > 1e-9 {
                wrong += 1;
            }
            waste += tally.wasted as f64 / tally.episodes as f64;
            mean_len += tally.traj_len_sum as f64 / tally.episodes as f64;
            root_updates += tally.root_updates as f64;
            let entry = oracle.entry(s0, horizon).unwrap();
            for a in 0..out.root_q.len() {
                if out.root_n[a] > 0 {
                    bias += (out.root_q[a] - entry.q[a]).abs();
                    bias_n += 1;
                }
            }
        }
        println!(
            "{spec_name}: mean_err {:.4} wrong {}/{} waste {:.3} mean_len {:.1} root_upd {:.0} mean|Qhat-Q*| {:.3}",
            total_err / trials as f64,
            wrong,
            trials,
            waste / trials as f64,
            mean_len / trials as f64,
            root_updates / trials as f64,
            bias / bias_n as f64
        );
    }
}

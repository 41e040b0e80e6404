//! Monte-Carlo checks of the contaminated-sequence tail bounds.
//!
//! Setting: a sequence of `[0, h]`-valued random variables whose conditional
//! mean given the past equals `μ` except on a rare event whose probability
//! at step `i` is at most `c_p·e^(−c_e·i)`. Two analytic tail bounds apply:
//!
//! - [`full_mean_bound`]: the mean of the first `t` values deviates from `μ`
//!   by `δ` or more (either direction) with probability at most
//!   `[1 + c_p·2h²/(δ²c_e²)]·e^(−3δ²c_e·t/(2h²))`. A tunable variant
//!   ([`full_mean_bound_tuned`]) trades the bracket against the decay rate.
//! - [`window_mean_bound`]: the same deviation for the mean of the newest
//!   `⌈αt⌉` values is bounded by
//!   `[1 + c_p/(c_e(1−α))·e^(−c_e(1−α)²t)]·e^(−3δ²c_e·αt/(2h²))`; at `α = 1`
//!   the full-mean bracket applies.
//!
//! [`contaminated_stream`] generates sequences meeting the hypothesis by
//! construction: draws are uniform on `[0, h]` (mean `μ = h/2`), except that
//! draw `i` is replaced by a uniform draw on `[h/2, h]` (mean `3h/4`)
//! whenever the previous value fell below `h·min(1, c_p·e^(−c_e·i))` — a
//! rule measurable in the history that fires with probability at most
//! `min(1, c_p·e^(−c_e·i))`, with equality while the previous draw is clean.
//!
//! [`check_tails`] measures tail frequencies over many independent streams
//! and compares them with the bounds. Because the bounds are often far below
//! the resolution of any feasible trial count (e.g. `e^(−187)`), "empirical
//! frequency above the bound" is read through a one-sided 99%
//! Clopper-Pearson *lower* confidence bound: a violation is declared only
//! when even the lower confidence bound exceeds the analytic bound.
//! Deterministic given the [`RngStream`](crate::rng::RngStream).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::rng::RngStream;
use crate::stats::{clopper_pearson_lower, clopper_pearson_upper};
use crate::{Error, Result};

/// A contaminated-sequence shape: support bound, deviation of interest, and
/// contamination constants.
#[derive(Clone, Copy, Debug)]
pub struct TailScenario {
    /// Support bound: values live in `[0, h]`.
    pub h: f64,
    /// Deviation of interest, `0 < δ ≤ h/2`.
    pub delta: f64,
    /// Contamination amplitude, `≥ 0` (0 disables contamination).
    pub c_p: f64,
    /// Contamination decay rate, in `(0, 1]`.
    pub c_e: f64,
}

impl TailScenario {
    pub fn new(h: f64, delta: f64, c_p: f64, c_e: f64) -> Result<TailScenario> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("support bound must be positive, got {h}")));
        }
        if !(delta > 0.0 && delta <= h / 2.0) {
            return Err(Error::Config(format!("deviation must be in (0, h/2] = (0, {}], got {delta}", h / 2.0)));
        }
        if !(c_p >= 0.0 && c_p.is_finite()) {
            return Err(Error::Config(format!("contamination amplitude must be >= 0, got {c_p}")));
        }
        if !(c_e > 0.0 && c_e <= 1.0) {
            return Err(Error::Config(format!("contamination decay must be in (0, 1], got {c_e}")));
        }
        Ok(TailScenario { h, delta, c_p, c_e })
    }

    /// Limit mean of the generated sequences.
    pub fn mu(&self) -> f64 {
        self.h / 2.0
    }
}

/// Tail bound for the mean of the first `t` values (either tail).
pub fn full_mean_bound(s: &TailScenario, t: u64) -> f64 {
    let bracket = 1.0 + s.c_p * 2.0 * s.h * s.h / (s.delta * s.delta * s.c_e * s.c_e);
    bracket * decay(s, 1.0, t)
}

/// Tunable variant of [`full_mean_bound`]: for any `β ∈ [0, 1]` the tail is
/// also at most `[1 + c_p/(c_e(1−β))·e^(−c_e(1−β)/(2h²))]·e^(−3δ²c_e·βt/(2h²))`,
/// trading a smaller bracket against a slower decay. `β = 1` yields an
/// infinite bracket (a vacuous bound); the untuned form keeps the full decay
/// rate with a finite bracket and is the default everywhere.
pub fn full_mean_bound_tuned(s: &TailScenario, t: u64, beta: f64) -> f64 {
    assert!((0.0..=1.0).contains(&beta), "beta must be in [0, 1], got {beta}");
    let bracket =
        1.0 + s.c_p / (s.c_e * (1.0 - beta)) * (-s.c_e * (1.0 - beta) / (2.0 * s.h * s.h)).exp();
    bracket * decay(s, beta, t)
}

/// Tail bound for the mean of the newest `⌈αt⌉` of the first `t` values,
/// `0 < α ≤ 1`. At `α = 1` this is exactly [`full_mean_bound`].
pub fn window_mean_bound(s: &TailScenario, alpha: f64, t: u64) -> f64 {
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must be in (0, 1], got {alpha}");
    if alpha == 1.0 {
        return full_mean_bound(s, t);
    }
    let bracket = 1.0
        + s.c_p / (s.c_e * (1.0 - alpha))
            * (-s.c_e * (1.0 - alpha) * (1.0 - alpha) * t as f64).exp();
    bracket * decay(s, alpha, t)
}

/// The shared decay factor `e^(−3δ²c_e·αt/(2h²))`.
fn decay(s: &TailScenario, alpha: f64, t: u64) -> f64 {
    (-3.0 * s.delta * s.delta * s.c_e * alpha * t as f64 / (2.0 * s.h * s.h)).exp()
}

/// Generate `t_max` values meeting the contamination hypothesis (see module
/// docs), plus a flag per value marking the contaminated draws.
pub fn contaminated_stream_flagged(
    s: &TailScenario,
    t_max: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<bool>) {
    let mut xs = Vec::with_capacity(t_max);
    let mut flags = Vec::with_capacity(t_max);
    for i in 1..=t_max {
        let contaminate = match xs.last() {
            None => false,
            Some(&prev) => {
                let rate = (s.c_p * (-s.c_e * i as f64).exp()).min(1.0);
                prev <= s.h * rate
            }
        };
        let u: f64 = rng.gen();
        xs.push(if contaminate { s.h / 2.0 + u * s.h / 2.0 } else { u * s.h });
        flags.push(contaminate);
    }
    (xs, flags)
}

/// [`contaminated_stream_flagged`] without the flags.
pub fn contaminated_stream(s: &TailScenario, t_max: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    contaminated_stream_flagged(s, t_max, rng).0
}

/// Which deviation direction a check row covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// Mean at least `μ + δ`.
    Upper,
    /// Mean at most `μ − δ`.
    Lower,
}

impl Tail {
    pub fn name(self) -> &'static str {
        match self {
            Tail::Upper => "upper",
            Tail::Lower => "lower",
        }
    }
}

/// One (scenario, α, t, tail) measurement from [`check_tails`].
#[derive(Clone, Copy, Debug)]
pub struct TailCheckRow {
    pub h: f64,
    pub delta: f64,
    pub c_p: f64,
    pub c_e: f64,
    pub alpha: f64,
    pub tail: Tail,
    pub t: u64,
    pub trials: u64,
    pub hits: u64,
    /// `hits / trials`.
    pub empirical: f64,
    /// One-sided 99% Clopper-Pearson lower confidence bound on the tail.
    pub ci_lower: f64,
    /// One-sided 99% Clopper-Pearson upper confidence bound on the tail.
    pub ci_upper: f64,
    /// The analytic bound for this (α, t, tail).
    pub bound: f64,
    /// True when even `ci_lower` exceeds the analytic bound.
    pub violation: bool,
}

/// Measure tail frequencies against the analytic bounds.
///
/// Each trial derives its own child stream, generates one sequence of
/// `max(t_grid)` values, and evaluates every (α, t, tail) combination on its
/// prefix sums — so `α = 1` rows really are the full-mean check on the same
/// streams as the windowed rows. Results are independent of the parallel
/// split. Frequencies resolve `1/trials`, so trials in the 10⁴–10⁵ range are
/// needed for the confidence bounds to carry weight.
pub fn check_tails(
    scenario: &TailScenario,
    alphas: &[f64],
    t_grid: &[u64],
    trials: u64,
    stream: &RngStream,
) -> Result<Vec<TailCheckRow>> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    if t_grid.is_empty() || alphas.is_empty() {
        return Err(Error::Config("need at least one t and one alpha".into()));
    }
    if t_grid.iter().any(|&t| t == 0) {
        return Err(Error::Config("t values must be at least 1".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::Config("alpha values must be in (0, 1]".into()));
    }
    let t_max = *t_grid.iter().max().expect("non-empty") as usize;
    let mu = scenario.mu();

    // hits[(alpha, t) pair][tail]; summed counters, so any parallel split
    // of the trial range yields identical totals.
    let cells = alphas.len() * t_grid.len();
    let hits: Vec<[u64; 2]> = (0..trials)
        .into_par_iter()
        .fold(
            || vec![[0u64; 2]; cells],
            |mut acc, trial| {
                let mut rng = stream.child(&[trial]).rng();
                let xs = contaminated_stream(scenario, t_max, &mut rng);
                let mut prefix = Vec::with_capacity(t_max + 1);
                prefix.push(0.0);
                let mut sum = 0.0;
                for &x in &xs {
                    sum += x;
                    prefix.push(sum);
                }
                for (ai, &alpha) in alphas.iter().enumerate() {
                    for (ti, &t) in t_grid.iter().enumerate() {
                        let t = t as usize;
                        let w = ((alpha * t as f64).ceil() as usize).clamp(1, t);
                        let window_sum = prefix[t] - prefix[t - w];
                        let cell = &mut acc[ai * t_grid.len() + ti];
                        if window_sum >= (mu + scenario.delta) * w as f64 {
                            cell[0] += 1;
                        }
                        if window_sum <= (mu - scenario.delta) * w as f64 {
                            cell[1] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![[0u64; 2]; cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x[0] += y[0];
                    x[1] += y[1];
                }
                a
            },
        );

    let mut rows = Vec::with_capacity(cells * 2);
    for (ai, &alpha) in alphas.iter().enumerate() {
        for (ti, &t) in t_grid.iter().enumerate() {
            let bound = window_mean_bound(scenario, alpha, t);
            for (side, tail) in [Tail::Upper, Tail::Lower].into_iter().enumerate() {
                let h = hits[ai * t_grid.len() + ti][side];
                let ci_lower = clopper_pearson_lower(h, trials, 0.99);
                let ci_upper = clopper_pearson_upper(h, trials, 0.99);
                rows.push(TailCheckRow {
                    h: scenario.h,
                    delta: scenario.delta,
                    c_p: scenario.c_p,
                    c_e: scenario.c_e,
                    alpha,
                    tail,
                    t,
                    trials,
                    hits: h,
                    empirical: h as f64 / trials as f64,
                    ci_lower,
                    ci_upper,
                    bound,
                    violation: ci_lower > bound,
                });
            }
        }
    }
    Ok(rows)
}

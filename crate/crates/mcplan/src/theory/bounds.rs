//! Log-space evaluation of the planners' analytic regret bounds.
//!
//! Two families are covered, both parameterized by the problem descriptors
//! `K` (maximum actions per state), `B` (maximum outcomes per action),
//! `H` (horizon), `d` (smallest decision gap), and `p` (smallest non-zero
//! outcome probability):
//!
//! - [`flat_bounds`]: for the flat-policy baselines. The round-robin
//!   (`naive`) planner's expected simple regret after `n` episodes is at
//!   most `H·K^(B^H)·exp(−⌊n/K^(B^H)⌋·d²/(2H²))`; the rollout-sharing
//!   (`crafty`) planner's is at most `4H·K^(B^H)·exp(−n·d²/(4K^(2H)H²))`,
//!   which drops below the trivial bound `H` once
//!   `n > (K²B)^H·4(H/d)²·ln K`. Dividing either regret bound by `H` bounds
//!   the probability of recommending a suboptimal action.
//! - [`bound_constants`]: for the switch-based planner, whose expected
//!   simple regret after `n > H` episodes is at most `H·c·e^(−c'·n)`
//!   (choice-error probability `c·e^(−c'·n)`). The closed forms for `c` and
//!   `c'` are towers of factorials and powers, so they are evaluated as
//!   natural logs; the same goes for the per-level chain `c_h, c_h'` that
//!   the global pair is assembled from.
//!
//! All formulas involve terms like `(H!)³` and `16^((H−1)²)` that overflow
//! `f64` long before `H = 12`; the log-space fields are always finite, and
//! the convenience plain-value accessors may round to `+inf`.

use crate::{Error, Result};

/// Natural log of `n!`, by direct summation.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Per-level accuracy constants: conditioned on a cell at `h` steps-to-go
/// having absorbed `t` estimation samples, each tail of its value estimate
/// being off by `d/2` or more has probability at most `c_h·exp(−c_h'·t)`.
#[derive(Clone, Copy, Debug)]
pub struct LevelConstants {
    /// Steps-to-go of this level, `1..=H`.
    pub h: u32,
    /// `ln c_h`.
    pub log_c: f64,
    /// `ln c_h'`.
    pub log_c_prime: f64,
}

impl LevelConstants {
    /// `c_h` as a plain value (may overflow to `+inf`).
    pub fn c(&self) -> f64 {
        self.log_c.exp()
    }

    /// `c_h'` as a plain value.
    pub fn c_prime(&self) -> f64 {
        self.log_c_prime.exp()
    }
}

/// The switch-based planner's exponential-decay constants for one problem
/// shape, produced by [`bound_constants`].
#[derive(Clone, Debug)]
pub struct BoundConstants {
    /// `ln c` of the global regret bound `H·c·e^(−c'·n)`.
    pub log_c: f64,
    /// `ln c'`.
    pub log_c_prime: f64,
    /// `c` as a plain value; exact for `H = 1` (where `c = 4K`), otherwise
    /// `exp(log_c)`, which may round to `+inf`.
    pub c: f64,
    /// `c'` as a plain value; exact for `H = 1` (where `c' = 3p/(2K²)`).
    pub c_prime: f64,
    /// Episodes after which the bound beats the trivial regret bound:
    /// `ln(c)/c'`.
    pub transition_n: f64,
    /// The per-level chain for `h = 1..=H`. The `h = 1` entry evaluates the
    /// closed form, which collapses to `c_1 = 1`.
    pub levels: Vec<LevelConstants>,
    /// `ln` of the alternative bottom-level decay rate `d²/2` that a direct
    /// concentration argument gives. The closed form's `h = 1` value is
    /// `3(p/K)^H` instead; both are exposed, neither is "the" right one.
    pub basis_log_c1_prime: f64,
}

fn validate_shape(p: f64, d: f64, k: u32, h: u32) -> Result<()> {
    if d == 0.0 {
        return Err(Error::Degenerate(
            "decision gap d = 0: every action is optimal and the bounds are vacuous".into(),
        ));
    }
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::Config(format!("decision gap must be in (0, 1], got {d}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("outcome probability must be in (0, 1], got {p}")));
    }
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 actions per state, got {k}")));
    }
    if h < 1 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    Ok(())
}

/// Evaluate the switch-based planner's bound constants in log-space.
///
/// `p, d ∈ (0, 1]`, `K ≥ 2`, `H ≥ 1`; a zero gap is reported as a
/// degenerate instance. All log fields are finite for valid inputs.
pub fn bound_constants(p: f64, d: f64, k: u32, h: u32) -> Result<BoundConstants> {
    validate_shape(p, d, k, h)?;
    let (ln_k, ln_d, ln_p) = (f64::from(k).ln(), d.ln(), p.ln());
    let hh = i64::from(h);

    // ln c = ln 4 + (3H²−2H)·ln K + 3·ln H! + 4·Σ_{i<H} ln i!
    //        + (H−1)·ln 24 + (H−1)²·ln 16 − (2H²−4H+2)·ln d − (3H²−3H)·ln p
    let sum_ln_fact: f64 = (1..h as u64).map(ln_factorial).sum();
    let log_c = 4f64.ln()
        + (3 * hh * hh - 2 * hh) as f64 * ln_k
        + 3.0 * ln_factorial(h as u64)
        + 4.0 * sum_ln_fact
        + (hh - 1) as f64 * 24f64.ln()
        + ((hh - 1) * (hh - 1)) as f64 * 16f64.ln()
        - (2 * hh * hh - 4 * hh + 2) as f64 * ln_d
        - (3 * hh * hh - 3 * hh) as f64 * ln_p;

    // ln c' = ln 3 + (2H−2)·ln d + (2H−1)·ln p
    //         − ln 2H − (H−1)·ln 16 − 2·ln H! − 2H·ln K
    let log_c_prime = 3f64.ln() + (2 * hh - 2) as f64 * ln_d + (2 * hh - 1) as f64 * ln_p
        - (2.0 * f64::from(h)).ln()
        - (hh - 1) as f64 * 16f64.ln()
        - 2.0 * ln_factorial(h as u64)
        - (2 * hh) as f64 * ln_k;

    // At H = 1 everything collapses to small rationals; compute them by
    // direct products so callers see exact values, not exp(ln(·)) round
    // trips.
    let (c, c_prime) = if h == 1 {
        (4.0 * f64::from(k), 3.0 * p / (2.0 * f64::from(k) * f64::from(k)))
    } else {
        (log_c.exp(), log_c_prime.exp())
    };

    let mut levels = Vec::with_capacity(h as usize);
    for lvl in 1..=i64::from(h) {
        // ln c_h = (2Hh+h²−2H−1)·ln K + 3·ln h! + 4·Σ_{i<h} ln i!
        //          + (h−1)·ln 24 + (h−1)²·ln 16
        //          − 2(h−1)²·ln d − (2Hh+h²−2H−h)·ln p
        let sum_ln_fact: f64 = (1..lvl as u64).map(ln_factorial).sum();
        let log_ch = (2 * hh * lvl + lvl * lvl - 2 * hh - 1) as f64 * ln_k
            + 3.0 * ln_factorial(lvl as u64)
            + 4.0 * sum_ln_fact
            + (lvl - 1) as f64 * 24f64.ln()
            + ((lvl - 1) * (lvl - 1)) as f64 * 16f64.ln()
            - (2 * (lvl - 1) * (lvl - 1)) as f64 * ln_d
            - (2 * hh * lvl + lvl * lvl - 2 * hh - lvl) as f64 * ln_p;
        // ln c_h' = ln 3 + 2(h−1)·ln d + (H+h−1)·ln p
        //           − (h−1)·ln 16 − 2·ln h! − (H+h−1)·ln K
        let log_ch_prime = 3f64.ln() + (2 * (lvl - 1)) as f64 * ln_d
            + (hh + lvl - 1) as f64 * ln_p
            - (lvl - 1) as f64 * 16f64.ln()
            - 2.0 * ln_factorial(lvl as u64)
            - (hh + lvl - 1) as f64 * ln_k;
        levels.push(LevelConstants { h: lvl as u32, log_c: log_ch, log_c_prime: log_ch_prime });
    }

    Ok(BoundConstants {
        log_c,
        log_c_prime,
        c,
        c_prime,
        transition_n: log_c / c_prime,
        levels,
        basis_log_c1_prime: (d * d / 2.0).ln(),
    })
}

/// Analytic bounds for the two flat-policy baselines after `n` episodes,
/// produced by [`flat_bounds`]. `regret` fields bound the expected simple
/// regret; `error` fields (the regret bounds divided by `H`) bound the
/// probability of recommending a suboptimal root action.
#[derive(Clone, Copy, Debug)]
pub struct FlatBounds {
    /// `ln` of the round-robin planner's regret bound.
    pub log_naive_regret: f64,
    /// `ln` of the rollout-sharing planner's regret bound.
    pub log_crafty_regret: f64,
    pub naive_regret: f64,
    pub crafty_regret: f64,
    pub naive_error: f64,
    pub crafty_error: f64,
    /// Episodes after which the rollout-sharing planner's bound drops below
    /// the trivial regret bound `H`: `(K²B)^H·4(H/d)²·ln K`.
    pub crafty_transition_n: f64,
}

/// `K^(B^H)` exactly, when it fits in a `u64`.
fn arm_count_exact(k: u32, b: u32, h: u32) -> Option<u64> {
    let exponent = (b as u64).checked_pow(h)?;
    let mut arms: u64 = 1;
    for _ in 0..exponent {
        arms = arms.checked_mul(k as u64)?;
    }
    Some(arms)
}

/// Evaluate the flat-policy baselines' bounds in log-space.
///
/// Inputs are desk-scale problem descriptors; `d ≥ 0` is accepted (a zero
/// gap just removes the exponential decay and pushes the transition point
/// to infinity).
pub fn flat_bounds(k: u32, b: u32, h: u32, d: f64, n: u64) -> Result<FlatBounds> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 actions per state, got {k}")));
    }
    if b < 1 {
        return Err(Error::Config("need at least 1 outcome per action".into()));
    }
    if h < 1 || h > 1_000_000 {
        return Err(Error::Config(format!("horizon out of range: {h}")));
    }
    if !(d >= 0.0) {
        return Err(Error::Config(format!("decision gap must be >= 0, got {d}")));
    }
    let hf = f64::from(h);
    let ln_k = f64::from(k).ln();
    let arm_exponent = f64::from(b).powi(h as i32);
    let log_arms = arm_exponent * ln_k;
    let arms_exact = arm_count_exact(k, b, h);

    // Round-robin: every arm is sampled at least ⌊n/K^(B^H)⌋ times. When the
    // arm count does not even fit in a u64, that floor is certainly zero.
    let sweeps = arms_exact.map_or(0, |arms| n / arms);
    let naive_exponent = sweeps as f64 * d * d / (2.0 * hf * hf);
    let log_naive_regret = hf.ln() + log_arms - naive_exponent;

    // Rollout sharing: each episode reaches any fixed arm with probability
    // K^(−H), giving a bound that decays with n itself rather than with
    // completed sweeps.
    let crafty_exponent = n as f64 * d * d / (4.0 * f64::from(k).powi(2 * h as i32) * hf * hf);
    let log_crafty_regret = 4f64.ln() + hf.ln() + log_arms - crafty_exponent;

    // Plain values: prefer the exact arm count when it fits, for bit-clean
    // small cases.
    let arms_value = arms_exact.map_or(log_arms.exp(), |a| a as f64);
    let naive_regret = hf * arms_value * (-naive_exponent).exp();
    let crafty_regret = 4.0 * hf * arms_value * (-crafty_exponent).exp();

    let crafty_transition_n =
        (f64::from(k) * f64::from(k) * f64::from(b)).powi(h as i32) * 4.0 * (hf / d).powi(2) * ln_k;

    Ok(FlatBounds {
        log_naive_regret,
        log_crafty_regret,
        naive_regret,
        crafty_regret,
        naive_error: naive_regret / hf,
        crafty_error: crafty_regret / hf,
        crafty_transition_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_factorial_matches_direct_products() {
        let mut product = 1.0f64;
        for n in 0..=20u64 {
            if n > 0 {
                product *= n as f64;
            }
            assert_relative_eq!(ln_factorial(n), product.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn single_step_constants_are_exact() {
        let bc = bound_constants(0.5, 0.3, 2, 1).unwrap();
        assert_eq!(bc.c, 8.0);
        assert_eq!(bc.c_prime, 0.1875);
        assert_relative_eq!(bc.log_c, 8f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(bc.log_c_prime, 0.1875f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(bc.transition_n, 8f64.ln() / 0.1875, epsilon = 1e-12);
        // One level: the closed form gives c_1 = 1 and c_1' = 3(p/K)^H.
        assert_eq!(bc.levels.len(), 1);
        assert_eq!(bc.levels[0].log_c, 0.0);
        assert_relative_eq!(bc.levels[0].c_prime(), 3.0 * (0.5f64 / 2.0), epsilon = 1e-12);
        // The direct-argument alternative for the bottom level.
        assert_relative_eq!(bc.basis_log_c1_prime.exp(), 0.3 * 0.3 / 2.0, epsilon = 1e-12);
    }

    /// Independent check of the log-space accumulation: at H = 4 everything
    /// still fits in f64, so the towers can be multiplied out directly.
    #[test]
    fn log_path_matches_direct_products_while_they_fit() {
        let (p, d, k, h) = (0.3f64, 0.1f64, 2u32, 4u32);
        let fact = |n: u64| (1..=n).product::<u64>() as f64;
        let c_direct = 4.0 * 2f64.powi(3 * 16 - 2 * 4) * fact(4).powi(3)
            * (fact(1) * fact(2) * fact(3)).powi(4)
            * 24f64.powi(3)
            * 16f64.powi(9)
            / (d.powi(2 * 16 - 4 * 4 + 2) * p.powi(3 * 16 - 3 * 4));
        let c_prime_direct =
            3.0 * d.powi(6) * p.powi(7) / (2.0 * 4.0 * 16f64.powi(3) * fact(4).powi(2) * 2f64.powi(8));
        let bc = bound_constants(p, d, k, h).unwrap();
        assert_relative_eq!(bc.log_c, c_direct.ln(), epsilon = 1e-9);
        assert_relative_eq!(bc.log_c_prime, c_prime_direct.ln(), epsilon = 1e-9);
        assert!(bc.transition_n > 0.0);
        for level in &bc.levels {
            let lh = level.h as i32;
            let ch_direct = 2f64.powi(2 * 4 * lh + lh * lh - 2 * 4 - 1)
                * fact(level.h as u64).powi(3)
                * (1..level.h as u64).map(fact).product::<f64>().powi(4)
                * 24f64.powi(lh - 1)
                * 16f64.powi((lh - 1) * (lh - 1))
                / (d.powi(2 * (lh - 1) * (lh - 1)) * p.powi(2 * 4 * lh + lh * lh - 2 * 4 - lh));
            let ch_prime_direct = 3.0 * d.powi(2 * (lh - 1)) * p.powi(4 + lh - 1)
                / (16f64.powi(lh - 1) * fact(level.h as u64).powi(2) * 2f64.powi(4 + lh - 1));
            assert_relative_eq!(level.log_c, ch_direct.ln(), epsilon = 1e-9);
            assert_relative_eq!(level.log_c_prime, ch_prime_direct.ln(), epsilon = 1e-9);
        }
    }

    #[test]
    fn level_chain_is_monotone_with_the_documented_ratio() {
        for &p in &[0.1, 0.3, 0.5, 1.0] {
            for &d in &[0.05, 0.2, 0.5] {
                for k in [2u32, 3] {
                    for h in 1..=6u32 {
                        let bc = bound_constants(p, d, k, h).unwrap();
                        assert!(bc.log_c.is_finite() && bc.log_c_prime.is_finite());
                        let ratio_log = (p / f64::from(k)).ln();
                        for w in bc.levels.windows(2) {
                            assert!(w[1].log_c > w[0].log_c, "c_h must increase");
                            assert!(
                                w[1].log_c_prime < w[0].log_c_prime + ratio_log,
                                "c_h' must shrink at least by p/K per level"
                            );
                            // Exact ratio: c_h'/c_{h-1}' = (p/K)·d²/(16h²).
                            let expected = ratio_log + (d * d / (16.0 * f64::from(w[1].h).powi(2))).ln();
                            assert_relative_eq!(
                                w[1].log_c_prime - w[0].log_c_prime,
                                expected,
                                epsilon = 1e-9
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn global_constant_grows_with_horizon_and_transition_is_at_most_quadratic_in_log() {
        for &p in &[0.3, 1.0] {
            for &d in &[0.05, 0.5] {
                for k in [2u32, 3] {
                    let mut prev_log_c = f64::NEG_INFINITY;
                    for h in 1..=6u32 {
                        let bc = bound_constants(p, d, k, h).unwrap();
                        assert!(bc.log_c > prev_log_c, "ln c must increase with H");
                        prev_log_c = bc.log_c;
                        let hf = f64::from(h);
                        let scale = (f64::from(k) * hf / (p * d)).ln();
                        assert!(
                            bc.transition_n.ln() <= 3.0 * hf * hf * scale + 20.0,
                            "transition point must stay within the quadratic-exponent regime \
                             (p={p}, d={d}, K={k}, H={h})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn log_fields_stay_finite_for_deep_horizons() {
        let bc = bound_constants(0.2, 0.1, 3, 12).unwrap();
        assert!(bc.log_c.is_finite());
        assert!(bc.log_c_prime.is_finite());
        assert!(bc.transition_n.is_finite());
        assert!(bc.levels.iter().all(|l| l.log_c.is_finite() && l.log_c_prime.is_finite()));
        // The plain value is far beyond f64 range; only the log is usable.
        assert!(bc.c.is_infinite());
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        assert!(matches!(bound_constants(0.5, 0.0, 2, 3), Err(Error::Degenerate(_))));
        assert_eq!(bound_constants(0.0, 0.5, 2, 3).unwrap_err().exit_code(), 2);
        assert_eq!(bound_constants(0.5, 1.5, 2, 3).unwrap_err().exit_code(), 2);
        assert_eq!(bound_constants(0.5, 0.5, 1, 3).unwrap_err().exit_code(), 2);
        assert_eq!(bound_constants(0.5, 0.5, 2, 0).unwrap_err().exit_code(), 2);
        assert_eq!(flat_bounds(2, 2, 2, -0.1, 8).unwrap_err().exit_code(), 2);
        assert_eq!(flat_bounds(1, 2, 2, 0.1, 8).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn naive_bound_before_one_full_sweep_is_the_arm_count_times_horizon() {
        // K=2, B=2, H=2: 2^(2²) = 16 arms; n = 10 completes no sweep, so the
        // exponent vanishes and the bound is H·16 = 32 exactly.
        let fb = flat_bounds(2, 2, 2, 0.2, 10).unwrap();
        assert_eq!(fb.naive_regret, 32.0);
        assert_eq!(fb.naive_error, 16.0);
        assert_relative_eq!(fb.log_naive_regret, 32f64.ln(), epsilon = 1e-12);
        // One full sweep later the exponent kicks in.
        let after = flat_bounds(2, 2, 2, 0.2, 16).unwrap();
        assert_relative_eq!(after.naive_regret, 32.0 * (-0.04f64 / 8.0).exp(), epsilon = 1e-12);
    }

    #[test]
    fn crafty_bound_decays_monotonically_and_transition_matches_the_formula() {
        let mut prev = f64::INFINITY;
        for n in [0u64, 10, 100, 1_000, 10_000] {
            let fb = flat_bounds(2, 2, 2, 0.2, n).unwrap();
            assert!(fb.crafty_regret < prev || n == 0);
            assert_relative_eq!(fb.crafty_error, fb.crafty_regret / 2.0, epsilon = 1e-12);
            prev = fb.crafty_regret;
        }
        let fb = flat_bounds(2, 2, 2, 0.2, 1).unwrap();
        let direct = 64.0 * 4.0 * (2.0f64 / 0.2).powi(2) * 2f64.ln();
        assert_relative_eq!(fb.crafty_transition_n, direct, epsilon = 1e-12);
        // At the transition point the decay has cancelled the arm count,
        // leaving regret ≈ 4H; well past it the error bound drops below 1.
        let at = flat_bounds(2, 2, 2, 0.2, fb.crafty_transition_n.round() as u64).unwrap();
        assert_relative_eq!(at.crafty_regret, 8.0, epsilon = 1e-3);
        let past = flat_bounds(2, 2, 2, 0.2, 2 * fb.crafty_transition_n.ceil() as u64).unwrap();
        assert!(past.crafty_error < 1.0);
    }

    #[test]
    fn astronomical_arm_counts_stay_in_log_space() {
        // B^H = 3^20 ≈ 3.5e9 arms exponent: K^(B^H) overflows u64 and f64,
        // but the log form stays finite and the sweep floor is zero.
        let fb = flat_bounds(7, 3, 20, 0.5, u64::MAX).unwrap();
        assert!(fb.log_naive_regret.is_finite());
        assert!(fb.naive_regret.is_infinite());
        assert_relative_eq!(
            fb.log_naive_regret,
            20f64.ln() + 3f64.powi(20) * 7f64.ln(),
            epsilon = 1e-9
        );
    }
}

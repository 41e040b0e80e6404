//! Small statistical helpers shared by the benchmark harness and the
//! acceptance tests: summary statistics, paired one-sided t-tests, exact
//! (Clopper–Pearson) binomial confidence bounds, and a least-squares slope.
//!
//! Everything here is deterministic arithmetic; no randomness is consumed.

use statrs::distribution::{Beta, ContinuousCDF, StudentsT};

/// Invert a monotone CDF by bisection. 200 halvings of the bracket drive the
/// answer to full f64 precision; the library's own `inverse_cdf` stops early
/// and is only good to ~1e-5.
fn invert_cdf(cdf: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sample mean; 0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation over √n).
/// 0 when fewer than two observations.
pub fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// One-sided p-value of the paired t-test with alternative `mean < 0`.
///
/// Accepts the vector of paired differences. Degenerate inputs are resolved
/// conservatively: with zero spread the p-value is 0 if the common value is
/// negative and 1 otherwise, and fewer than two pairs gives p = 1.
pub fn paired_t_pvalue_less(diffs: &[f64]) -> f64 {
    let n = diffs.len();
    if n < 2 {
        return 1.0;
    }
    let m = mean(diffs);
    let se = stderr(diffs);
    if se == 0.0 {
        return if m < 0.0 { 0.0 } else { 1.0 };
    }
    let t = m / se;
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid dof");
    dist.cdf(t)
}

/// One-sided upper confidence limit for the mean of `xs` at the given
/// confidence level (e.g. 0.95). With zero spread this is the mean itself.
pub fn mean_upper_confidence(xs: &[f64], confidence: f64) -> f64 {
    let n = xs.len();
    let m = mean(xs);
    let se = stderr(xs);
    if n < 2 || se == 0.0 {
        return m;
    }
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid dof");
    let quantile = invert_cdf(|t| dist.cdf(t), confidence, -1e6, 1e6);
    m + quantile * se
}

/// Exact one-sided lower confidence bound for a binomial proportion with
/// `successes` hits out of `trials`, at the given confidence level.
pub fn clopper_pearson_lower(successes: u64, trials: u64, confidence: f64) -> f64 {
    assert!(successes <= trials && trials > 0);
    if successes == 0 {
        return 0.0;
    }
    let dist = Beta::new(successes as f64, (trials - successes + 1) as f64).expect("valid shape");
    invert_cdf(|p| dist.cdf(p), 1.0 - confidence, 0.0, 1.0)
}

/// Exact one-sided upper confidence bound for a binomial proportion.
pub fn clopper_pearson_upper(successes: u64, trials: u64, confidence: f64) -> f64 {
    assert!(successes <= trials && trials > 0);
    if successes == trials {
        return 1.0;
    }
    let dist = Beta::new((successes + 1) as f64, (trials - successes) as f64).expect("valid shape");
    invert_cdf(|p| dist.cdf(p), confidence, 0.0, 1.0)
}

/// Least-squares slope of `ys` against `xs`. Panics if the lengths differ or
/// `xs` has no spread.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    assert!(sxx > 0.0, "x values must not be constant");
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

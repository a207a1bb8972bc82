//! Exact negative binomial test for two groups of replicated counts.
//!
//! Counts within a group are summed. With `reps` samples per group, each of
//! negative binomial size `size`, the group sum is negative binomial with
//! size `reps * size`. Conditioning on the grand total `s` gives
//!
//! ```text
//! P(S1 = a | s) = f(a) f(s - a) / sum_b f(b) f(s - b)
//! ```
//!
//! with `f` the group-sum pmf at the null mean `s / 2` (that is `s / (2 reps)`
//! per sample).

use statrs::function::gamma::ln_gamma;

use super::{NullLaw, TestResult, TwoSided};
use crate::error::{invalid, Result};

/// Exact test of equal means between two groups with group sums `s1`, `s2`.
pub fn nb_exact_test(s1: u64, s2: u64, size: f64, reps: u32) -> Result<TestResult> {
    nb_exact_test_with(s1, s2, size, reps, TwoSided::MinLikelihood)
}

pub fn nb_exact_test_with(
    s1: u64,
    s2: u64,
    size: f64,
    reps: u32,
    convention: TwoSided,
) -> Result<TestResult> {
    Ok(nb_null(s1 + s2, size, reps, convention)?.result(s1))
}

/// Null law of the first group sum given the grand total `s`.
pub fn nb_null(s: u64, size: f64, reps: u32, convention: TwoSided) -> Result<NullLaw> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(invalid(format!("negative binomial size must be positive, got {size}")));
    }
    if reps == 0 {
        return Err(invalid("at least one sample per group is required"));
    }
    if s == 0 {
        return Ok(NullLaw::degenerate(0));
    }
    let shape = reps as f64 * size;
    let mean = s as f64 / 2.0;
    let log_pmf: Vec<f64> = (0..=s)
        .map(|a| ln_nb_pmf(a, shape, mean) + ln_nb_pmf(s - a, shape, mean))
        .collect();
    Ok(NullLaw::from_log_pmf(0, &log_pmf, convention))
}

/// Log pmf of the negative binomial with the given size and mean.
pub(crate) fn ln_nb_pmf(k: u64, size: f64, mean: f64) -> f64 {
    let k_f = k as f64;
    let p = size / (size + mean);
    ln_gamma(k_f + size) - ln_gamma(size) - ln_gamma(k_f + 1.0)
        + size * p.ln()
        + if k == 0 { 0.0 } else { k_f * (1.0 - p).ln() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_split_is_modal() {
        // Needs total shape >= 1; below that the conditional law is U-shaped.
        for t in 0..25 {
            for (size, reps) in [(0.5, 2), (1.0, 3), (4.0, 2)] {
                assert_eq!(nb_exact_test(t, t, size, reps).unwrap().pvalue, 1.0);
            }
        }
    }

    #[test]
    fn zero_total_is_degenerate() {
        assert_eq!(
            nb_exact_test(0, 0, 2.0, 3).unwrap(),
            TestResult::degenerate()
        );
    }

    #[test]
    fn geometric_groups_give_uniform_split() {
        // size 1, one replicate: f is geometric, so f(a) f(4 - a) is flat in a.
        let r = nb_exact_test(4, 0, 1.0, 1).unwrap();
        assert_eq!(r.pvalue, 1.0);
        assert_eq!(r.support, vec![1.0]);
    }

    #[test]
    fn small_shape_makes_extremes_likely() {
        // Shape 1/2: beta-binomial(1/2, 1/2), so (6, 0) is the most likely split.
        assert_eq!(nb_exact_test(6, 0, 0.5, 1).unwrap().pvalue, 1.0);
        assert!(nb_exact_test(3, 3, 0.5, 1).unwrap().pvalue < 0.3);
    }

    #[test]
    fn nb_pmf_sums_to_one() {
        let total: f64 = (0..400).map(|k| ln_nb_pmf(k, 0.7, 5.0).exp()).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_parameters() {
        assert!(nb_exact_test(1, 2, 0.0, 3).is_err());
        assert!(nb_exact_test(1, 2, 1.0, 0).is_err());
    }
}

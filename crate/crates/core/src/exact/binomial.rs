//! Conditional binomial test for a pair of Poisson counts.

use super::{ln_choose, NullLaw, TestResult, TwoSided};

/// Tests equality of two Poisson means with equal exposure.
///
/// Given the total `n = x1 + x2`, `x1` is Binomial(n, 1/2) under the null.
pub fn binomial_test(x1: u64, x2: u64) -> TestResult {
    binomial_test_with(x1, x2, TwoSided::MinLikelihood)
}

pub fn binomial_test_with(x1: u64, x2: u64, convention: TwoSided) -> TestResult {
    binomial_null(x1 + x2, convention).result(x1)
}

/// Null law of `x1` given the total `n`: Binomial(n, 1/2).
pub fn binomial_null(n: u64, convention: TwoSided) -> NullLaw {
    // The 2^-n factor is common to every outcome and cancels on normalization.
    let log_pmf: Vec<f64> = (0..=n).map(|a| ln_choose(n, a)).collect();
    NullLaw::from_log_pmf(0, &log_pmf, convention)
}

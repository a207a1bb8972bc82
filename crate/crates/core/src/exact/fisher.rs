//! Fisher's exact test for two binomial proportions.

use super::{ln_choose, NullLaw, TestResult, TwoSided};
use crate::error::{invalid, Result};

/// Fisher's exact test of `x1 / r1` against `x2 / r2`.
///
/// Conditional on the margins, `x1` is hypergeometric under the null.
pub fn fisher_test(x1: u64, r1: u64, x2: u64, r2: u64) -> Result<TestResult> {
    fisher_test_with(x1, r1, x2, r2, TwoSided::MinLikelihood)
}

pub fn fisher_test_with(
    x1: u64,
    r1: u64,
    x2: u64,
    r2: u64,
    convention: TwoSided,
) -> Result<TestResult> {
    if x1 > r1 || x2 > r2 {
        return Err(invalid(format!(
            "successes exceed trials: {x1}/{r1}, {x2}/{r2}"
        )));
    }
    Ok(fisher_null(r1, r2, x1 + x2, convention)?.result(x1))
}

/// Null law of `x1` given trials `r1`, `r2` and `s` total successes: hypergeometric.
pub fn fisher_null(r1: u64, r2: u64, s: u64, convention: TwoSided) -> Result<NullLaw> {
    if s > r1 + r2 {
        return Err(invalid(format!("{s} successes exceed {} trials", r1 + r2)));
    }
    let lo = s.saturating_sub(r2);
    let hi = s.min(r1);
    let log_pmf: Vec<f64> = (lo..=hi)
        .map(|a| ln_choose(r1, a) + ln_choose(r2, s - a))
        .collect();
    Ok(NullLaw::from_log_pmf(lo, &log_pmf, convention))
}

//! Exact two-sided conditional tests for count data.
//!
//! Every test conditions on a total so that the null distribution of the
//! observed cell is a finite discrete law. Each result carries the observed
//! p-value together with the complete set of p-values attainable under that
//! conditional null (the *support*), which is what the discreteness-adjusted
//! estimators in [`crate::estimators`] consume.
//!
//! # Two-sided convention
//!
//! By default the two-sided p-value of an outcome `a` is the minimum-likelihood
//! sum
//!
//! ```text
//! p(a) = sum of P(b) over all outcomes b with P(b) <= P(a)
//! ```
//!
//! i.e. the total probability of outcomes no more likely than the one
//! observed. This is the convention of R's `fisher.test` and `binom.test`.
//! Probabilities are compared with a relative tolerance of `1e-12` so that
//! outcomes which tie mathematically are not split by rounding noise; the
//! tie rule changes the supports, so it is fixed here rather than left to
//! callers.
//!
//! [`TwoSided::Doubling`] selects the alternative `min(1, 2 min(P(X <= a),
//! P(X >= a)))`.

mod binomial;
mod fisher;
pub mod ingest;
mod negbin;

use serde::{Deserialize, Serialize};

pub use binomial::{binomial_null, binomial_test, binomial_test_with};
pub use fisher::{fisher_null, fisher_test, fisher_test_with};
pub use negbin::{nb_exact_test, nb_exact_test_with, nb_null};
pub(crate) use negbin::ln_nb_pmf;

use crate::error::{invalid, Result};

/// Relative tolerance used when comparing outcome probabilities for ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// How the two tails of a discrete null are combined into one p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoSided {
    /// Sum of the probabilities of all outcomes no more likely than the observed one.
    #[default]
    MinLikelihood,
    /// Twice the smaller tail probability, capped at one.
    Doubling,
}

impl std::str::FromStr for TwoSided {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-likelihood" | "minlike" => Ok(TwoSided::MinLikelihood),
            "doubling" => Ok(TwoSided::Doubling),
            other => Err(invalid(format!(
                "unknown two-sided convention {other:?} (expected min-likelihood or doubling)"
            ))),
        }
    }
}

/// Outcome of an exact test: the observed p-value and the attainable null p-values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub pvalue: f64,
    /// Strictly increasing, deduplicated, last element exactly `1.0`.
    pub support: Vec<f64>,
}

impl TestResult {
    /// Result of a test whose conditional null has a single outcome.
    pub fn degenerate() -> Self {
        TestResult {
            pvalue: 1.0,
            support: vec![1.0],
        }
    }
}

/// The kinds of exact test exposed by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    /// Conditional binomial test for two Poisson counts.
    Bin,
    /// Fisher's exact test for two binomial counts.
    Fet,
    /// Exact negative binomial test for two groups of replicated counts.
    Ent,
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [TestKind::Bin, TestKind::Fet, TestKind::Ent];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Bin => "bin",
            TestKind::Fet => "fet",
            TestKind::Ent => "ent",
        }
    }
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TestKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bin" => Ok(TestKind::Bin),
            "fet" => Ok(TestKind::Fet),
            "ent" => Ok(TestKind::Ent),
            other => Err(invalid(format!(
                "unknown test kind {other:?} (expected one of bin, fet, ent)"
            ))),
        }
    }
}

/// Two-sided p-values of every outcome of a finite discrete law.
///
/// `pmf` need not be normalized. The returned vector is indexed like `pmf`.
pub fn outcome_pvalues(pmf: &[f64], convention: TwoSided) -> Vec<f64> {
    let total: f64 = pmf.iter().sum();
    let probs: Vec<f64> = pmf.iter().map(|&p| p / total).collect();
    match convention {
        TwoSided::MinLikelihood => min_likelihood_pvalues(&probs),
        TwoSided::Doubling => doubling_pvalues(&probs),
    }
}

fn min_likelihood_pvalues(probs: &[f64]) -> Vec<f64> {
    let n = probs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));

    let mut prefix = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &i in &order {
        acc += probs[i];
        prefix.push(acc);
    }

    let mut out = vec![0.0; n];
    let mut last = 0;
    for (k, &i) in order.iter().enumerate() {
        let cutoff = probs[i] * (1.0 + TIE_TOLERANCE);
        last = last.max(k);
        while last + 1 < n && probs[order[last + 1]] <= cutoff {
            last += 1;
        }
        out[i] = if last + 1 == n {
            1.0
        } else {
            prefix[last].min(1.0)
        };
    }
    floor_underflow(&mut out);
    out
}

fn doubling_pvalues(probs: &[f64]) -> Vec<f64> {
    let n = probs.len();
    let mut lower = vec![0.0; n];
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        lower[i] = acc;
    }
    let mut upper = vec![0.0; n];
    acc = 0.0;
    for (i, &p) in probs.iter().enumerate().rev() {
        acc += p;
        upper[i] = acc;
    }
    let mut out: Vec<f64> = (0..n)
        .map(|i| (2.0 * lower[i].min(upper[i])).min(1.0))
        .collect();
    merge_near_ties(&mut out);
    floor_underflow(&mut out);
    out
}

// Tail sums taken from opposite ends differ in the last bits; values within
// the tie tolerance of each other (or of 1) are made equal.
fn merge_near_ties(values: &mut [f64]) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut anchor = f64::NAN;
    for &i in &order {
        if values[i] <= anchor * (1.0 + TIE_TOLERANCE) {
            values[i] = anchor;
        } else {
            anchor = values[i];
        }
    }
    for v in values.iter_mut() {
        if *v >= 1.0 - TIE_TOLERANCE {
            *v = 1.0;
        }
    }
}

// Outcomes whose probability underflows still need a p-value in (0, 1].
fn floor_underflow(values: &mut [f64]) {
    for v in values {
        if *v <= 0.0 {
            *v = f64::MIN_POSITIVE;
        }
    }
}

/// Sorted distinct values of `pvalues`, guaranteed to end at `1.0`.
pub fn support_of(pvalues: &[f64]) -> Vec<f64> {
    let mut support = pvalues.to_vec();
    support.sort_by(f64::total_cmp);
    support.dedup();
    if support.last() != Some(&1.0) {
        support.push(1.0);
    }
    support
}

/// A conditional null law over the outcomes `offset ..= offset + len - 1`,
/// with the null probability and two-sided p-value of each outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct NullLaw {
    pub offset: u64,
    pub probs: Vec<f64>,
    pub pvalues: Vec<f64>,
}

impl NullLaw {
    pub(crate) fn degenerate(offset: u64) -> Self {
        NullLaw {
            offset,
            probs: vec![1.0],
            pvalues: vec![1.0],
        }
    }

    pub(crate) fn from_log_pmf(offset: u64, log_pmf: &[f64], convention: TwoSided) -> Self {
        if log_pmf.len() <= 1 {
            return Self::degenerate(offset);
        }
        let weights = exp_normalized(log_pmf);
        let total: f64 = weights.iter().sum();
        NullLaw {
            offset,
            probs: weights.iter().map(|w| w / total).collect(),
            pvalues: outcome_pvalues(&weights, convention),
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// P-value of `outcome`, or `None` if it lies outside the law's range.
    pub fn pvalue(&self, outcome: u64) -> Option<f64> {
        let i = outcome.checked_sub(self.offset)?;
        self.pvalues.get(i as usize).copied()
    }

    pub fn support(&self) -> Vec<f64> {
        support_of(&self.pvalues)
    }

    /// Test result for an observed outcome. Panics if `outcome` is out of range.
    pub fn result(&self, outcome: u64) -> TestResult {
        TestResult {
            pvalue: self.pvalue(outcome).expect("outcome outside the null law"),
            support: self.support(),
        }
    }
}

/// `ln C(n, k)`.
pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    statrs::function::factorial::ln_binomial(n, k)
}

/// Exponentiates log-weights after shifting by their maximum.
pub(crate) fn exp_normalized(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    log_weights.iter().map(|&w| (w - max).exp()).collect()
}

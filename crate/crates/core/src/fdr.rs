//! Rejection processes, FDR estimators and their thresholds.
//!
//! For a one-step procedure rejecting `{i : p_i <= t}`, `R(t)` counts the
//! rejections. Every estimator here has the form
//! `c * t / (m^-1 (R(t) v 1))`, optionally capped at one, so on each interval
//! between consecutive distinct p-values it is linear and increasing in `t`.
//! [`threshold`] exploits this to compute `t_alpha(f) = sup{t : f(t) <= alpha}`
//! exactly by scanning intervals from the right, instead of searching a grid.
//!
//! The scaled inverse rejection process `L(t) = t / (R(t) v 1)` is continuous
//! except at the distinct p-values, where it can only jump down. That is why
//! the sup is always attained and, for the capped Storey-type estimators,
//! the estimator equals `alpha` exactly at its threshold whenever
//! `pi0 > alpha` and at least one hypothesis is rejected.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::estimators::{
    generalized_pi0, storey_offset_pi0, storey_pi0, Epsilon, Pi0Estimate, Study,
};

/// The step function `R(t) = #{i : p_i <= t}`, stored by distinct value.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionProcess {
    pvalues: Vec<f64>,
    distinct: Vec<f64>,
    mult: Vec<usize>,
    cum: Vec<usize>,
}

impl RejectionProcess {
    pub fn new(pvalues: &[f64]) -> Result<Self> {
        if pvalues.is_empty() {
            return Err(crate::Error::EmptyStudy);
        }
        if let Some(bad) = pvalues.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(invalid(format!("p-value {bad} outside (0, 1]")));
        }
        let mut sorted = pvalues.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct: Vec<f64> = Vec::new();
        let mut mult: Vec<usize> = Vec::new();
        for p in sorted {
            if distinct.last() == Some(&p) {
                *mult.last_mut().unwrap() += 1;
            } else {
                distinct.push(p);
                mult.push(1);
            }
        }
        let cum = mult
            .iter()
            .scan(0, |acc, &n| {
                *acc += n;
                Some(*acc)
            })
            .collect();
        Ok(RejectionProcess {
            pvalues: pvalues.to_vec(),
            distinct,
            mult,
            cum,
        })
    }

    pub fn from_study(study: &Study) -> Self {
        // Study validates its p-values, so construction cannot fail.
        Self::new(&study.pvalues()).expect("study p-values are valid")
    }

    pub fn m(&self) -> usize {
        self.pvalues.len()
    }

    pub fn pvalues(&self) -> &[f64] {
        &self.pvalues
    }

    /// Distinct p-values `p_(1) < ... < p_(n)`.
    pub fn distinct(&self) -> &[f64] {
        &self.distinct
    }

    /// Multiplicities `n_j` of the distinct p-values.
    pub fn multiplicities(&self) -> &[usize] {
        &self.mult
    }

    /// Running totals `T_j = n_1 + ... + n_j`.
    pub fn cumulative(&self) -> &[usize] {
        &self.cum
    }

    /// `R(t)`.
    pub fn rejections(&self, t: f64) -> usize {
        match self.distinct.partition_point(|&p| p <= t) {
            0 => 0,
            j => self.cum[j - 1],
        }
    }

    /// `L(t)` in its piecewise form: `t` before `p_(1)`, then `t / T_j` on
    /// `[p_(j), p_(j+1))`, and `t / m` from `p_(n)` on.
    pub fn inverse_rejection(&self, t: f64) -> f64 {
        match self.distinct.partition_point(|&p| p <= t) {
            0 => t,
            j => t / self.cum[j - 1] as f64,
        }
    }

    /// `L(p_(j)-)`, the left limit at the `j`-th distinct p-value (0-based).
    pub fn left_limit(&self, j: usize) -> f64 {
        let below = if j == 0 { 1 } else { self.cum[j - 1] };
        self.distinct[j] / below as f64
    }

    /// Size of the downward jump `L(p_(j)-) - L(p_(j))` (0-based `j`).
    ///
    /// For `j >= 1` this is `p n_j / (R (R - n_j))` with `R = R(p_(j))`; at the
    /// first distinct value `R - n_j = 0` and the `R v 1` convention gives
    /// `p (1 - 1 / T_1)`.
    pub fn jump(&self, j: usize) -> f64 {
        let p = self.distinct[j];
        let n = self.mult[j] as f64;
        let r = self.cum[j] as f64;
        if j == 0 {
            p * (1.0 - 1.0 / r)
        } else {
            p * n / (r * (r - n))
        }
    }
}

/// A p-value multiset on which `L` jumps down at a p-value below one.
///
/// Distinct values `(0.1, 0.4, 0.7, 1.0)` with multiplicities `(1, 3, 1, 1)`:
/// the multiplicity at `0.4` exceeds the running total before it.
pub fn counterexample_instance() -> Vec<f64> {
    vec![0.1, 0.4, 0.4, 0.4, 0.7, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdrKind {
    /// `pi0_S t / (m^-1 (R v 1))`.
    Storey,
    /// `pi0~_S t / (m^-1 (R v 1))` for `t <= lambda`, one above, with
    /// `pi0~_S = pi0_S + 1 / ((1 - lambda) m)`.
    StoreyVariant,
    /// `min(1, pi0_G t / (m^-1 (R v 1)))`.
    Generalized,
    /// `min(1, pi0(lambda, sigma) t / (m^-1 (R v 1)))`.
    StoreyTypeSigma,
}

impl FdrKind {
    pub fn name(self) -> &'static str {
        match self {
            FdrKind::Storey => "storey",
            FdrKind::StoreyVariant => "storey_variant",
            FdrKind::Generalized => "generalized",
            FdrKind::StoreyTypeSigma => "storey_type_sigma",
        }
    }

    fn capped(self) -> bool {
        !matches!(self, FdrKind::Storey)
    }
}

/// An FDR estimator of the form `coefficient * t * m / (R(t) v 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdrEstimator {
    pub kind: FdrKind,
    /// Multiplier of `t m / (R v 1)`, i.e. the pi0 estimate actually used.
    pub coefficient: f64,
    pub lambda: f64,
    pub pi0: Option<Pi0Estimate>,
}

impl FdrEstimator {
    /// Estimator with an explicit coefficient.
    pub fn with_coefficient(kind: FdrKind, coefficient: f64, lambda: f64) -> Self {
        FdrEstimator {
            kind,
            coefficient,
            lambda,
            pi0: None,
        }
    }

    /// Storey's estimator, using the clipped `pi0_S(lambda)`.
    pub fn storey(study: &Study, lambda: f64) -> Result<Self> {
        let pi0 = storey_pi0(study, lambda)?;
        Ok(FdrEstimator {
            kind: FdrKind::Storey,
            coefficient: pi0.value,
            lambda,
            pi0: Some(pi0),
        })
    }

    /// Storey's variant. The coefficient `pi0_S + 1/((1 - lambda) m)` is built
    /// from the raw Storey value and is not clipped.
    pub fn storey_variant(study: &Study, lambda: f64) -> Result<Self> {
        let pi0 = storey_pi0(study, lambda)?;
        let coefficient = pi0.raw + 1.0 / ((1.0 - lambda) * study.m() as f64);
        Ok(FdrEstimator {
            kind: FdrKind::StoreyVariant,
            coefficient,
            lambda,
            pi0: Some(pi0),
        })
    }

    /// The generalized estimator built on `pi0_G(lambda, epsilon)`.
    pub fn generalized(study: &Study, lambda: f64, epsilon: impl Into<Epsilon>) -> Result<Self> {
        let pi0 = generalized_pi0(study, lambda, epsilon)?;
        Ok(FdrEstimator {
            kind: FdrKind::Generalized,
            coefficient: pi0.value,
            lambda,
            pi0: Some(pi0),
        })
    }

    /// Storey-type estimator with deterministic offset `sigma`, which must lie
    /// in `[0, #{p_i > lambda}]`.
    pub fn storey_type_sigma(study: &Study, lambda: f64, sigma: f64) -> Result<Self> {
        let pi0 = storey_offset_pi0(study, lambda, sigma)?;
        Ok(FdrEstimator {
            kind: FdrKind::StoreyTypeSigma,
            coefficient: pi0.value,
            lambda,
            pi0: Some(pi0),
        })
    }

    /// Evaluates the estimator at `t`.
    pub fn evaluate(&self, process: &RejectionProcess, t: f64) -> f64 {
        let r = process.rejections(t).max(1) as f64;
        let base = self.coefficient * t * process.m() as f64 / r;
        match self.kind {
            FdrKind::Storey => base,
            FdrKind::StoreyVariant if t > self.lambda => 1.0,
            FdrKind::StoreyVariant => base,
            FdrKind::Generalized | FdrKind::StoreyTypeSigma => base.min(1.0),
        }
    }
}

/// Free function form of [`FdrEstimator::evaluate`].
pub fn evaluate_fdr(est: &FdrEstimator, process: &RejectionProcess, t: f64) -> f64 {
    est.evaluate(process, t)
}

/// Threshold of a one-step procedure and what it rejects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Epsilon>,
    pub pi0: f64,
    pub alpha: f64,
    pub t_alpha: f64,
    /// Estimated FDR at the threshold; `None` for the BH procedures.
    pub fdr_at_t: Option<f64>,
    pub rejections: usize,
    /// Indices `i` with `p_i <= t_alpha`.
    #[serde(skip)]
    pub rejected: Vec<usize>,
}

fn rejected_set(pvalues: &[f64], t: f64) -> Vec<usize> {
    pvalues
        .iter()
        .enumerate()
        .filter(|(_, &p)| p <= t)
        .map(|(i, _)| i)
        .collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(invalid(format!("alpha {alpha} outside [0, 1]")))
    }
}

/// `t_alpha(f) = sup{t in [0, 1] : f(t) <= alpha}`, computed exactly.
pub fn threshold(est: &FdrEstimator, process: &RejectionProcess, alpha: f64) -> Result<ThresholdResult> {
    check_alpha(alpha)?;
    let t = solve_threshold(est, process, alpha);
    let rejected = rejected_set(process.pvalues(), t);
    Ok(ThresholdResult {
        method: est.kind.name().to_string(),
        lambda: Some(est.lambda),
        epsilon: est.pi0.as_ref().and_then(|p| p.epsilon.clone()),
        pi0: est.pi0.as_ref().map_or(est.coefficient, |p| p.value),
        alpha,
        t_alpha: t,
        fdr_at_t: Some(est.evaluate(process, t)),
        rejections: rejected.len(),
        rejected,
    })
}

fn solve_threshold(est: &FdrEstimator, process: &RejectionProcess, alpha: f64) -> f64 {
    if alpha >= 1.0 && est.kind.capped() {
        return 1.0;
    }
    let upper = match est.kind {
        FdrKind::StoreyVariant => est.lambda,
        _ => 1.0,
    };
    let c = est.coefficient * process.m() as f64;
    if c <= 0.0 {
        return upper;
    }

    // Intervals [0, p_(1)), [p_(1), p_(2)), ..., [p_(k), upper], where k is
    // the number of distinct p-values not above `upper`. On each, R is
    // constant and the estimator is c t / (R v 1).
    let distinct = process.distinct();
    let cum = process.cumulative();
    let k = distinct.partition_point(|&p| p <= upper);
    for idx in (0..=k).rev() {
        let (start, r) = if idx == 0 {
            (0.0, 1)
        } else {
            (distinct[idx - 1], cum[idx - 1])
        };
        let end = if idx < k { distinct[idx] } else { upper };
        let crossing = alpha * r as f64 / c;
        if crossing >= start {
            let mut t = crossing.min(end);
            // Rounding in `crossing` can leave f(t) an ulp above alpha.
            while t > start && est.evaluate(process, t) > alpha {
                t = t.next_down();
            }
            return t;
        }
    }
    unreachable!("the first interval always contains a feasible point")
}

/// Benjamini-Hochberg step-up: reject `p <= p_(k*)`, `k* = max{k : p_(k) <= k alpha / m}`.
pub fn bh_procedure(pvalues: &[f64], alpha: f64) -> Result<ThresholdResult> {
    check_alpha(alpha)?;
    let mut result = bh_at_level(pvalues, alpha)?;
    result.alpha = alpha;
    Ok(result)
}

fn bh_at_level(pvalues: &[f64], level: f64) -> Result<ThresholdResult> {
    if pvalues.is_empty() {
        return Err(crate::Error::EmptyStudy);
    }
    let m = pvalues.len() as f64;
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let t = sorted
        .iter()
        .enumerate()
        .rev()
        .find(|&(k, &p)| p <= (k + 1) as f64 * level / m)
        .map_or(0.0, |(_, &p)| p);
    let rejected = rejected_set(pvalues, t);
    Ok(ThresholdResult {
        method: "bh".to_string(),
        lambda: None,
        epsilon: None,
        pi0: 1.0,
        alpha: level,
        t_alpha: t,
        fdr_at_t: None,
        rejections: rejected.len(),
        rejected,
    })
}

/// BH at level `min(1, alpha / pi0)`.
pub fn adaptive_bh(pvalues: &[f64], alpha: f64, pi0: &Pi0Estimate) -> Result<ThresholdResult> {
    check_alpha(alpha)?;
    if pi0.value <= 0.0 {
        return Err(invalid("adaptive BH is undefined for a pi0 estimate of zero"));
    }
    let level = (alpha / pi0.value).min(1.0);
    let mut result = bh_at_level(pvalues, level)?;
    result.method = "adaptive_bh".to_string();
    result.alpha = alpha;
    result.pi0 = pi0.value;
    Ok(result)
}

//! Exact biases of the generalized, Storey and Pounds estimators for fixed
//! scenario parameters.
//!
//! Each hypothesis' test outcome is enumerated under its true model: every
//! conditioning total up to a truncation bound, and every outcome given the
//! total. This gives, per hypothesis, `F_i(lambda) = P(p_i <= lambda)`, the
//! expected support point `E[t_{i,lambda}]` and `E[p_i]`. With these,
//!
//! ```text
//! b_G(eps) = (1 - eps lambda)/(1 - lambda)
//!            - sum_i (F_i(lambda) - eps E[t_{i,lambda}]) / ((1 - lambda) m) - pi0
//! b_P      = (2/m) sum_{nulls} (E[p_i] - 1/2) + (2/m) sum_{non-nulls} E[p_i]
//! ```
//!
//! are the biases of the unclipped `pi0_G(lambda, eps)` and `2 mean(p)`.
//! Storey's bias is `b_G(0)`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::generate::{HypothesisModel, ScenarioParams};
use super::scenario::ScenarioSpec;
use crate::error::{invalid, Error, Result};
use crate::exact::{binomial_null, fisher_null, nb_null, NullLaw, TwoSided};

/// Largest probability mass allowed to fall beyond the truncation bound.
pub const MAX_MASS_DEFICIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasDecomposition {
    pub lambda: f64,
    pub epsilon: f64,
    pub truncation: u64,
    pub m: usize,
    pub m0: usize,
    pub pi0: f64,
    /// `sum_i F_i(lambda)`.
    pub sum_cdf: f64,
    /// `sum_i E[t_{i,lambda}]`.
    pub sum_support_point: f64,
    /// `(2/m) sum_{nulls} (E[p_i] - 1/2)`.
    pub b_pounds_null: f64,
    /// `(2/m) sum_{non-nulls} E[p_i]`.
    pub b_pounds_alt: f64,
    pub b_pounds: f64,
    /// `b_G(epsilon)`.
    pub b_generalized: f64,
    /// `b_G(1)`.
    pub b_generalized_one: f64,
    /// `b_G(0)`, the bias of Storey's estimator.
    pub b_storey: f64,
    /// `0 <= b_G(1) <= b_P`: the generalized estimator is conservative and no
    /// more biased than Storey's or Pounds'.
    pub condition_holds: bool,
    /// Largest unenumerated mass over hypotheses.
    pub mass_deficit: f64,
}

/// `b_G(eps)` from the summed moments.
pub fn generalized_bias(lambda: f64, epsilon: f64, sum_cdf: f64, sum_support_point: f64, m: usize, pi0: f64) -> f64 {
    let scale = (1.0 - lambda) * m as f64;
    (1.0 - epsilon * lambda) / (1.0 - lambda) - (sum_cdf - epsilon * sum_support_point) / scale - pi0
}

/// The two summands of `b_P` from per-hypothesis null and non-null means of `p`.
pub fn pounds_bias(null_means: &[f64], alt_means: &[f64]) -> (f64, f64) {
    let m = (null_means.len() + alt_means.len()) as f64;
    let null = 2.0 / m * null_means.iter().map(|e| e - 0.5).sum::<f64>();
    let alt = 2.0 / m * alt_means.iter().sum::<f64>();
    (null, alt)
}

/// Per-hypothesis moments from the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HypothesisMoments {
    /// `P(p <= lambda)`.
    pub cdf: f64,
    /// `E[t_lambda]`, the expected largest support point at or below `lambda`.
    pub support_point: f64,
    pub mean_p: f64,
    /// Enumerated probability mass.
    pub mass: f64,
}

impl HypothesisMoments {
    fn add(&mut self, prob: f64, p: f64, t: f64, lambda: f64) {
        if p <= lambda {
            self.cdf += prob;
        }
        self.support_point += prob * t;
        self.mean_p += prob * p;
        self.mass += prob;
    }
}

fn support_point(law: &NullLaw, lambda: f64) -> f64 {
    law.pvalues
        .iter()
        .copied()
        .filter(|&p| p <= lambda)
        .fold(0.0, f64::max)
}

fn ln_poisson(k: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * mean.ln() - mean - ln_gamma(k as f64 + 1.0)
}

fn ln_binom_pmf(k: u64, n: u64, p: f64) -> f64 {
    let choose = statrs::function::factorial::ln_binomial(n, k);
    let term = |count: u64, q: f64| if count == 0 { 0.0 } else { count as f64 * q.ln() };
    choose + term(k, p) + term(n - k, 1.0 - p)
}

/// Null laws keyed by the conditioning total (and trials, for Fisher).
struct LawCache {
    laws: HashMap<(u64, u64), (NullLaw, f64)>,
}

impl LawCache {
    fn get(&self, trials: u64, s: u64) -> &(NullLaw, f64) {
        &self.laws[&(trials, s)]
    }
}

fn build_cache(params: &ScenarioParams, lambda: f64, truncation: u64, conv: TwoSided) -> Result<LawCache> {
    let mut keys: Vec<(u64, u64)> = Vec::new();
    let mut trials: Vec<u64> = params
        .hypotheses
        .iter()
        .filter_map(|h| match h {
            HypothesisModel::Binomial { trials, .. } => Some(*trials),
            _ => None,
        })
        .collect();
    trials.sort_unstable();
    trials.dedup();
    if trials.is_empty() {
        keys.extend((0..=truncation).map(|s| (0, s)));
    } else {
        for r in trials {
            keys.extend((0..=(2 * r).min(truncation)).map(|s| (r, s)));
        }
    }
    let laws = keys
        .into_par_iter()
        .map(|(r, s)| {
            let law = match params.kind {
                super::ScenarioKind::PoissonBin => binomial_null(s, conv),
                super::ScenarioKind::BinomialFet => fisher_null(r, r, s, conv)?,
                super::ScenarioKind::NegbinomEnt => nb_null(s, params.nb_size, params.nb_samples, conv)?,
            };
            let t = support_point(&law, lambda);
            Ok(((r, s), (law, t)))
        })
        .collect::<Result<HashMap<_, _>>>()?;
    Ok(LawCache { laws })
}

fn moments_of(
    model: &HypothesisModel,
    params: &ScenarioParams,
    cache: &LawCache,
    lambda: f64,
    truncation: u64,
) -> HypothesisMoments {
    let mut acc = HypothesisMoments::default();
    match *model {
        HypothesisModel::Poisson { theta1, theta2 } => {
            let total = theta1 + theta2;
            let q = theta1 / total;
            for s in 0..=truncation {
                let ln_s = ln_poisson(s, total);
                let (law, t) = cache.get(0, s);
                for a in 0..=s {
                    let prob = (ln_s + ln_binom_pmf(a, s, q)).exp();
                    acc.add(prob, law.pvalues[a as usize], *t, lambda);
                }
            }
        }
        HypothesisModel::Binomial { trials, theta1, theta2 } => {
            let r = trials;
            let p1: Vec<f64> = (0..=r).map(|a| ln_binom_pmf(a, r, theta1)).collect();
            let p2: Vec<f64> = (0..=r).map(|b| ln_binom_pmf(b, r, theta2)).collect();
            for s in 0..=(2 * r).min(truncation) {
                let (law, t) = cache.get(r, s);
                for a in s.saturating_sub(r)..=s.min(r) {
                    let prob = (p1[a as usize] + p2[(s - a) as usize]).exp();
                    acc.add(prob, law.pvalue(a).expect("outcome in range"), *t, lambda);
                }
            }
        }
        HypothesisModel::NegBinom { mean1, mean2 } => {
            let k = params.nb_samples as f64;
            let shape = k * params.nb_size;
            let g1: Vec<f64> = (0..=truncation)
                .map(|a| crate::exact::ln_nb_pmf(a, shape, k * mean1))
                .collect();
            let g2: Vec<f64> = (0..=truncation)
                .map(|b| crate::exact::ln_nb_pmf(b, shape, k * mean2))
                .collect();
            for s in 0..=truncation {
                let (law, t) = cache.get(0, s);
                for a in 0..=s {
                    let prob = (g1[a as usize] + g2[(s - a) as usize]).exp();
                    acc.add(prob, law.pvalues[a as usize], *t, lambda);
                }
            }
        }
    }
    acc
}

/// Exact per-hypothesis moments for fixed parameters.
pub fn hypothesis_moments(params: &ScenarioParams, lambda: f64, truncation: u64) -> Result<Vec<HypothesisMoments>> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(invalid(format!("lambda {lambda} outside [0, 1)")));
    }
    let cache = build_cache(params, lambda, truncation, params.convention)?;
    Ok(params
        .hypotheses
        .par_iter()
        .map(|h| moments_of(h, params, &cache, lambda, truncation))
        .collect())
}

/// Bias decomposition for the parameters of replication 0 of `spec`.
pub fn bias_decomposition(spec: &ScenarioSpec, lambda: f64, epsilon: f64, truncation: u64) -> Result<BiasDecomposition> {
    let params = ScenarioParams::draw(spec, 0)?;
    bias_decomposition_for(&params, lambda, epsilon, truncation)
}

pub fn bias_decomposition_for(
    params: &ScenarioParams,
    lambda: f64,
    epsilon: f64,
    truncation: u64,
) -> Result<BiasDecomposition> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(invalid(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let moments = hypothesis_moments(params, lambda, truncation)?;
    let deficit = moments.iter().map(|h| 1.0 - h.mass).fold(0.0, f64::max);
    if deficit > MAX_MASS_DEFICIT {
        return Err(Error::Truncation { deficit, truncation });
    }
    let m = params.m();
    let m0 = params.truth.iter().filter(|&&t| t).count();
    let pi0 = m0 as f64 / m as f64;
    let sum_cdf: f64 = moments.iter().map(|h| h.cdf).sum();
    let sum_support_point: f64 = moments.iter().map(|h| h.support_point).sum();
    let (nulls, alts): (Vec<_>, Vec<_>) = moments.iter().zip(&params.truth).partition(|(_, &t)| t);
    let null_means: Vec<f64> = nulls.iter().map(|(h, _)| h.mean_p).collect();
    let alt_means: Vec<f64> = alts.iter().map(|(h, _)| h.mean_p).collect();
    let (b_pounds_null, b_pounds_alt) = pounds_bias(&null_means, &alt_means);
    let b_pounds = b_pounds_null + b_pounds_alt;
    let bias = |eps| generalized_bias(lambda, eps, sum_cdf, sum_support_point, m, pi0);
    let b_generalized_one = bias(1.0);
    Ok(BiasDecomposition {
        lambda,
        epsilon,
        truncation,
        m,
        m0,
        pi0,
        sum_cdf,
        sum_support_point,
        b_pounds_null,
        b_pounds_alt,
        b_pounds,
        b_generalized: bias(epsilon),
        b_generalized_one,
        b_storey: bias(0.0),
        condition_holds: 0.0 <= b_generalized_one && b_generalized_one <= b_pounds,
        mass_deficit: deficit,
    })
}

//! Estimators of the proportion of true null hypotheses.
//!
//! A [`PValueProfile`] pairs an observed p-value with the support of its
//! discrete null distribution `F*`. Because a valid discrete null satisfies
//! `F*(t) = t` on its support and is a right-continuous step function,
//! `F*(lambda)` is the largest support point not above `lambda`
//! ([`PValueProfile::null_cdf`]). The generalized estimator subtracts the
//! resulting gap `lambda - F*(lambda)` from Storey's count, removing the
//! upward bias that discreteness adds to every estimator built for uniform
//! nulls.
//!
//! All estimators report both the raw value and the value clipped to `[0, 1]`.

use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::exact::TestResult;

/// An observed p-value and the support of its null distribution.
///
/// An empty support stands for a continuous uniform null.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct PValueProfile {
    pub pvalue: f64,
    pub support: Vec<f64>,
}

impl PValueProfile {
    pub fn new(pvalue: f64, support: Vec<f64>) -> Result<Self> {
        let profile = PValueProfile { pvalue, support };
        profile.validate()?;
        Ok(profile)
    }

    /// A p-value whose null distribution is uniform on `(0, 1)`.
    pub fn uniform(pvalue: f64) -> Self {
        PValueProfile {
            pvalue,
            support: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.pvalue > 0.0 && self.pvalue <= 1.0) {
            return Err(invalid(format!("p-value {} outside (0, 1]", self.pvalue)));
        }
        if self.support.is_empty() {
            return Ok(());
        }
        if self.support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("support must be strictly increasing"));
        }
        if self.support[0] <= 0.0 || *self.support.last().unwrap() > 1.0 {
            return Err(invalid("support must lie in (0, 1]"));
        }
        if self.support.binary_search_by(|s| s.total_cmp(&self.pvalue)).is_err() {
            return Err(invalid(format!(
                "p-value {} is not a point of its support",
                self.pvalue
            )));
        }
        Ok(())
    }

    /// `F*(lambda)`: the largest support point `<= lambda`, or `0` if there is none.
    ///
    /// With an empty support the null is uniform and this is `lambda` itself.
    pub fn null_cdf(&self, lambda: f64) -> f64 {
        if self.support.is_empty() {
            return lambda;
        }
        let idx = self.support.partition_point(|&s| s <= lambda);
        if idx == 0 {
            0.0
        } else {
            self.support[idx - 1]
        }
    }

    /// `E[p | H0]` under the discrete null, `sum_k t_k (t_k - t_{k-1})` with `t_0 = 0`.
    pub fn null_mean(&self) -> f64 {
        if self.support.is_empty() {
            return 0.5;
        }
        let mut prev = 0.0;
        let mut mean = 0.0;
        for &t in &self.support {
            mean += t * (t - prev);
            prev = t;
        }
        mean
    }
}

/// Free function form of [`PValueProfile::null_cdf`].
pub fn support_cdf(profile: &PValueProfile, lambda: f64) -> f64 {
    profile.null_cdf(lambda)
}

impl From<TestResult> for PValueProfile {
    fn from(r: TestResult) -> Self {
        PValueProfile {
            pvalue: r.pvalue,
            support: r.support,
        }
    }
}

/// The m hypotheses under study, optionally with ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    profiles: Vec<PValueProfile>,
    /// `truth[i]` is `true` when hypothesis `i` is a true null.
    truth: Option<Vec<bool>>,
}

impl Study {
    pub fn new(profiles: Vec<PValueProfile>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(crate::Error::EmptyStudy);
        }
        for (i, p) in profiles.iter().enumerate() {
            p.validate()
                .map_err(|e| invalid(format!("hypothesis {i}: {e}")))?;
        }
        Ok(Study {
            profiles,
            truth: None,
        })
    }

    /// A study of continuous p-values with uniform nulls.
    pub fn from_pvalues(pvalues: &[f64]) -> Result<Self> {
        Study::new(pvalues.iter().map(|&p| PValueProfile::uniform(p)).collect())
    }

    pub fn with_truth(mut self, truth: Vec<bool>) -> Result<Self> {
        if truth.len() != self.profiles.len() {
            return Err(invalid(format!(
                "{} truth labels for {} hypotheses",
                truth.len(),
                self.profiles.len()
            )));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.profiles.len()
    }

    pub fn profiles(&self) -> &[PValueProfile] {
        &self.profiles
    }

    pub fn truth(&self) -> Option<&[bool]> {
        self.truth.as_deref()
    }

    pub fn pvalues(&self) -> Vec<f64> {
        self.profiles.iter().map(|p| p.pvalue).collect()
    }

    /// Number of true nulls, when truth is known.
    pub fn true_nulls(&self) -> Option<usize> {
        self.truth.as_ref().map(|t| t.iter().filter(|&&b| b).count())
    }
}

/// Per-hypothesis weights on the discreteness correction.
#[derive(Debug, Clone, PartialEq)]
pub enum Epsilon {
    Constant(f64),
    PerHypothesis(Vec<f64>),
}

impl Epsilon {
    fn weight(&self, i: usize) -> f64 {
        match self {
            Epsilon::Constant(e) => *e,
            Epsilon::PerHypothesis(w) => w[i],
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        let ok = |e: f64| (0.0..=1.0).contains(&e);
        match self {
            Epsilon::Constant(e) if !ok(*e) => Err(invalid(format!("epsilon {e} outside [0, 1]"))),
            Epsilon::PerHypothesis(w) if w.len() != m => Err(invalid(format!(
                "{} epsilon weights for {m} hypotheses",
                w.len()
            ))),
            Epsilon::PerHypothesis(w) => match w.iter().position(|&e| !ok(e)) {
                Some(i) => Err(invalid(format!("epsilon[{i}] = {} outside [0, 1]", w[i]))),
                None => Ok(()),
            },
            Epsilon::Constant(_) => Ok(()),
        }
    }
}

impl From<f64> for Epsilon {
    fn from(e: f64) -> Self {
        Epsilon::Constant(e)
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Summary {
            len: usize,
            mean: f64,
            min: f64,
            max: f64,
        }
        match self {
            Epsilon::Constant(e) => s.serialize_f64(*e),
            Epsilon::PerHypothesis(w) => Summary {
                len: w.len(),
                mean: w.iter().sum::<f64>() / w.len().max(1) as f64,
                min: w.iter().copied().fold(f64::INFINITY, f64::min),
                max: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
            .serialize(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pi0Method {
    /// Storey's tail-count estimator.
    Storey,
    /// Storey's estimator minus the discreteness correction.
    Generalized,
    /// Storey's estimator minus a fixed offset.
    StoreyOffset,
    /// `min(1, 2 * mean p)`.
    PoundsTilde,
    /// `min(1, mean of p / E[p | H0])`.
    PoundsHat,
    /// Median-based estimator used by the adaptive BH procedure.
    Benjamini,
}

impl Pi0Method {
    pub fn name(self) -> &'static str {
        match self {
            Pi0Method::Storey => "storey",
            Pi0Method::Generalized => "generalized",
            Pi0Method::StoreyOffset => "storey_offset",
            Pi0Method::PoundsTilde => "pounds_tilde",
            Pi0Method::PoundsHat => "pounds_hat",
            Pi0Method::Benjamini => "benjamini",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pi0Estimate {
    pub method: Pi0Method,
    pub raw: f64,
    /// `raw` clipped to `[0, 1]`.
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Epsilon>,
}

impl Pi0Estimate {
    fn new(method: Pi0Method, raw: f64) -> Self {
        Pi0Estimate {
            method,
            raw,
            value: clip01(raw),
            lambda: None,
            epsilon: None,
        }
    }
}

fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(invalid(format!("lambda {lambda} outside [0, 1)")))
    }
}

fn tail_count(study: &Study, lambda: f64) -> usize {
    study.profiles.iter().filter(|p| p.pvalue > lambda).count()
}

/// Storey's estimator `#{p_i > lambda} / ((1 - lambda) m)`.
pub fn storey_pi0(study: &Study, lambda: f64) -> Result<Pi0Estimate> {
    check_lambda(lambda)?;
    let count = tail_count(study, lambda) as f64;
    let raw = count / ((1.0 - lambda) * study.m() as f64);
    let mut est = Pi0Estimate::new(Pi0Method::Storey, raw);
    est.lambda = Some(lambda);
    Ok(est)
}

/// `delta(lambda, eps) = sum_i eps_i (lambda - F*_i(lambda))`.
pub fn discreteness_gap(study: &Study, lambda: f64, epsilon: &Epsilon) -> f64 {
    study
        .profiles
        .iter()
        .enumerate()
        .map(|(i, p)| epsilon.weight(i) * (lambda - p.null_cdf(lambda)))
        .sum()
}

/// The generalized estimator
/// `sum_i [1{p_i > lambda} - eps_i (lambda - F*_i(lambda))] / ((1 - lambda) m)`.
///
/// With `eps = 0`, or when every null is uniform, this is exactly
/// [`storey_pi0`].
pub fn generalized_pi0(
    study: &Study,
    lambda: f64,
    epsilon: impl Into<Epsilon>,
) -> Result<Pi0Estimate> {
    check_lambda(lambda)?;
    let epsilon = epsilon.into();
    epsilon.validate(study.m())?;
    let count = tail_count(study, lambda) as f64;
    let gap = discreteness_gap(study, lambda, &epsilon);
    let raw = (count - gap) / ((1.0 - lambda) * study.m() as f64);
    let mut est = Pi0Estimate::new(Pi0Method::Generalized, raw);
    est.lambda = Some(lambda);
    est.epsilon = Some(epsilon);
    Ok(est)
}

/// Storey's estimator minus a deterministic offset:
/// `(#{p_i > lambda} - offset) / ((1 - lambda) m)`.
pub fn storey_offset_pi0(study: &Study, lambda: f64, offset: f64) -> Result<Pi0Estimate> {
    check_lambda(lambda)?;
    let count = tail_count(study, lambda) as f64;
    if !(0.0..=count).contains(&offset) {
        return Err(invalid(format!(
            "offset {offset} outside [0, {count}] for lambda {lambda}"
        )));
    }
    let raw = (count - offset) / ((1.0 - lambda) * study.m() as f64);
    let mut est = Pi0Estimate::new(Pi0Method::StoreyOffset, raw);
    est.lambda = Some(lambda);
    Ok(est)
}

/// `min(1, 2 * mean(p))`, for two-sided p-values.
pub fn pounds_tilde_pi0(study: &Study) -> Pi0Estimate {
    let mean = study.profiles.iter().map(|p| p.pvalue).sum::<f64>() / study.m() as f64;
    Pi0Estimate::new(Pi0Method::PoundsTilde, 2.0 * mean)
}

/// `min(1, mean_i p_i / E[p_i | H0])`.
pub fn pounds_hat_pi0(study: &Study) -> Pi0Estimate {
    let mean = study
        .profiles
        .iter()
        .map(|p| p.pvalue / p.null_mean())
        .sum::<f64>()
        / study.m() as f64;
    Pi0Estimate::new(Pi0Method::PoundsHat, mean)
}

/// `(m - k + 1) / (m (1 - p_(k)))` with `k = floor(m / 2)`.
///
/// Returns `1` when `p_(k) = 1`.
pub fn benjamini_pi0(study: &Study) -> Result<Pi0Estimate> {
    let m = study.m();
    if m < 2 {
        return Err(invalid("the median-based estimator needs at least two p-values"));
    }
    let k = m / 2;
    let mut p = study.pvalues();
    let (_, kth, _) = p.select_nth_unstable_by(k - 1, f64::total_cmp);
    let kth = *kth;
    let raw = if kth >= 1.0 {
        1.0
    } else {
        (m - k + 1) as f64 / (m as f64 * (1.0 - kth))
    };
    Ok(Pi0Estimate::new(Pi0Method::Benjamini, raw))
}

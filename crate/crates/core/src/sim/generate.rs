//! Parameter and count generation for the three scenarios.
//!
//! # Random streams
//!
//! All draws come from ChaCha20 seeded with the scenario's `seed`.
//! Replication `r` uses stream `2r` for the scenario parameters (means,
//! effect sizes, trial counts) and stream `2r + 1` for the observed counts.
//! A replication is therefore fixed by `(seed, r)` alone, and its parameters
//! do not depend on how many counts are drawn afterwards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution, Gamma, Pareto, Poisson, Uniform};
use serde::Serialize;

use super::scenario::{AltProbability, ScenarioKind, ScenarioSpec};
use crate::error::{invalid, Result};
use crate::estimators::{PValueProfile, Study};
use crate::exact::{binomial_test_with, fisher_test_with, nb_exact_test_with, TwoSided};

/// Stream for replication `rep`; `counts` selects the count substream.
pub fn replication_rng(seed: u64, rep: usize, counts: bool) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2 * rep as u64 + counts as u64);
    rng
}

/// True parameters of one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum HypothesisModel {
    /// Two Poisson counts with means `theta1`, `theta2`.
    Poisson { theta1: f64, theta2: f64 },
    /// Two binomial counts on `trials` trials each.
    Binomial { trials: u64, theta1: f64, theta2: f64 },
    /// Two groups of `samples` NB replicates, per-sample means `mean1`, `mean2`.
    NegBinom { mean1: f64, mean2: f64 },
}

/// Fixed parameters of a scenario: everything except the observed counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub kind: ScenarioKind,
    /// `true` marks a true null. The first `m0` hypotheses are the nulls.
    pub truth: Vec<bool>,
    pub hypotheses: Vec<HypothesisModel>,
    /// NB size per sample (`negbinom_ent` only).
    pub nb_size: f64,
    pub nb_samples: u32,
    pub convention: TwoSided,
}

fn uniform(lo: f64, hi: f64) -> Result<Uniform<f64>> {
    Uniform::new_inclusive(lo, hi).map_err(|e| invalid(format!("uniform({lo}, {hi}): {e}")))
}

fn pareto(location: f64, shape: f64) -> Result<Pareto<f64>> {
    Pareto::new(location, shape).map_err(|e| invalid(format!("pareto({location}, {shape}): {e}")))
}

/// One draw from the negative binomial with the given size and mean, as a
/// gamma mixture of Poissons.
pub fn nb_draw<R: Rng + ?Sized>(rng: &mut R, size: f64, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let rate = Gamma::new(size, mean / size).expect("positive size and mean").sample(rng);
    poisson_draw(rng, rate)
}

fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

impl ScenarioParams {
    /// Draws the parameters of replication `rep`.
    pub fn draw(spec: &ScenarioSpec, rep: usize) -> Result<Self> {
        spec.validate()?;
        let mut rng = replication_rng(spec.seed, rep, false);
        let m = spec.m;
        let m0 = spec.m0();
        let truth: Vec<bool> = (0..m).map(|i| i < m0).collect();
        let hypotheses = match spec.kind {
            ScenarioKind::PoissonBin => {
                let p = &spec.poisson;
                let theta: Vec<f64> = pareto(p.theta_location, p.theta_shape)?
                    .sample_iter(&mut rng)
                    .take(m)
                    .collect();
                let rho = uniform(p.rho_low, p.rho_high)?;
                theta
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let theta2 = if i < m0 { t } else { rho.sample(&mut rng) * t };
                        HypothesisModel::Poisson { theta1: t, theta2 }
                    })
                    .collect()
            }
            ScenarioKind::BinomialFet => {
                let b = &spec.binomial;
                let trials: Vec<u64> = (0..m)
                    .map(|_| nb_draw(&mut rng, b.trials_size, b.trials_mean) + b.trials_offset)
                    .collect();
                let theta: Vec<f64> = uniform(b.theta_low, b.theta_high)?
                    .sample_iter(&mut rng)
                    .take(m)
                    .collect();
                let rho = uniform(b.rho_low, b.rho_high)?;
                (0..m)
                    .map(|i| {
                        let t = theta[i];
                        let theta2 = if i < m0 {
                            t
                        } else {
                            let odds = rho.sample(&mut rng) * t / (1.0 - t);
                            match b.alternative {
                                AltProbability::OddsRatio => odds / (1.0 + odds),
                                AltProbability::Capped => odds.min(1.0),
                            }
                        };
                        HypothesisModel::Binomial {
                            trials: trials[i],
                            theta1: t,
                            theta2,
                        }
                    })
                    .collect()
            }
            ScenarioKind::NegbinomEnt => {
                let n = &spec.negbinom;
                let theta: Vec<f64> = match &n.theta_values {
                    Some(values) => (0..m).map(|i| values[i % values.len()]).collect(),
                    None => uniform(n.theta_low, n.theta_high)?
                        .sample_iter(&mut rng)
                        .take(m)
                        .collect(),
                };
                let rho = pareto(n.rho_location, n.rho_shape)?;
                theta
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let mean2 = if i < m0 { t } else { rho.sample(&mut rng) * t };
                        HypothesisModel::NegBinom { mean1: t, mean2 }
                    })
                    .collect()
            }
        };
        Ok(ScenarioParams {
            kind: spec.kind,
            truth,
            hypotheses,
            nb_size: spec.negbinom.size(),
            nb_samples: spec.negbinom.samples_per_group,
            convention: spec.convention,
        })
    }

    pub fn m(&self) -> usize {
        self.hypotheses.len()
    }

    /// Draws one dataset from these parameters and tests every hypothesis.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Study> {
        let conv = self.convention;
        let profiles = self
            .hypotheses
            .iter()
            .map(|h| {
                let result = match *h {
                    HypothesisModel::Poisson { theta1, theta2 } => {
                        let x1 = poisson_draw(rng, theta1);
                        let x2 = poisson_draw(rng, theta2);
                        binomial_test_with(x1, x2, conv)
                    }
                    HypothesisModel::Binomial { trials, theta1, theta2 } => {
                        let x1 = binomial_draw(rng, trials, theta1);
                        let x2 = binomial_draw(rng, trials, theta2);
                        fisher_test_with(x1, trials, x2, trials, conv)?
                    }
                    HypothesisModel::NegBinom { mean1, mean2 } => {
                        let k = self.nb_samples;
                        let s1 = (0..k).map(|_| nb_draw(rng, self.nb_size, mean1)).sum();
                        let s2 = (0..k).map(|_| nb_draw(rng, self.nb_size, mean2)).sum();
                        nb_exact_test_with(s1, s2, self.nb_size, k, conv)?
                    }
                };
                Ok(PValueProfile::from(result))
            })
            .collect::<Result<Vec<_>>>()?;
        Study::new(profiles)?.with_truth(self.truth.clone())
    }
}

fn binomial_draw<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    Binomial::new(n, p.clamp(0.0, 1.0)).expect("probability in [0, 1]").sample(rng)
}

/// The study of replication `rep`, with truth labels.
pub fn generate_scenario(spec: &ScenarioSpec, rep: usize) -> Result<Study> {
    let params = ScenarioParams::draw(spec, rep)?;
    params.simulate(&mut replication_rng(spec.seed, rep, true))
}

//! Replication runner and truth-based summaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::generate_scenario;
use super::scenario::ScenarioSpec;
use crate::error::{invalid, Result};
use crate::estimators::{
    benjamini_pi0, generalized_pi0, pounds_hat_pi0, pounds_tilde_pi0, storey_pi0, Pi0Estimate,
    Pi0Method, Study,
};
use crate::fdr::{adaptive_bh, bh_procedure, threshold, FdrEstimator, RejectionProcess, ThresholdResult};

/// Multiple testing procedures the runner can apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    /// Threshold of the generalized FDR estimator at the scenario's `(lambda, epsilon)`.
    Generalized,
    /// Threshold of Storey's FDR estimator at the scenario's `lambda`.
    Storey,
    /// Threshold of Storey's variant estimator.
    StoreyVariant,
    Bh,
    /// BH at level `alpha / pi0_B`.
    AdaptiveBh,
}

impl Procedure {
    pub fn name(self) -> &'static str {
        match self {
            Procedure::Generalized => "generalized",
            Procedure::Storey => "storey",
            Procedure::StoreyVariant => "storey_variant",
            Procedure::Bh => "bh",
            Procedure::AdaptiveBh => "adaptive_bh",
        }
    }
}

/// The estimators and procedures evaluated in every replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roster {
    pub estimators: Vec<Pi0Method>,
    pub procedures: Vec<Procedure>,
}

impl Default for Roster {
    /// The default comparison: four pi0 estimators and three procedures.
    fn default() -> Self {
        Roster {
            estimators: vec![
                Pi0Method::Generalized,
                Pi0Method::Storey,
                Pi0Method::PoundsTilde,
                Pi0Method::Benjamini,
            ],
            procedures: vec![Procedure::Generalized, Procedure::Storey, Procedure::AdaptiveBh],
        }
    }
}

impl Roster {
    pub fn new(estimators: Vec<Pi0Method>, procedures: Vec<Procedure>) -> Result<Self> {
        if estimators.is_empty() && procedures.is_empty() {
            return Err(invalid("roster is empty"));
        }
        if estimators.contains(&Pi0Method::StoreyOffset) {
            return Err(invalid("storey_offset needs an explicit offset and cannot be simulated"));
        }
        Ok(Roster { estimators, procedures })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub rep: usize,
    pub method: Pi0Method,
    /// Clipped estimate.
    pub estimate: f64,
    /// `estimate - m0 / m`.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcedureRecord {
    pub rep: usize,
    pub procedure: Procedure,
    pub alpha: f64,
    pub pi0: f64,
    pub threshold: f64,
    /// R
    pub rejections: usize,
    /// V, the rejected true nulls.
    pub false_discoveries: usize,
    /// V / R, or 1 when nothing is rejected.
    pub fdp: f64,
}

/// Mean, sample standard deviation and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Zero when `n = 1`.
    pub sd: f64,
    pub se: f64,
}

impl Moments {
    pub fn of(sample: &[f64]) -> Self {
        let n = sample.len();
        if n == 0 {
            return Moments { n, mean: f64::NAN, sd: f64::NAN, se: f64::NAN };
        }
        let mean = sample.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Moments { n, mean, sd, se: sd / (n as f64).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorStats {
    pub method: Pi0Method,
    pub estimate: Moments,
    pub excess: Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcedureStats {
    pub procedure: Procedure,
    pub alpha: f64,
    pub fdp: Moments,
    pub rejections: Moments,
    pub threshold: Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationSummary {
    pub kind: &'static str,
    pub m: usize,
    pub m0: usize,
    pub pi0: f64,
    pub reps: usize,
    pub seed: u64,
    pub lambda: f64,
    pub epsilon: f64,
    /// `false` when `reps = 1`; standard deviations are then reported as 0.
    pub sd_defined: bool,
    pub estimator_stats: Vec<EstimatorStats>,
    pub procedure_stats: Vec<ProcedureStats>,
    #[serde(skip)]
    pub estimates: Vec<EstimateRecord>,
    #[serde(skip)]
    pub procedures: Vec<ProcedureRecord>,
}

impl ReplicationSummary {
    /// Excess samples of `method`, in replication order.
    pub fn excess(&self, method: Pi0Method) -> Vec<f64> {
        self.estimates
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.excess)
            .collect()
    }

    pub fn records(&self, procedure: Procedure, alpha: f64) -> impl Iterator<Item = &ProcedureRecord> {
        self.procedures
            .iter()
            .filter(move |r| r.procedure == procedure && r.alpha == alpha)
    }

    /// FDP samples of `procedure` at `alpha`, in replication order.
    pub fn fdp(&self, procedure: Procedure, alpha: f64) -> Vec<f64> {
        self.records(procedure, alpha).map(|r| r.fdp).collect()
    }

    pub fn rejections(&self, procedure: Procedure, alpha: f64) -> Vec<usize> {
        self.records(procedure, alpha).map(|r| r.rejections).collect()
    }
}

fn estimate(study: &Study, method: Pi0Method, lambda: f64, epsilon: f64) -> Result<Pi0Estimate> {
    match method {
        Pi0Method::Storey => storey_pi0(study, lambda),
        Pi0Method::Generalized => generalized_pi0(study, lambda, epsilon),
        Pi0Method::PoundsTilde => Ok(pounds_tilde_pi0(study)),
        Pi0Method::PoundsHat => Ok(pounds_hat_pi0(study)),
        Pi0Method::Benjamini => benjamini_pi0(study),
        Pi0Method::StoreyOffset => Err(invalid("storey_offset cannot be simulated")),
    }
}

fn apply(
    study: &Study,
    process: &RejectionProcess,
    procedure: Procedure,
    spec: &ScenarioSpec,
    alpha: f64,
) -> Result<ThresholdResult> {
    let (lambda, epsilon) = (spec.lambda, spec.epsilon);
    match procedure {
        Procedure::Generalized => threshold(&FdrEstimator::generalized(study, lambda, epsilon)?, process, alpha),
        Procedure::Storey => threshold(&FdrEstimator::storey(study, lambda)?, process, alpha),
        Procedure::StoreyVariant => threshold(&FdrEstimator::storey_variant(study, lambda)?, process, alpha),
        Procedure::Bh => bh_procedure(process.pvalues(), alpha),
        Procedure::AdaptiveBh => adaptive_bh(process.pvalues(), alpha, &benjamini_pi0(study)?),
    }
}

/// False discovery proportion of a rejection set: `V / R`, or 1 when `R = 0`.
pub fn false_discovery_proportion(rejected: &[usize], truth: &[bool]) -> (usize, f64) {
    let v = rejected.iter().filter(|&&i| truth[i]).count();
    let fdp = if rejected.is_empty() {
        1.0
    } else {
        v as f64 / rejected.len() as f64
    };
    (v, fdp)
}

type RepRecords = (Vec<EstimateRecord>, Vec<ProcedureRecord>);

fn run_one(spec: &ScenarioSpec, roster: &Roster, rep: usize) -> Result<RepRecords> {
    let study = generate_scenario(spec, rep)?;
    let truth = study.truth().expect("simulated studies carry truth");
    let pi0 = spec.m0() as f64 / spec.m as f64;
    let estimates = roster
        .estimators
        .iter()
        .map(|&method| {
            let e = estimate(&study, method, spec.lambda, spec.epsilon)?;
            Ok(EstimateRecord {
                rep,
                method,
                estimate: e.value,
                excess: e.value - pi0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let process = RejectionProcess::from_study(&study);
    let mut procedures = Vec::with_capacity(roster.procedures.len() * spec.alpha_levels.len());
    for &procedure in &roster.procedures {
        for &alpha in &spec.alpha_levels {
            let result = apply(&study, &process, procedure, spec, alpha)?;
            let (v, fdp) = false_discovery_proportion(&result.rejected, truth);
            procedures.push(ProcedureRecord {
                rep,
                procedure,
                alpha,
                pi0: result.pi0,
                threshold: result.t_alpha,
                rejections: result.rejections,
                false_discoveries: v,
                fdp,
            });
        }
    }
    Ok((estimates, procedures))
}

/// Runs `spec.reps` replications in parallel and summarizes them.
///
/// Replications are collected in order before aggregation, so the summary
/// does not depend on the number of threads.
pub fn run_replications(spec: &ScenarioSpec, roster: &Roster) -> Result<ReplicationSummary> {
    spec.validate()?;
    if roster.estimators.is_empty() && roster.procedures.is_empty() {
        return Err(invalid("roster is empty"));
    }
    let per_rep = (0..spec.reps)
        .into_par_iter()
        .map(|rep| run_one(spec, roster, rep))
        .collect::<Result<Vec<_>>>()?;
    let (estimates, procedures): (Vec<_>, Vec<_>) = per_rep.into_iter().unzip();
    let estimates: Vec<EstimateRecord> = estimates.into_iter().flatten().collect();
    let procedures: Vec<ProcedureRecord> = procedures.into_iter().flatten().collect();

    let estimator_stats = roster
        .estimators
        .iter()
        .map(|&method| {
            let (est, exc): (Vec<f64>, Vec<f64>) = estimates
                .iter()
                .filter(|r| r.method == method)
                .map(|r| (r.estimate, r.excess))
                .unzip();
            EstimatorStats {
                method,
                estimate: Moments::of(&est),
                excess: Moments::of(&exc),
            }
        })
        .collect();
    let mut procedure_stats = Vec::new();
    for &procedure in &roster.procedures {
        for &alpha in &spec.alpha_levels {
            let rows: Vec<&ProcedureRecord> = procedures
                .iter()
                .filter(|r| r.procedure == procedure && r.alpha == alpha)
                .collect();
            let col = |f: fn(&ProcedureRecord) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
            procedure_stats.push(ProcedureStats {
                procedure,
                alpha,
                fdp: Moments::of(&col(|r| r.fdp)),
                rejections: Moments::of(&col(|r| r.rejections as f64)),
                threshold: Moments::of(&col(|r| r.threshold)),
            });
        }
    }

    Ok(ReplicationSummary {
        kind: spec.kind.name(),
        m: spec.m,
        m0: spec.m0(),
        pi0: spec.pi0,
        reps: spec.reps,
        seed: spec.seed,
        lambda: spec.lambda,
        epsilon: spec.epsilon,
        sd_defined: spec.reps > 1,
        estimator_stats,
        procedure_stats,
        estimates,
        procedures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ScenarioKind;

    fn spec(reps: usize) -> ScenarioSpec {
        let mut s = ScenarioSpec::new(ScenarioKind::PoissonBin, 60, 0.5);
        s.reps = reps;
        s.alpha_levels = vec![0.05, 0.1];
        s.seed = 21;
        s
    }

    #[test]
    fn single_rep_reports_zero_sd() {
        let s = run_replications(&spec(1), &Roster::default()).unwrap();
        assert!(!s.sd_defined);
        assert!(s.estimator_stats.iter().all(|e| e.excess.sd == 0.0 && e.excess.n == 1));
    }

    #[test]
    fn sample_counts_equal_reps() {
        let s = run_replications(&spec(4), &Roster::default()).unwrap();
        for e in &s.estimator_stats {
            assert_eq!(e.excess.n, 4);
        }
        for p in &s.procedure_stats {
            assert_eq!(p.fdp.n, 4);
        }
        assert_eq!(s.procedures.len(), 4 * 3 * 2);
    }

    #[test]
    fn empty_rejection_set_has_unit_fdp() {
        assert_eq!(false_discovery_proportion(&[], &[true, false]), (0, 1.0));
        assert_eq!(false_discovery_proportion(&[0, 1], &[true, false]), (1, 0.5));
    }

    #[test]
    fn generalized_rejects_at_least_storey() {
        let s = run_replications(&spec(6), &Roster::default()).unwrap();
        for &alpha in &[0.05, 0.1] {
            let g = s.rejections(Procedure::Generalized, alpha);
            let st = s.rejections(Procedure::Storey, alpha);
            assert!(g.iter().zip(&st).all(|(a, b)| a >= b), "{g:?} {st:?}");
        }
    }

    #[test]
    fn storey_offset_not_in_roster() {
        assert!(Roster::new(vec![Pi0Method::StoreyOffset], vec![]).is_err());
        assert!(Roster::new(vec![], vec![]).is_err());
    }
}

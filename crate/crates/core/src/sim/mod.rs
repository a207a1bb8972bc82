//! Count-data simulations with known truth.
//!
//! [`ScenarioSpec`] describes one of three scenarios (Poisson pairs tested
//! with the conditional binomial test, binomial pairs with Fisher's test,
//! replicated negative binomial groups with the exact NB test).
//! [`generate_scenario`] draws one replication, [`run_replications`] runs
//! many and records estimator excesses and false discovery proportions, and
//! [`bias_decomposition`] computes the estimators' exact biases for fixed
//! parameters by enumeration.

mod bias;
mod generate;
mod runner;
mod scenario;

pub use bias::{
    bias_decomposition, bias_decomposition_for, generalized_bias, hypothesis_moments, pounds_bias,
    BiasDecomposition, HypothesisMoments, MAX_MASS_DEFICIT,
};
pub use generate::{generate_scenario, nb_draw, replication_rng, HypothesisModel, ScenarioParams};
pub use runner::{
    false_discovery_proportion, run_replications, EstimateRecord, EstimatorStats, Moments, Procedure,
    ProcedureRecord, ProcedureStats, ReplicationSummary, Roster,
};
pub use scenario::{
    AltProbability, BinomialParams, NegBinomParams, PoissonParams, ScenarioKind, ScenarioSpec,
};

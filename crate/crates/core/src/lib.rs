//! Multiple testing with discrete p-values.
//!
//! Exact conditional tests ([`exact`]) report each p-value together with the
//! support of its null distribution. The estimators in [`estimators`] use
//! those supports to remove the upward bias that discreteness adds to
//! estimates of the proportion of true nulls, [`fdr`] turns the estimates
//! into FDR estimators with exactly computed thresholds, [`tuning`] picks
//! tuning parameters by bootstrap, and [`sim`] reproduces count-data
//! simulation studies with known truth.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory; the
//! `discrete-fdr` binary wraps [`cli`].

pub mod cli;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod fdr;
pub mod sim;
pub mod tuning;

pub use error::{Error, Result};
pub use estimators::{
    benjamini_pi0, generalized_pi0, pounds_hat_pi0, pounds_tilde_pi0, storey_pi0, support_cdf,
    Epsilon, PValueProfile, Pi0Estimate, Pi0Method, Study,
};
pub use exact::{binomial_test, fisher_test, nb_exact_test, TestKind, TestResult, TwoSided};
pub use fdr::{
    adaptive_bh, bh_procedure, counterexample_instance, evaluate_fdr, threshold, FdrEstimator,
    FdrKind, RejectionProcess, ThresholdResult,
};
pub use tuning::{bootstrap_tune, TuningGrid, TuningResult};

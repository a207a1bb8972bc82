//! Scenario configuration.
//!
//! A scenario is read from TOML. Unknown keys are rejected. Example:
//!
//! ```toml
//! kind = "binomial_fet"      # poisson_bin | binomial_fet | negbinom_ent
//! m = 1000
//! pi0 = 0.8
//! alpha_levels = [0.05, 0.1]
//! reps = 50
//! seed = 7
//! lambda = 0.5
//! epsilon = 1.0
//!
//! [binomial]
//! rho_high = 13.0
//! alternative = "odds_ratio"  # or "capped"
//! ```
//!
//! Every table is optional and defaults to the standard simulation
//! settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::TwoSided;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Two Poisson counts, conditional binomial test.
    PoissonBin,
    /// Two binomial counts, Fisher's exact test.
    BinomialFet,
    /// Two groups of negative binomial replicates, exact NB test.
    NegbinomEnt,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::PoissonBin => "poisson_bin",
            ScenarioKind::BinomialFet => "binomial_fet",
            ScenarioKind::NegbinomEnt => "negbinom_ent",
        }
    }
}

/// Poisson scenario: `theta1 ~ Pareto(location, shape)`, `rho ~ U(rho_low, rho_high)`,
/// `theta2 = rho * theta1` for false nulls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoissonParams {
    pub theta_location: f64,
    pub theta_shape: f64,
    pub rho_low: f64,
    pub rho_high: f64,
}

impl Default for PoissonParams {
    fn default() -> Self {
        PoissonParams {
            theta_location: 7.0,
            theta_shape: 7.0,
            rho_low: 1.5,
            rho_high: 5.0,
        }
    }
}

/// How a false null's second success probability is formed from `rho` and `theta1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AltProbability {
    /// `rho` is an odds ratio: `theta2 = o / (1 + o)` with `o = rho theta1 / (1 - theta1)`.
    /// At `pi0 = 0.95` most replications reject nothing.
    #[default]
    OddsRatio,
    /// `theta2 = min(1, rho theta1 / (1 - theta1))`, the literal formula capped at one.
    /// Most false nulls get `theta2 = 1`.
    Capped,
}

/// Binomial scenario: trials `r = NB(trials_size, trials_mean) + trials_offset`,
/// `theta1 ~ U(theta_low, theta_high)`, `rho ~ U(rho_low, rho_high)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BinomialParams {
    pub trials_size: f64,
    pub trials_mean: f64,
    pub trials_offset: u64,
    pub theta_low: f64,
    pub theta_high: f64,
    pub rho_low: f64,
    pub rho_high: f64,
    pub alternative: AltProbability,
}

impl Default for BinomialParams {
    fn default() -> Self {
        BinomialParams {
            trials_size: 3.0,
            trials_mean: 8.0,
            trials_offset: 2,
            theta_low: 0.08,
            theta_high: 0.65,
            rho_low: 1.5,
            rho_high: 13.0,
            alternative: AltProbability::OddsRatio,
        }
    }
}

/// Negative binomial scenario: `samples_per_group` replicates per group with
/// size `1 / dispersion`; `rho ~ Pareto(rho_location, rho_shape)`.
///
/// Control-group means come from `theta_file` (one positive number per
/// line, recycled if shorter than `m`) or else from `U(theta_low, theta_high)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NegBinomParams {
    pub dispersion: f64,
    pub samples_per_group: u32,
    pub rho_location: f64,
    pub rho_shape: f64,
    pub theta_low: f64,
    pub theta_high: f64,
    pub theta_file: Option<PathBuf>,
    #[serde(skip)]
    pub theta_values: Option<Vec<f64>>,
}

impl Default for NegBinomParams {
    fn default() -> Self {
        NegBinomParams {
            dispersion: 1.451,
            samples_per_group: 3,
            rho_location: 1.5,
            rho_shape: 1.426,
            theta_low: 0.5,
            theta_high: 5.0,
            theta_file: None,
            theta_values: None,
        }
    }
}

impl NegBinomParams {
    pub fn size(&self) -> f64 {
        1.0 / self.dispersion
    }
}

fn default_alphas() -> Vec<f64> {
    vec![0.025, 0.05, 0.075, 0.1]
}
fn default_reps() -> usize {
    50
}
fn default_lambda() -> f64 {
    0.5
}
fn default_epsilon() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub m: usize,
    pub pi0: f64,
    #[serde(default = "default_alphas")]
    pub alpha_levels: Vec<f64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub convention: TwoSided,
    #[serde(default)]
    pub poisson: PoissonParams,
    #[serde(default)]
    pub binomial: BinomialParams,
    #[serde(default)]
    pub negbinom: NegBinomParams,
}

impl ScenarioSpec {
    /// A scenario with the default parameters for `kind`.
    pub fn new(kind: ScenarioKind, m: usize, pi0: f64) -> Self {
        ScenarioSpec {
            kind,
            m,
            pi0,
            alpha_levels: default_alphas(),
            reps: default_reps(),
            seed: 0,
            lambda: default_lambda(),
            epsilon: default_epsilon(),
            convention: TwoSided::default(),
            poisson: PoissonParams::default(),
            binomial: BinomialParams::default(),
            negbinom: NegBinomParams::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a scenario file; a relative `theta_file` is resolved against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let mut spec = Self::from_toml_str(&text).map_err(|e| e.in_file(path))?;
        if let Some(file) = spec.negbinom.theta_file.clone() {
            let file = if file.is_relative() {
                path.parent().unwrap_or(Path::new(".")).join(file)
            } else {
                file
            };
            spec.negbinom.theta_values = Some(read_theta_file(&file)?);
        }
        Ok(spec)
    }

    /// Number of true nulls, `round(pi0 m)`.
    pub fn m0(&self) -> usize {
        (self.pi0 * self.m as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.m == 0 {
            return fail("m must be at least 1".into());
        }
        if !(self.pi0 > 0.0 && self.pi0 < 1.0) {
            return fail(format!("pi0 = {} must lie in (0, 1)", self.pi0));
        }
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        if self.alpha_levels.is_empty() {
            return fail("alpha_levels is empty".into());
        }
        if let Some(a) = self.alpha_levels.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return fail(format!("alpha level {a} outside (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return fail(format!("lambda = {} outside [0, 1)", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return fail(format!("epsilon = {} outside [0, 1]", self.epsilon));
        }
        let range = |name: &str, lo: f64, hi: f64| -> Result<()> {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::Config(format!("{name}: need low <= high, got [{lo}, {hi}]")))
            }
        };
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        let p = &self.poisson;
        positive("poisson.theta_location", p.theta_location)?;
        positive("poisson.theta_shape", p.theta_shape)?;
        range("poisson.rho", p.rho_low, p.rho_high)?;
        positive("poisson.rho_low", p.rho_low)?;
        let b = &self.binomial;
        positive("binomial.trials_size", b.trials_size)?;
        positive("binomial.trials_mean", b.trials_mean)?;
        range("binomial.theta", b.theta_low, b.theta_high)?;
        if !(b.theta_low > 0.0 && b.theta_high < 1.0) {
            return fail("binomial.theta range must lie inside (0, 1)".into());
        }
        range("binomial.rho", b.rho_low, b.rho_high)?;
        positive("binomial.rho_low", b.rho_low)?;
        let n = &self.negbinom;
        positive("negbinom.dispersion", n.dispersion)?;
        positive("negbinom.rho_location", n.rho_location)?;
        positive("negbinom.rho_shape", n.rho_shape)?;
        positive("negbinom.theta_low", n.theta_low)?;
        range("negbinom.theta", n.theta_low, n.theta_high)?;
        if n.samples_per_group == 0 {
            return fail("negbinom.samples_per_group must be at least 1".into());
        }
        Ok(())
    }
}

fn read_theta_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let tok = line.split([',', '\t']).next().unwrap_or("").trim();
        if tok.is_empty() || tok.starts_with('#') {
            continue;
        }
        match tok.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => values.push(v),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected a positive mean, found {tok:?}"),
                }
                .in_file(path))
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Config("theta_file has no values".into()).in_file(path));
    }
    Ok(values)
}

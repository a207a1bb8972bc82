//! The `analyze`, `simulate` and `tune` commands as library functions.
//!
//! Each command takes a serializable config, writes its outputs to a
//! directory, and records a [`RunManifest`] next to them. [`replay`] reruns a
//! manifest and reproduces the outputs byte for byte (given the same build
//! and unchanged inputs, which are checked by SHA-256).
//!
//! Floating-point output carries 9 significant digits.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::estimators::{
    benjamini_pi0, generalized_pi0, pounds_hat_pi0, pounds_tilde_pi0, storey_pi0, Pi0Estimate, Study,
};
use crate::exact::ingest::{ingest_counts, CountSchema, CountTable};
use crate::exact::{TestKind, TwoSided};
use crate::fdr::{adaptive_bh, bh_procedure, threshold, FdrEstimator, RejectionProcess, ThresholdResult};
use crate::sim::{run_replications, ReplicationSummary, Roster, ScenarioSpec};
use crate::tuning::{bootstrap_tune, TuningGrid, TuningResult};

/// Formats `x` with 9 significant digits; non-finite values print as `NA`.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    round_sig(x).to_string()
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("valid float")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_sig)
}

/// Rounds every non-integer number in a JSON value to 9 significant digits.
fn round_json(value: &mut serde_json::Value) {
    use serde_json::Value;
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::from(e).in_file(path))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::from(e).in_file(path))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

/// Where the counts come from and how they are tested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountInput {
    pub path: PathBuf,
    pub test: TestKind,
    /// NB size per sample, `ent` only.
    #[serde(default)]
    pub size: Option<f64>,
    #[serde(default)]
    pub convention: TwoSided,
    #[serde(default)]
    pub min_total: Option<u64>,
    #[serde(default)]
    pub max_total: Option<u64>,
}

impl CountInput {
    pub fn new(path: impl Into<PathBuf>, test: TestKind) -> Self {
        CountInput {
            path: path.into(),
            test,
            size: None,
            convention: TwoSided::default(),
            min_total: None,
            max_total: None,
        }
    }

    fn schema(&self) -> CountSchema {
        let mut schema = CountSchema::new(self.test).with_total_range(self.min_total, self.max_total);
        schema.size = self.size;
        schema
    }

    /// Reads and filters the table, then tests every feature.
    pub fn load(&self) -> Result<(CountTable, Study)> {
        let file = File::open(&self.path).map_err(|e| Error::from(e).in_file(&self.path))?;
        let table = ingest_counts(file, &self.schema()).map_err(|e| e.in_file(&self.path))?;
        let study = table.to_study(self.convention)?;
        Ok((table, study))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub input: CountInput,
    pub lambda: f64,
    pub epsilon: f64,
    pub alphas: Vec<f64>,
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub alpha: f64,
    pub method: String,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub pi0: f64,
    pub t_hat: f64,
    /// Estimated FDR at `t_hat`; absent for the BH procedures.
    pub fdr_at_t: Option<f64>,
    pub rejections: usize,
}

impl TableRow {
    fn new(label: &str, r: &ThresholdResult, lambda: Option<f64>, epsilon: Option<f64>) -> Self {
        TableRow {
            alpha: r.alpha,
            method: label.into(),
            lambda,
            epsilon,
            pi0: r.pi0,
            t_hat: r.t_alpha,
            fdr_at_t: r.fdr_at_t,
            rejections: r.rejections,
        }
    }

    fn tuning(&self) -> String {
        match (self.lambda, self.epsilon) {
            (Some(l), Some(e)) => format!("({},{})", fmt_sig(l), fmt_sig(e)),
            _ => "NA".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureReport {
    pub id: String,
    pub pvalue: f64,
    pub support: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub m: usize,
    pub dropped: usize,
    pub estimates: Vec<Pi0Estimate>,
    pub table: Vec<TableRow>,
    #[serde(skip)]
    pub features: Vec<FeatureReport>,
}

impl AnalysisReport {
    pub fn row(&self, method: &str, alpha: f64) -> Option<&TableRow> {
        self.table.iter().find(|r| r.method == method && r.alpha == alpha)
    }

    pub fn estimate(&self, method: crate::estimators::Pi0Method) -> Option<&Pi0Estimate> {
        self.estimates.iter().find(|e| e.method == method)
    }

    /// The results table as aligned text, one block per alpha.
    pub fn render(&self) -> String {
        let mut out = format!("m = {} (dropped {})\n", self.m, self.dropped);
        let mut alphas: Vec<f64> = self.table.iter().map(|r| r.alpha).collect();
        alphas.dedup();
        for alpha in alphas {
            let _ = writeln!(out, "\nalpha = {}", fmt_sig(alpha));
            let _ = writeln!(
                out,
                "{:<12} {:<16} {:>12} {:>14} {:>14} {:>8}",
                "method", "(lambda,eps)", "pi0", "t_hat", "alpha_hat", "R"
            );
            for r in self.table.iter().filter(|r| r.alpha == alpha) {
                let _ = writeln!(
                    out,
                    "{:<12} {:<16} {:>12} {:>14} {:>14} {:>8}",
                    r.method,
                    r.tuning(),
                    fmt_sig(r.pi0),
                    fmt_sig(r.t_hat),
                    fmt_opt(r.fdr_at_t),
                    r.rejections
                );
            }
        }
        out
    }
}

/// Estimates, thresholds and the results table for a study.
pub fn analyze_study(study: &Study, lambda: f64, epsilon: f64, alphas: &[f64]) -> Result<AnalysisReport> {
    if alphas.is_empty() {
        return Err(invalid("at least one alpha level is required"));
    }
    let mut estimates = vec![
        generalized_pi0(study, lambda, epsilon)?,
        storey_pi0(study, lambda)?,
        pounds_tilde_pi0(study),
        pounds_hat_pi0(study),
    ];
    let benjamini = if study.m() >= 2 { Some(benjamini_pi0(study)?) } else { None };
    estimates.extend(benjamini.clone());

    let process = RejectionProcess::from_study(study);
    let pvalues = study.pvalues();
    let new = FdrEstimator::generalized(study, lambda, epsilon)?;
    let storey = FdrEstimator::storey(study, lambda)?;
    let mut table = Vec::new();
    for &alpha in alphas {
        table.push(TableRow::new("New", &threshold(&new, &process, alpha)?, Some(lambda), Some(epsilon)));
        table.push(TableRow::new("Storey", &threshold(&storey, &process, alpha)?, Some(lambda), Some(0.0)));
        table.push(TableRow::new("BH", &bh_procedure(&pvalues, alpha)?, None, None));
        if let Some(b) = &benjamini {
            table.push(TableRow::new("Adaptive BH", &adaptive_bh(&pvalues, alpha, b)?, None, None));
        }
    }
    Ok(AnalysisReport {
        m: study.m(),
        dropped: 0,
        estimates,
        table,
        features: Vec::new(),
    })
}

pub fn analyze(cfg: &AnalyzeConfig) -> Result<AnalysisReport> {
    let (table, study) = cfg.input.load()?;
    let mut report = analyze_study(&study, cfg.lambda, cfg.epsilon, &cfg.alphas)?;
    report.dropped = table.dropped;
    report.features = table
        .rows
        .iter()
        .zip(study.profiles())
        .map(|(row, p)| FeatureReport {
            id: row.id.clone(),
            pvalue: p.pvalue,
            support: p.support.clone(),
        })
        .collect();
    Ok(report)
}

fn write_analysis(report: &AnalysisReport, out: &Path) -> Result<()> {
    let mut w = csv_writer(&out.join("table.csv"))?;
    w.write_record(["alpha", "method", "lambda", "epsilon", "pi0", "t_hat", "alpha_hat", "rejections"])?;
    for r in &report.table {
        w.write_record([
            fmt_sig(r.alpha),
            r.method.clone(),
            fmt_opt(r.lambda),
            fmt_opt(r.epsilon),
            fmt_sig(r.pi0),
            fmt_sig(r.t_hat),
            fmt_opt(r.fdr_at_t),
            r.rejections.to_string(),
        ])?;
    }
    w.flush()?;
    let mut w = csv_writer(&out.join("features.csv"))?;
    w.write_record(["id", "pvalue", "support_size", "support"])?;
    for f in &report.features {
        let support: Vec<String> = f.support.iter().map(|&s| fmt_sig(s)).collect();
        w.write_record([
            f.id.clone(),
            fmt_sig(f.pvalue),
            f.support.len().to_string(),
            support.join(" "),
        ])?;
    }
    w.flush()?;
    write_json(&out.join("report.json"), report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub scenario: PathBuf,
    /// Overrides the scenario's seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Overrides the scenario's replication count.
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default)]
    pub roster: Roster,
}

impl SimulateConfig {
    pub fn new(scenario: impl Into<PathBuf>) -> Self {
        SimulateConfig {
            scenario: scenario.into(),
            seed: None,
            reps: None,
            roster: Roster::default(),
        }
    }

    pub fn spec(&self) -> Result<ScenarioSpec> {
        let mut spec = ScenarioSpec::from_file(&self.scenario)?;
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(reps) = self.reps {
            spec.reps = reps;
        }
        spec.validate()?;
        Ok(spec)
    }
}

pub fn simulate(cfg: &SimulateConfig) -> Result<ReplicationSummary> {
    run_replications(&cfg.spec()?, &cfg.roster)
}

fn write_simulation(summary: &ReplicationSummary, out: &Path) -> Result<()> {
    let mut w = csv_writer(&out.join("replications.csv"))?;
    w.write_record(["rep", "procedure", "alpha", "pi0", "threshold", "rejections", "false_discoveries", "fdp"])?;
    for r in &summary.procedures {
        w.write_record([
            r.rep.to_string(),
            r.procedure.name().to_string(),
            fmt_sig(r.alpha),
            fmt_sig(r.pi0),
            fmt_sig(r.threshold),
            r.rejections.to_string(),
            r.false_discoveries.to_string(),
            fmt_sig(r.fdp),
        ])?;
    }
    w.flush()?;
    let mut w = csv_writer(&out.join("estimates.csv"))?;
    w.write_record(["rep", "method", "estimate", "excess"])?;
    for r in &summary.estimates {
        w.write_record([
            r.rep.to_string(),
            r.method.name().to_string(),
            fmt_sig(r.estimate),
            fmt_sig(r.excess),
        ])?;
    }
    w.flush()?;
    write_json(&out.join("summary.json"), summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub input: CountInput,
    /// Lambda grid, e.g. `0:0.95:0.05`.
    pub lambdas: String,
    /// Epsilon grid, e.g. `0:1:0.25`.
    pub epsilons: String,
    pub bootstrap: usize,
    pub seed: u64,
}

pub fn tune(cfg: &TuneConfig) -> Result<TuningResult> {
    let grid = TuningGrid::parse(&cfg.lambdas, &cfg.epsilons, cfg.bootstrap, cfg.seed)?;
    let (_, study) = cfg.input.load()?;
    bootstrap_tune(&study, &grid)
}

fn write_tuning(result: &TuningResult, out: &Path) -> Result<()> {
    let mut w = csv_writer(&out.join("grid.csv"))?;
    w.write_record(["lambda", "epsilon", "raw_estimate", "mse"])?;
    for g in &result.mse {
        w.write_record([fmt_sig(g.lambda), fmt_sig(g.epsilon), fmt_sig(g.raw), fmt_sig(g.mse)])?;
    }
    w.flush()?;
    write_json(&out.join("tuning.json"), result)
}

/// A command together with all of its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "lowercase")]
pub enum Command {
    Analyze(AnalyzeConfig),
    Simulate(SimulateConfig),
    Tune(TuneConfig),
}

impl Command {
    fn inputs(&self) -> Vec<&Path> {
        match self {
            Command::Analyze(c) => vec![&c.input.path],
            Command::Tune(c) => vec![&c.input.path],
            Command::Simulate(c) => vec![&c.scenario],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub command: Command,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: Command, seed: Option<u64>) -> Result<Self> {
        let mut inputs: Vec<InputDigest> = command
            .inputs()
            .into_iter()
            .map(|p| Ok(InputDigest { path: p.to_path_buf(), sha256: sha256_file(p)? }))
            .collect::<Result<_>>()?;
        if let Command::Simulate(c) = &command {
            if let Some(theta) = ScenarioSpec::from_file(&c.scenario)?.negbinom.theta_file {
                let path = if theta.is_relative() {
                    c.scenario.parent().unwrap_or(Path::new(".")).join(theta)
                } else {
                    theta
                };
                inputs.push(InputDigest { sha256: sha256_file(&path)?, path });
            }
        }
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Ok(RunManifest {
            command,
            seed,
            inputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))
    }

    /// Fails if any recorded input has changed since the run.
    pub fn verify_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let now = sha256_file(&input.path)?;
            if now != input.sha256 {
                return Err(Error::Config(format!(
                    "{} changed since the recorded run (sha256 {} != {})",
                    input.path.display(),
                    now,
                    input.sha256
                )));
            }
        }
        Ok(())
    }
}

/// Runs `command`, writing outputs and `manifest.json` to `out` when given.
/// Returns the text summary printed by the binary.
pub fn run(command: &Command, out: Option<&Path>) -> Result<String> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    }
    let (text, seed) = match command {
        Command::Analyze(cfg) => {
            let report = analyze(cfg)?;
            if let Some(dir) = out {
                write_analysis(&report, dir)?;
            }
            (report.render(), None)
        }
        Command::Simulate(cfg) => {
            let dir = out.ok_or_else(|| invalid("simulate needs an output directory"))?;
            let summary = simulate(cfg)?;
            write_simulation(&summary, dir)?;
            (render_simulation(&summary), Some(summary.seed))
        }
        Command::Tune(cfg) => {
            let result = tune(cfg)?;
            if let Some(dir) = out {
                write_tuning(&result, dir)?;
            }
            let text = format!(
                "chosen (lambda, epsilon) = ({}, {})\npi0 = {}\ntarget = {}\nB = {}, seed = {}\n",
                fmt_sig(result.chosen.0),
                fmt_sig(result.chosen.1),
                fmt_sig(result.estimate.value),
                fmt_sig(result.target),
                result.bootstrap,
                result.seed
            );
            (text, Some(cfg.seed))
        }
    };
    if let Some(dir) = out {
        let manifest = RunManifest::new(command.clone(), seed)?;
        write_json(&dir.join("manifest.json"), &manifest)?;
    }
    Ok(text)
}

fn render_simulation(s: &ReplicationSummary) -> String {
    let mut out = format!(
        "{}: m = {}, pi0 = {}, reps = {}, seed = {}{}\n",
        s.kind,
        s.m,
        fmt_sig(s.pi0),
        s.reps,
        s.seed,
        if s.sd_defined { "" } else { " (sd undefined for one replication, shown as 0)" }
    );
    let _ = writeln!(out, "\n{:<14} {:>14} {:>12}", "estimator", "mean excess", "sd");
    for e in &s.estimator_stats {
        let _ = writeln!(out, "{:<14} {:>14} {:>12}", e.method.name(), fmt_sig(e.excess.mean), fmt_sig(e.excess.sd));
    }
    let _ = writeln!(out, "\n{:<16} {:>8} {:>12} {:>12} {:>12}", "procedure", "alpha", "mean FDP", "sd", "mean R");
    for p in &s.procedure_stats {
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>12} {:>12} {:>12}",
            p.procedure.name(),
            fmt_sig(p.alpha),
            fmt_sig(p.fdp.mean),
            fmt_sig(p.fdp.sd),
            fmt_sig(p.rejections.mean)
        );
    }
    out
}

/// Reruns the command recorded in `manifest`, writing into `out`.
pub fn replay(manifest: &Path, out: &Path) -> Result<String> {
    let m = RunManifest::read(manifest)?;
    m.verify_inputs()?;
    run(&m.command, Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(0.598488612345), "0.598488612");
        assert_eq!(fmt_sig(0.0095508241234), "0.00955082412");
        assert_eq!(fmt_sig(451.0), "451");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(f64::NAN), "NA");
    }

    #[test]
    fn json_rounding() {
        let mut v = serde_json::json!({"a": 0.1234567891234, "b": [1, 2.5], "c": "x"});
        round_json(&mut v);
        assert_eq!(v["a"], serde_json::json!(0.123456789));
        assert_eq!(v["b"][0], serde_json::json!(1));
    }

    #[test]
    fn manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        fs::write(&path, "id,a,b\nf,1,2\n").unwrap();
        let cmd = Command::Analyze(AnalyzeConfig {
            input: CountInput::new(&path, TestKind::Bin),
            lambda: 0.5,
            epsilon: 1.0,
            alphas: vec![0.05],
        });
        let m = RunManifest::new(cmd, None).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"command\":\"analyze\""));
        assert_eq!(serde_json::from_str::<RunManifest>(&text).unwrap(), m);
        m.verify_inputs().unwrap();
        fs::write(&path, "id,a,b\nf,1,3\n").unwrap();
        assert!(m.verify_inputs().is_err());
    }
}

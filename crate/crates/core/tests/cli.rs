use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use discrete_fdr::cli::{self, AnalyzeConfig, Command, CountInput, SimulateConfig, TuneConfig};
use discrete_fdr::TestKind;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_discrete-fdr"))
}

fn analyze_cfg(path: PathBuf, test: TestKind, epsilon: f64) -> AnalyzeConfig {
    AnalyzeConfig { input: CountInput::new(path, test), lambda: 0.5, epsilon, alphas: vec![0.05, 0.1] }
}

#[test]
fn smoke_simulation_has_one_row_per_rep_procedure_and_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", data("scenarios/smoke.toml").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("replications.csv")).unwrap();
    assert_eq!(text.lines().count() - 1, 2 * 3 * 2);
    let est = fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
    assert_eq!(est.lines().count() - 1, 2 * 4);
    assert!(dir.path().join("manifest.json").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean FDP"));
}

#[test]
fn replay_reproduces_outputs_byte_for_byte() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let cmd = Command::Simulate(SimulateConfig { reps: Some(3), ..SimulateConfig::new(data("scenarios/negbinom.toml")) });
    cli::run(&cmd, Some(first.path())).unwrap();
    cli::replay(&first.path().join("manifest.json"), second.path()).unwrap();
    for f in ["replications.csv", "estimates.csv", "summary.json"] {
        assert_eq!(fs::read(first.path().join(f)).unwrap(), fs::read(second.path().join(f)).unwrap(), "{f}");
    }

    let third = tempfile::tempdir().unwrap();
    let cmd = Command::Analyze(analyze_cfg(data("counts_fet.csv"), TestKind::Fet, 1.0));
    cli::run(&cmd, Some(first.path())).unwrap();
    let out = bin().arg("replay").arg(first.path().join("manifest.json")).arg("--out").arg(third.path()).output();
    assert!(out.unwrap().status.success());
    for f in ["table.csv", "features.csv", "report.json"] {
        assert_eq!(fs::read(first.path().join(f)).unwrap(), fs::read(third.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn replay_refuses_changed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("c.csv");
    fs::write(&input, "id,a,b\nf1,3,9\nf2,4,4\n").unwrap();
    let out = dir.path().join("run");
    cli::run(&Command::Analyze(analyze_cfg(input.clone(), TestKind::Bin, 1.0)), Some(&out)).unwrap();
    fs::write(&input, "id,a,b\nf1,3,9\nf2,4,5\n").unwrap();
    let err = cli::replay(&out.join("manifest.json"), &dir.path().join("again")).unwrap_err();
    assert!(err.to_string().contains("changed"), "{err}");
}

#[test]
fn unknown_scenario_kind_names_the_valid_ones() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    fs::write(&path, "kind = \"gamma_ratio\"\nm = 10\npi0 = 0.5\n").unwrap();
    let out = bin().arg("simulate").arg(&path).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for kind in ["poisson_bin", "binomial_fet", "negbinom_ent"] {
        assert!(err.contains(kind), "{err}");
    }
    assert!(err.starts_with("error[config]"), "{err}");
}

#[test]
fn empty_feature_set_is_an_error() {
    let cfg = AnalyzeConfig {
        input: CountInput { min_total: Some(1_000_000), ..CountInput::new(data("counts_bin.csv"), TestKind::Bin) },
        ..analyze_cfg(PathBuf::new(), TestKind::Bin, 1.0)
    };
    let err = cli::analyze(&cfg).unwrap_err();
    assert!(err.to_string().contains("m = 0"), "{err}");
    assert_eq!(err.category(), "empty");

    let out = bin()
        .args(["analyze", data("counts_bin.csv").to_str().unwrap(), "--test", "bin", "--min-total", "1000000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[empty]"));
}

#[test]
fn zero_epsilon_new_row_equals_storey_row() {
    for (file, test) in [("counts_bin.csv", TestKind::Bin), ("counts_fet.csv", TestKind::Fet)] {
        let report = cli::analyze(&analyze_cfg(data(file), test, 0.0)).unwrap();
        for alpha in [0.05, 0.1] {
            let new = report.row("New", alpha).unwrap();
            let storey = report.row("Storey", alpha).unwrap();
            assert_eq!(new.pi0, storey.pi0);
            assert_eq!(new.t_hat, storey.t_hat);
            assert_eq!(new.rejections, storey.rejections);
        }
    }
}

#[test]
fn generalized_row_rejects_at_least_as_many_as_storey() {
    let report = cli::analyze(&analyze_cfg(data("counts_fet.csv"), TestKind::Fet, 1.0)).unwrap();
    for alpha in [0.05, 0.1] {
        let new = report.row("New", alpha).unwrap();
        let storey = report.row("Storey", alpha).unwrap();
        assert!(new.pi0 <= storey.pi0);
        assert!(new.rejections >= storey.rejections);
    }
    assert_eq!(report.table.len(), 2 * 4);
}

#[test]
fn parse_errors_carry_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "id,a,b\nf1,3,9\nf2,four,4\n").unwrap();
    let err = cli::analyze(&analyze_cfg(path.clone(), TestKind::Bin, 1.0)).unwrap_err().to_string();
    assert!(err.contains("bad.csv") && err.contains("line 3"), "{err}");

    let out = bin().arg("analyze").arg(&path).args(["--test", "bin"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error[parse]") && stderr.contains("line 3"), "{stderr}");
}

#[test]
fn usage_errors_exit_with_two() {
    let out = bin().args(["analyze", "x.csv", "--test", "chi2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[usage]"));
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_prints_the_table() {
    let out = bin()
        .args(["analyze", data("counts_ent.tsv").to_str().unwrap(), "--test", "ent", "--size", "2", "--alpha", "0.05", "--alpha", "0.1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("alpha = 0.05") && text.contains("alpha = 0.1"));
    assert!(text.contains("Adaptive BH"));
}

#[test]
fn single_point_tune_is_a_passthrough() {
    let input = CountInput::new(data("counts_bin.csv"), TestKind::Bin);
    let cfg = TuneConfig { input: input.clone(), lambdas: "0.5".into(), epsilons: "0.75".into(), bootstrap: 20, seed: 1 };
    let r = cli::tune(&cfg).unwrap();
    assert_eq!(r.chosen, (0.5, 0.75));
    let (_, study) = input.load().unwrap();
    assert_eq!(r.estimate, discrete_fdr::generalized_pi0(&study, 0.5, 0.75).unwrap());
}

#[test]
fn malformed_grid_is_an_error() {
    let input = CountInput::new(data("counts_bin.csv"), TestKind::Bin);
    for (l, e) in [("0:0.9", "1"), ("0.5", "0:1:0"), ("a", "1"), ("0.5", "1.5"), ("1", "0")] {
        let cfg = TuneConfig { input: input.clone(), lambdas: l.into(), epsilons: e.into(), bootstrap: 10, seed: 0 };
        assert!(cli::tune(&cfg).is_err(), "{l} / {e}");
    }
    let out = bin()
        .args(["tune", data("counts_bin.csv").to_str().unwrap(), "--test", "bin", "--lambda", "0.9:0.1:0.1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tune_writes_grid_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["tune", data("counts_fet.csv").to_str().unwrap(), "--test", "fet", "--lambda", "0.2:0.6:0.2", "--epsilon", "0,1", "--bootstrap", "25", "--seed", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 3 * 2);
    let manifest = cli::RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.seed, Some(3));
    assert_eq!(manifest.inputs.len(), 1);
}

//! Thresholds of the generalized and Storey FDR estimators, BH and adaptive
//! BH on Fisher tests from the bundled table.

use discrete_fdr::cli::CountInput;
use discrete_fdr::{
    adaptive_bh, benjamini_pi0, bh_procedure, threshold, FdrEstimator, RejectionProcess, TestKind,
};

fn main() -> discrete_fdr::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/counts_fet.csv");
    let (_, study) = CountInput::new(path, TestKind::Fet).load()?;
    let process = RejectionProcess::from_study(&study);
    let pvalues = study.pvalues();

    let estimators = [
        ("generalized (0.5, 1)", FdrEstimator::generalized(&study, 0.5, 1.0)?),
        ("storey (0.5)", FdrEstimator::storey(&study, 0.5)?),
        ("storey variant (0.5)", FdrEstimator::storey_variant(&study, 0.5)?),
    ];
    for alpha in [0.05, 0.1] {
        println!("alpha = {alpha}");
        for (name, est) in &estimators {
            let r = threshold(est, &process, alpha)?;
            println!(
                "  {name:<22} pi0 {:.4}  t {:.6}  FDR(t) {:.6}  R {}",
                r.pi0,
                r.t_alpha,
                r.fdr_at_t.unwrap_or(f64::NAN),
                r.rejections
            );
        }
        let bh = bh_procedure(&pvalues, alpha)?;
        println!("  {:<22} t {:.6}  R {}", "BH", bh.t_alpha, bh.rejections);
        let abh = adaptive_bh(&pvalues, alpha, &benjamini_pi0(&study)?)?;
        println!("  {:<22} t {:.6}  R {}", "adaptive BH", abh.t_alpha, abh.rejections);
    }

    // The threshold is where the estimator meets alpha exactly.
    let est = &estimators[0].1;
    let r = threshold(est, &process, 0.05)?;
    println!("\nf(t) - alpha at the generalized threshold: {:e}", est.evaluate(&process, r.t_alpha) - 0.05);
    Ok(())
}

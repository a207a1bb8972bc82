//! Estimating the proportion of true nulls from the bundled binomial count table.

use discrete_fdr::cli::CountInput;
use discrete_fdr::estimators::discreteness_gap;
use discrete_fdr::{
    benjamini_pi0, generalized_pi0, pounds_hat_pi0, pounds_tilde_pi0, storey_pi0, Epsilon, TestKind,
};

fn main() -> discrete_fdr::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/counts_bin.csv");
    let (_, study) = CountInput::new(path, TestKind::Bin).load()?;
    println!("{} features from {path}\n", study.m());

    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "lambda", "storey", "G eps=.5", "G eps=1", "gap");
    for lambda in [0.2, 0.35, 0.5, 0.65, 0.8] {
        println!(
            "{lambda:>6} {:>10.5} {:>10.5} {:>10.5} {:>10.3}",
            storey_pi0(&study, lambda)?.value,
            generalized_pi0(&study, lambda, 0.5)?.value,
            generalized_pi0(&study, lambda, 1.0)?.value,
            discreteness_gap(&study, lambda, &Epsilon::Constant(1.0)),
        );
    }

    println!("\npounds tilde {:.5}", pounds_tilde_pi0(&study).value);
    println!("pounds hat   {:.5}", pounds_hat_pi0(&study).value);
    println!("benjamini    {:.5}", benjamini_pi0(&study)?.value);

    // Correct only the hypotheses with small totals: epsilon per hypothesis.
    let eps: Vec<f64> = study.profiles().iter().map(|p| if p.support.len() < 8 { 1.0 } else { 0.0 }).collect();
    let g = generalized_pi0(&study, 0.5, Epsilon::PerHypothesis(eps))?;
    println!("G, small supports only {:.5}", g.value);
    Ok(())
}

//! Choosing (lambda, epsilon) by bootstrap on the bundled Fisher table.
//!
//! Keep the grid inside the region where the generalized estimator is still
//! conservative: with lambda near 1 and epsilon = 1 the estimate can be
//! clipped to 0 on every resample, which has zero MSE against a zero target.

use discrete_fdr::cli::CountInput;
use discrete_fdr::{bootstrap_tune, TestKind, TuningGrid};

fn main() -> discrete_fdr::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/counts_fet.csv");
    let (_, study) = CountInput::new(path, TestKind::Fet).load()?;

    let grid = TuningGrid::parse("0.2:0.6:0.1", "0:1:0.25", 200, 42)?;
    let r = bootstrap_tune(&study, &grid)?;
    println!("target (smallest full-sample estimate) {:.5}", r.target);
    println!("{:>7} {:>8} {:>10} {:>12}", "lambda", "epsilon", "estimate", "mse");
    for g in &r.mse {
        let mark = if (g.lambda, g.epsilon) == r.chosen { " <-" } else { "" };
        println!("{:>7.2} {:>8.2} {:>10.5} {:>12.3e}{mark}", g.lambda, g.epsilon, g.raw, g.mse);
    }
    println!("chosen {:?}, pi0 = {:.5}", r.chosen, r.estimate.value);

    // Epsilon fixed at 0 gives the classical choice of lambda for Storey's estimator.
    let storey = bootstrap_tune(&study, &TuningGrid::parse("0:0.95:0.05", "0", 200, 42)?)?;
    println!("storey only: lambda = {}, pi0 = {:.5}", storey.chosen.0, storey.estimate.value);
    Ok(())
}

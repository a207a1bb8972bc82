//! Exact bias of the generalized, Storey and Pounds estimators for one draw
//! of scenario parameters, by enumerating every count outcome.
//!
//! cargo run --release --example bias_decomposition -- [poisson|binomial] [pi0]

use discrete_fdr::sim::{bias_decomposition, ScenarioKind, ScenarioSpec};

fn main() -> discrete_fdr::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        Some("binomial") => ScenarioKind::BinomialFet,
        _ => ScenarioKind::PoissonBin,
    };
    let pi0: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.8);
    let mut spec = ScenarioSpec::new(kind, 1000, pi0);
    spec.seed = 2024;

    println!("{kind:?}, m = 1000, pi0 = {pi0}");
    println!("{:>7} {:>5} {:>11} {:>11} {:>11} {:>11}  0 <= bG <= bP", "lambda", "eps", "bG", "bS", "bP", "deficit");
    for lambda in [0.0, 0.2, 0.5, 0.8] {
        for eps in [0.0, 0.5, 1.0] {
            let d = bias_decomposition(&spec, lambda, eps, 400)?;
            println!(
                "{lambda:>7} {eps:>5} {:>11.5} {:>11.5} {:>11.5} {:>11.1e}  {}",
                d.b_generalized, d.b_storey, d.b_pounds, d.mass_deficit, d.condition_holds
            );
        }
    }
    Ok(())
}

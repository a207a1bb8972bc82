//! A small simulation study from a scenario file, with per-replication records.
//!
//! cargo run --release --example simulation -- [scenario.toml]

use discrete_fdr::sim::{run_replications, Procedure, Roster, ScenarioSpec};
use discrete_fdr::Pi0Method;

fn main() -> discrete_fdr::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/scenarios/binomial.toml").into());
    let mut spec = ScenarioSpec::from_file(path.as_ref())?;
    spec.reps = spec.reps.min(20);
    println!("{:?}: m = {}, pi0 = {}, {} reps, seed {}", spec.kind, spec.m, spec.pi0, spec.reps, spec.seed);

    let summary = run_replications(&spec, &Roster::default())?;
    for e in &summary.estimator_stats {
        println!("{:<14} mean excess {:+.4} (sd {:.4})", e.method.name(), e.excess.mean, e.excess.sd);
    }
    for p in &summary.procedure_stats {
        println!(
            "{:<14} alpha {:<6} mean FDP {:.4}  mean R {:.1}",
            p.procedure.name(),
            p.alpha,
            p.fdp.mean,
            p.rejections.mean
        );
    }

    // The raw samples are kept for custom summaries.
    let g = summary.excess(Pi0Method::Generalized);
    let below = g.iter().filter(|&&x| x < 0.0).count();
    println!("generalized estimate below pi0 in {below} of {} reps", g.len());
    let fdp = summary.fdp(Procedure::Generalized, spec.alpha_levels[0]);
    println!("FDP at alpha {}: {:?}", spec.alpha_levels[0], fdp.iter().map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    Ok(())
}

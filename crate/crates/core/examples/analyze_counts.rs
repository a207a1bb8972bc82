//! The `analyze` command as a library call: a count table in, the results
//! table out.
//!
//! cargo run --example analyze_counts -- [table] [bin|fet|ent] [size]

use discrete_fdr::cli::{analyze, AnalyzeConfig, CountInput};
use discrete_fdr::TestKind;

fn main() -> discrete_fdr::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/counts_ent.tsv").into());
    let test: TestKind = args.next().as_deref().unwrap_or("ent").parse()?;
    let mut input = CountInput::new(path, test);
    input.size = Some(args.next().and_then(|s| s.parse().ok()).unwrap_or(0.7));
    if test != TestKind::Ent {
        input.size = None;
    }
    input.min_total = Some(1);

    let report = analyze(&AnalyzeConfig { input, lambda: 0.5, epsilon: 1.0, alphas: vec![0.05, 0.1] })?;
    print!("{}", report.render());

    let mut smallest: Vec<_> = report.features.iter().collect();
    smallest.sort_by(|a, b| a.pvalue.total_cmp(&b.pvalue));
    println!("\nsmallest p-values:");
    for f in smallest.iter().take(5) {
        println!("  {:<8} {:.3e}  ({} attainable values)", f.id, f.pvalue, f.support.len());
    }
    Ok(())
}

//! The three exact tests, their p-values and null supports, under both
//! two-sided conventions.

use discrete_fdr::exact::{binomial_test_with, fisher_test_with, nb_exact_test_with};
use discrete_fdr::TwoSided;

fn show(label: &str, r: &discrete_fdr::TestResult) {
    let head: Vec<String> = r.support.iter().take(6).map(|s| format!("{s:.4}")).collect();
    println!(
        "{label:<40} p = {:<10.6} |support| = {:<3} [{}{}]",
        r.pvalue,
        r.support.len(),
        head.join(", "),
        if r.support.len() > 6 { ", ..." } else { "" }
    );
}

fn main() -> discrete_fdr::Result<()> {
    for conv in [TwoSided::MinLikelihood, TwoSided::Doubling] {
        println!("{conv:?}");
        // Poisson counts 9 and 2: binomial test of the split given the total 11.
        show("binomial, counts 9 vs 2", &binomial_test_with(9, 2, conv));
        // 7 of 10 versus 1 of 8 successes.
        show("Fisher, 7/10 vs 1/8", &fisher_test_with(7, 10, 1, 8, conv)?);
        // Replicate sums 14 and 3 over three samples each, NB size 2 per sample.
        show("negative binomial, sums 14 vs 3", &nb_exact_test_with(14, 3, 2.0, 3, conv)?);
        println!();
    }

    // Tiny totals leave few attainable p-values; that is the discreteness the
    // estimators correct for.
    for n in [1, 2, 3, 5, 10] {
        let r = binomial_test_with(n, 0, TwoSided::MinLikelihood);
        println!("total {n:>2}: smallest attainable p = {:.5}, support {:?}", r.support[0], r.support);
    }
    Ok(())
}

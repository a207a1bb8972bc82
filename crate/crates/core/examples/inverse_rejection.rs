//! The scaled inverse rejection process L(t) = t / (R(t) v 1): its piecewise
//! form and the downward jumps at repeated p-values.

use discrete_fdr::{counterexample_instance, RejectionProcess};

fn main() -> discrete_fdr::Result<()> {
    let p = counterexample_instance();
    println!("p-values: {p:?}");
    let proc = RejectionProcess::new(&p)?;

    println!("\n{:>6} {:>5} {:>5} {:>12} {:>12} {:>12}", "p(j)", "n_j", "R", "L(p-)", "L(p)", "jump");
    for (j, &d) in proc.distinct().iter().enumerate() {
        println!(
            "{d:>6} {:>5} {:>5} {:>12.6} {:>12.6} {:>12.6}",
            proc.multiplicities()[j],
            proc.cumulative()[j],
            proc.left_limit(j),
            proc.inverse_rejection(d),
            proc.jump(j)
        );
    }

    println!("\nL on a grid:");
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        println!("  L({t:.1}) = {:.5}  R = {}", proc.inverse_rejection(t), proc.rejections(t));
    }
    Ok(())
}

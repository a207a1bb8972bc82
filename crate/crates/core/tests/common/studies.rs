//! Random studies with random discrete supports.

use discrete_fdr::{PValueProfile, Study};
use rand::Rng;

/// A random support: `k` distinct points in (0, 1) plus 1.
pub fn random_support<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..k).map(|_| rng.random_range(0.001..0.999)).collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    s.push(1.0);
    s
}

/// A profile whose p-value is drawn from a random support; with
/// probability `empty` the support is empty and the p-value uniform.
pub fn random_profile<R: Rng>(rng: &mut R, empty: f64) -> PValueProfile {
    if rng.random_bool(empty) {
        return PValueProfile::uniform(rng.random_range(1e-6..=1.0));
    }
    let k = rng.random_range(0..8);
    let support = random_support(rng, k);
    // Small p-values more often, as under alternatives.
    let idx = if rng.random_bool(0.3) { 0 } else { rng.random_range(0..support.len()) };
    PValueProfile::new(support[idx], support).unwrap()
}

pub fn random_study<R: Rng>(rng: &mut R, max_m: usize, empty: f64) -> Study {
    let m = rng.random_range(1..=max_m);
    Study::new((0..m).map(|_| random_profile(rng, empty)).collect()).unwrap()
}

/// A study in which every p-value has an empty support.
pub fn continuous_study<R: Rng>(rng: &mut R, max_m: usize) -> Study {
    random_study(rng, max_m, 1.0)
}

/// Continuous p-values: uniform for the first `round(pi0 m)`, skewed to zero after.
pub fn uniform_null_study(seed: u64, m: usize, pi0: f64) -> Study {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m0 = (pi0 * m as f64).round() as usize;
    let p: Vec<f64> = (0..m)
        .map(|i| {
            let u: f64 = rng.random_range(1e-9..=1.0);
            if i < m0 { u } else { u.powi(6) }
        })
        .collect();
    Study::from_pvalues(&p).unwrap()
}

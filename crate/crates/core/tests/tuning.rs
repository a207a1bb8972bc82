mod common;

use common::oracle::storey_bootstrap;
use common::studies::uniform_null_study;
use discrete_fdr::tuning::parse_values;
use discrete_fdr::{bootstrap_tune, storey_pi0, TuningGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn zero_epsilon_grid_reduces_to_storey_bootstrap() {
    let lambdas = parse_values("0:0.95:0.05").unwrap();
    assert_eq!(lambdas.len(), 20);
    for seed in 0..10 {
        let study = uniform_null_study(seed, 400, 0.5 + 0.04 * seed as f64);
        let grid = TuningGrid::product(&lambdas, &[0.0], 60, seed).unwrap();
        let ours = bootstrap_tune(&study, &grid).unwrap();
        let (l, est) = storey_bootstrap(&study.pvalues(), &lambdas, 60, seed);
        assert_eq!(ours.chosen, (l, 0.0), "seed {seed}");
        assert!((ours.estimate.value - est).abs() < 1e-12, "seed {seed}: {} vs {est}", ours.estimate.value);
        assert_eq!(ours.estimate.value, storey_pi0(&study, l).unwrap().value);
    }
}

#[test]
fn result_does_not_depend_on_thread_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let study = common::studies::random_study(&mut rng, 120, 0.0);
    let grid = TuningGrid::parse("0:0.9:0.1", "0:1:0.25", 40, 77).unwrap();
    let one = in_pool(1, || bootstrap_tune(&study, &grid).unwrap());
    let four = in_pool(4, || bootstrap_tune(&study, &grid).unwrap());
    assert_eq!(one, four);
}

#[test]
fn chosen_point_attains_minimum_mse() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let study = common::studies::random_study(&mut rng, 80, 0.0);
        if study.m() < 2 {
            continue;
        }
        let grid = TuningGrid::parse("0.1:0.8:0.1", "0,0.5,1", 30, 3).unwrap();
        let r = bootstrap_tune(&study, &grid).unwrap();
        let min = r.mse.iter().map(|g| g.mse).fold(f64::INFINITY, f64::min);
        let chosen = r.mse.iter().find(|g| (g.lambda, g.epsilon) == r.chosen).unwrap();
        assert_eq!(chosen.mse, min);
        assert!(r.mse.iter().all(|g| g.mse >= 0.0 && g.raw >= r.target));
        assert!((0.0..=1.0).contains(&r.estimate.value));
    }
}

#[test]
fn different_seeds_give_different_scores() {
    let study = uniform_null_study(1, 200, 0.7);
    let a = bootstrap_tune(&study, &TuningGrid::parse("0.5", "0", 50, 1).unwrap()).unwrap();
    let b = bootstrap_tune(&study, &TuningGrid::parse("0.5", "0", 50, 2).unwrap()).unwrap();
    assert_ne!(a.mse[0].mse, b.mse[0].mse);
    assert_eq!(a.estimate, b.estimate);
}

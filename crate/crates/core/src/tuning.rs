//! Bootstrap selection of `(lambda, epsilon)` for the generalized estimator.
//!
//! For every grid point the full-sample estimate is computed, then `B`
//! bootstrap resamples of the hypotheses (each p-value travels with its null
//! support) give replicate estimates. The mean squared error of the
//! replicates is measured against the smallest full-sample estimate over the
//! grid, and the grid point with the smallest MSE wins. Ties go to the
//! smaller `lambda`, then the smaller `epsilon`. Replicates, target and MSE
//! use the unclipped estimator; only the reported estimate is clipped.
//!
//! # Random streams
//!
//! Grid point `g` draws its resamples from [`grid_rng`]`(seed, g)`: a
//! ChaCha20 generator seeded with `seed` and switched to stream `g`. Each
//! replicate draws `m` indices with `random_range(0..m)`. Points therefore do
//! not share random numbers, and results do not depend on how many threads
//! evaluate the grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::estimators::{generalized_pi0, Pi0Estimate, Study};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningGrid {
    /// `(lambda, epsilon)` pairs.
    pub points: Vec<(f64, f64)>,
    /// Bootstrap replicates per point.
    pub bootstrap: usize,
    pub seed: u64,
}

impl TuningGrid {
    pub fn new(points: Vec<(f64, f64)>, bootstrap: usize, seed: u64) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("tuning grid is empty"));
        }
        if bootstrap == 0 {
            return Err(invalid("at least one bootstrap replicate is required"));
        }
        for &(lambda, eps) in &points {
            if !(0.0..1.0).contains(&lambda) {
                return Err(invalid(format!("grid lambda {lambda} outside [0, 1)")));
            }
            if !(0.0..=1.0).contains(&eps) {
                return Err(invalid(format!("grid epsilon {eps} outside [0, 1]")));
            }
        }
        Ok(TuningGrid {
            points,
            bootstrap,
            seed,
        })
    }

    /// Cartesian product of `lambdas` and `epsilons`, lambda-major.
    pub fn product(lambdas: &[f64], epsilons: &[f64], bootstrap: usize, seed: u64) -> Result<Self> {
        let points = lambdas
            .iter()
            .flat_map(|&l| epsilons.iter().map(move |&e| (l, e)))
            .collect();
        Self::new(points, bootstrap, seed)
    }

    /// Builds a grid from two value specs, see [`parse_values`].
    pub fn parse(lambda_spec: &str, epsilon_spec: &str, bootstrap: usize, seed: u64) -> Result<Self> {
        Self::product(
            &parse_values(lambda_spec)?,
            &parse_values(epsilon_spec)?,
            bootstrap,
            seed,
        )
    }
}

/// Parses a comma-separated list whose items are numbers or inclusive ranges
/// `start:stop:step`, e.g. `0:0.95:0.05` or `0,0.5,1`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| invalid(format!("malformed grid {spec:?}: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("{s:?} is not a number")));
    let mut out = Vec::new();
    for item in spec.split(',') {
        if item.trim().is_empty() {
            return Err(bad("empty item"));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if !(step > 0.0) || stop < start {
                    return Err(bad("ranges need start <= stop and a positive step"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounded to 12 decimals so that 0:0.95:0.05 ends at exactly 0.95.
                out.extend((0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12));
            }
            _ => return Err(bad("expected a number or start:stop:step")),
        }
    }
    Ok(out)
}

/// The random stream used for grid point `index`.
pub fn grid_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridScore {
    pub lambda: f64,
    pub epsilon: f64,
    /// Unclipped full-sample estimate at this point.
    pub raw: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningResult {
    pub chosen: (f64, f64),
    pub estimate: Pi0Estimate,
    /// Smallest unclipped full-sample estimate over the grid, the MSE target.
    pub target: f64,
    pub mse: Vec<GridScore>,
    pub bootstrap: usize,
    pub seed: u64,
}

/// Per-hypothesis terms of the generalized estimator at one grid point.
struct PointTerms {
    above: Vec<bool>,
    gap: Vec<f64>,
    scale: f64,
}

impl PointTerms {
    fn new(study: &Study, lambda: f64, epsilon: f64) -> Self {
        let profiles = study.profiles();
        PointTerms {
            above: profiles.iter().map(|p| p.pvalue > lambda).collect(),
            gap: profiles
                .iter()
                .map(|p| epsilon * (lambda - p.null_cdf(lambda)))
                .collect(),
            scale: (1.0 - lambda) * profiles.len() as f64,
        }
    }

    fn estimate(&self, indices: &[usize]) -> f64 {
        let count = indices.iter().filter(|&&i| self.above[i]).count() as f64;
        let gap: f64 = indices.iter().map(|&i| self.gap[i]).sum();
        (count - gap) / self.scale
    }
}

pub fn bootstrap_tune(study: &Study, grid: &TuningGrid) -> Result<TuningResult> {
    let m = study.m();
    if m < 2 {
        return Err(invalid("bootstrap tuning needs at least two hypotheses"));
    }
    let full: Vec<Pi0Estimate> = grid
        .points
        .iter()
        .map(|&(l, e)| generalized_pi0(study, l, e))
        .collect::<Result<_>>()?;
    let target = full.iter().map(|e| e.raw).fold(f64::INFINITY, f64::min);

    let mse: Vec<f64> = grid
        .points
        .par_iter()
        .enumerate()
        .map(|(g, &(lambda, eps))| {
            let terms = PointTerms::new(study, lambda, eps);
            let mut rng = grid_rng(grid.seed, g);
            let mut indices = vec![0; m];
            let mut sum = 0.0;
            for _ in 0..grid.bootstrap {
                for slot in indices.iter_mut() {
                    *slot = rng.random_range(0..m);
                }
                let d = terms.estimate(&indices) - target;
                sum += d * d;
            }
            sum / grid.bootstrap as f64
        })
        .collect();

    let scores: Vec<GridScore> = grid
        .points
        .iter()
        .zip(&full)
        .zip(&mse)
        .map(|((&(lambda, epsilon), est), &mse)| GridScore {
            lambda,
            epsilon,
            raw: est.raw,
            mse,
        })
        .collect();
    let best = (0..scores.len())
        .min_by(|&a, &b| {
            let (x, y) = (&scores[a], &scores[b]);
            x.mse
                .total_cmp(&y.mse)
                .then(x.lambda.total_cmp(&y.lambda))
                .then(x.epsilon.total_cmp(&y.epsilon))
        })
        .expect("grid is nonempty");

    Ok(TuningResult {
        chosen: grid.points[best],
        estimate: full[best].clone(),
        target,
        mse: scores,
        bootstrap: grid.bootstrap,
        seed: grid.seed,
    })
}

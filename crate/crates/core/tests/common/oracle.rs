//! Brute-force reference implementations of the exact tests.
//!
//! Binomial and hypergeometric weights are exact integers (Pascal's
//! triangle), so ties are decided exactly. Negative binomial weights come
//! from the pmf recursion `f(k + 1) = f(k) (k + shape) / (k + 1) (1 - q)`.

use discrete_fdr::exact::{
    binomial_null, binomial_test_with, fisher_null, fisher_test_with, nb_exact_test_with, nb_null, NullLaw,
    TestResult, TwoSided,
};

pub const MAX_TOTAL: u64 = 30;

pub fn pascal(n: u64) -> Vec<Vec<u128>> {
    let mut rows = vec![vec![1u128]];
    for i in 1..=n as usize {
        let prev = &rows[i - 1];
        let mut row = vec![1u128; i + 1];
        for k in 1..i {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows
}

/// Outcome probabilities and two-sided p-values of a finite law.
#[derive(Debug, Clone)]
pub struct BruteLaw {
    pub probs: Vec<f64>,
    pub pvalues: Vec<f64>,
}

impl BruteLaw {
    /// Distinct p-values, values within a relative 1e-12 counted once.
    pub fn support(&self) -> Vec<f64> {
        let mut s = self.pvalues.clone();
        s.sort_by(f64::total_cmp);
        s.dedup_by(|b, a| *b <= *a * (1.0 + 1e-12));
        if s.last() != Some(&1.0) {
            s.push(1.0);
        }
        s
    }
}

fn from_integer_weights(w: &[u128], conv: TwoSided) -> BruteLaw {
    let total: u128 = w.iter().sum();
    let probs = w.iter().map(|&x| x as f64 / total as f64).collect();
    let pvalues = match conv {
        TwoSided::MinLikelihood => w
            .iter()
            .map(|&wa| {
                let mass: u128 = w.iter().filter(|&&wb| wb <= wa).sum();
                mass as f64 / total as f64
            })
            .collect(),
        TwoSided::Doubling => (0..w.len())
            .map(|a| {
                let lower: u128 = w[..=a].iter().sum();
                let upper: u128 = w[a..].iter().sum();
                (2.0 * lower.min(upper) as f64 / total as f64).min(1.0)
            })
            .collect(),
    };
    BruteLaw { probs, pvalues }
}

fn from_float_weights(w: &[f64], conv: TwoSided) -> BruteLaw {
    let total: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    let pvalues = match conv {
        TwoSided::MinLikelihood => w
            .iter()
            .map(|&wa| {
                let mass: f64 = w.iter().filter(|&&wb| wb <= wa * (1.0 + 1e-12)).sum();
                (mass / total).min(1.0)
            })
            .collect(),
        TwoSided::Doubling => (0..w.len())
            .map(|a| {
                let lower: f64 = w[..=a].iter().sum();
                let upper: f64 = w[a..].iter().sum();
                let p = (2.0 * lower.min(upper) / total).min(1.0);
                if p >= 1.0 - 1e-12 {
                    1.0
                } else {
                    p
                }
            })
            .collect(),
    };
    BruteLaw { probs, pvalues }
}

pub fn brute_binomial(rows: &[Vec<u128>], n: u64, conv: TwoSided) -> BruteLaw {
    from_integer_weights(&rows[n as usize], conv)
}

/// Law of `x1` over `lo..=hi` given trials `r1`, `r2` and total `s`.
pub fn brute_fisher(rows: &[Vec<u128>], r1: u64, r2: u64, s: u64, conv: TwoSided) -> (u64, BruteLaw) {
    let lo = s.saturating_sub(r2);
    let hi = s.min(r1);
    let w: Vec<u128> = (lo..=hi)
        .map(|a| rows[r1 as usize][a as usize] * rows[r2 as usize][(s - a) as usize])
        .collect();
    (lo, from_integer_weights(&w, conv))
}

pub fn nb_pmf_table(shape: f64, mean: f64, kmax: u64) -> Vec<f64> {
    let q = shape / (shape + mean);
    let mut f = vec![q.powf(shape)];
    for k in 0..kmax {
        let next = f[k as usize] * (k as f64 + shape) / (k as f64 + 1.0) * (1.0 - q);
        f.push(next);
    }
    f
}

pub fn brute_nb(s: u64, size: f64, reps: u32, conv: TwoSided) -> BruteLaw {
    let shape = size * reps as f64;
    let f = nb_pmf_table(shape, s as f64 / 2.0, s);
    let w: Vec<f64> = (0..=s).map(|a| f[a as usize] * f[(s - a) as usize]).collect();
    from_float_weights(&w, conv)
}

/// Tally of an oracle sweep.
#[derive(Debug, Default)]
pub struct Sweep {
    pub outcomes: usize,
    pub failures: Vec<String>,
}

impl Sweep {
    fn fail(&mut self, msg: String) {
        if self.failures.len() < 20 {
            self.failures.push(msg);
        }
    }

    fn compare(&mut self, label: &str, got: &TestResult, law: &BruteLaw, idx: usize, tol: f64) {
        self.outcomes += 1;
        let want = law.pvalues[idx];
        if (got.pvalue - want).abs() > tol {
            self.fail(format!("{label}: p {} vs brute {}", got.pvalue, want));
        }
        let support = law.support();
        if support.len() != got.support.len()
            || support.iter().zip(&got.support).any(|(a, b)| (a - b).abs() > tol)
        {
            self.fail(format!("{label}: support {:?} vs brute {:?}", got.support, support));
        }
        if !got.support.contains(&got.pvalue) || got.support.last() != Some(&1.0) {
            self.fail(format!("{label}: p-value not in support or max != 1"));
        }
    }

    /// Checks `P(p <= t) <= t` at every support point and midpoint. Under the
    /// minimum-likelihood convention also `P(p <= t)` = the largest support
    /// point `<= t`; doubled p-values are only conservative.
    fn dominate(&mut self, label: &str, law: &NullLaw, conv: TwoSided, tol: f64) {
        let support = law.support();
        let cdf = |t: f64| -> f64 {
            law.probs
                .iter()
                .zip(&law.pvalues)
                .filter(|(_, &p)| p <= t)
                .map(|(q, _)| q)
                .sum()
        };
        let mut probes: Vec<f64> = support.clone();
        let mut prev = 0.0;
        for &s in &support {
            probes.push((prev + s) / 2.0);
            prev = s;
        }
        for t in probes {
            let f = cdf(t);
            let step = support.iter().copied().filter(|&s| s <= t).fold(0.0, f64::max);
            let exact = conv == TwoSided::MinLikelihood;
            if (exact && (f - step).abs() > tol) || f > t + tol {
                self.fail(format!("{label}: F*({t}) = {f}, largest support point {step}"));
            }
        }
    }
}

pub const NB_SIZES: [f64; 3] = [0.4, 1.0, 2.5];
pub const NB_REPS: [u32; 2] = [1, 3];

/// Every binomial, Fisher and NB instance with conditioned total at most
/// `MAX_TOTAL`, under both conventions, against brute force.
pub fn sweep_all(tol: f64) -> Sweep {
    let rows = pascal(MAX_TOTAL);
    let mut sw = Sweep::default();
    for conv in [TwoSided::MinLikelihood, TwoSided::Doubling] {
        for n in 1..=MAX_TOTAL {
            let law = brute_binomial(&rows, n, conv);
            for a in 0..=n {
                let got = binomial_test_with(a, n - a, conv);
                sw.compare(&format!("bin({a},{}) {conv:?}", n - a), &got, &law, a as usize, tol);
            }
            sw.dominate(&format!("bin n={n}"), &binomial_null(n, conv), conv, tol);
        }
        for r1 in 1..=MAX_TOTAL {
            for r2 in 1..=(MAX_TOTAL - r1).max(1) {
                for s in 0..=(r1 + r2).min(MAX_TOTAL) {
                    let (lo, law) = brute_fisher(&rows, r1, r2, s, conv);
                    let hi = s.min(r1);
                    for a in lo..=hi {
                        let got = fisher_test_with(a, r1, s - a, r2, conv).unwrap();
                        if law.probs.len() == 1 {
                            sw.outcomes += 1;
                            if got != TestResult::degenerate() {
                                sw.fail(format!("fet({a},{r1},{},{r2}) should be degenerate", s - a));
                            }
                            continue;
                        }
                        let label = format!("fet({a},{r1},{},{r2}) {conv:?}", s - a);
                        sw.compare(&label, &got, &law, (a - lo) as usize, tol);
                    }
                    sw.dominate(&format!("fet {r1} {r2} {s}"), &fisher_null(r1, r2, s, conv).unwrap(), conv, tol);
                }
            }
        }
        for size in NB_SIZES {
            for reps in NB_REPS {
                for s in 1..=MAX_TOTAL {
                    let law = brute_nb(s, size, reps, conv);
                    for a in 0..=s {
                        let got = nb_exact_test_with(a, s - a, size, reps, conv).unwrap();
                        let label = format!("ent({a},{},{size},{reps}) {conv:?}", s - a);
                        sw.compare(&label, &got, &law, a as usize, tol);
                    }
                    sw.dominate(&format!("ent {s} {size} {reps}"), &nb_null(s, size, reps, conv).unwrap(), conv, tol);
                }
            }
        }
    }
    sw
}

/// Storey, Taylor and Siegmund's bootstrap choice of lambda on plain
/// p-values, drawing resamples for `lambdas[g]` from `grid_rng(seed, g)`.
/// Returns `(lambda, min(1, estimate))`.
pub fn storey_bootstrap(p: &[f64], lambdas: &[f64], b: usize, seed: u64) -> (f64, f64) {
    use rand::Rng;
    let m = p.len();
    let est = |xs: &mut dyn Iterator<Item = f64>, l: f64| xs.filter(|&x| x > l).count() as f64 / ((1.0 - l) * m as f64);
    let full: Vec<f64> = lambdas.iter().map(|&l| est(&mut p.iter().copied(), l)).collect();
    let min = full.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = (f64::INFINITY, 0);
    for (g, &l) in lambdas.iter().enumerate() {
        let mut rng = discrete_fdr::tuning::grid_rng(seed, g);
        let mut mse = 0.0;
        for _ in 0..b {
            let sample: Vec<f64> = (0..m).map(|_| p[rng.random_range(0..m)]).collect();
            mse += (est(&mut sample.into_iter(), l) - min).powi(2);
        }
        mse /= b as f64;
        if mse < best.0 {
            best = (mse, g);
        }
    }
    (lambdas[best.1], full[best.1].min(1.0))
}

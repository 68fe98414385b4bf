//! Monte Carlo sampling of the largest GUE eigenvalue.
//!
//! Uses the β = 2 tridiagonal model: diagonal entries `N(0, 1/2)` and
//! sub-diagonal entry `k` distributed as `χ_{2(n-k)} / 2`, whose eigenvalue
//! density is proportional to `e^{-Σλ²} Π|λ_i - λ_j|²`. The top eigenvalue
//! comes from Sturm-count bisection.
//!
//! Draws are generated in partitions of [`PARTITION`] samples. Partition `p`
//! uses a ChaCha8 stream seeded from the master seed with stream id `p`, so
//! the parallel and sequential samplers produce the same sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::hermite_n::ScalingMap;

/// Samples per RNG partition.
pub const PARTITION: usize = 4096;
/// Minimum number of draws accepted by [`empirical_cdf`].
pub const MIN_DRAWS: usize = 100;

/// How draws are reported.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Scaling {
    /// `λ_max` itself.
    Raw,
    /// `(λ_max - √(2(n+c))) √2 n^{1/6}` for the given `c`.
    Centered(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub num_samples: usize,
    pub seed: u64,
    pub scaling: Scaling,
}

impl SamplerConfig {
    pub fn raw(n: usize, num_samples: usize, seed: u64) -> Self {
        SamplerConfig {
            n,
            num_samples,
            seed,
            scaling: Scaling::Raw,
        }
    }

    fn validate(&self) -> Result<Option<ScalingMap>> {
        if self.n < 1 {
            return Err(invalid("n", "must be at least 1"));
        }
        match self.scaling {
            Scaling::Raw => Ok(None),
            Scaling::Centered(c) => Ok(Some(ScalingMap::new(self.n, c)?)),
        }
    }
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal `a`
/// and off-diagonal `b` (`b.len() + 1 == a.len()`).
pub fn top_eigenvalue(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    debug_assert_eq!(b.len() + 1, n.max(1));
    if n == 1 {
        return a[0];
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < n { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    // invariant: count_below(lo) < n, count_below(hi) == n
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(a, b, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Number of eigenvalues strictly below `x` (Sturm sequence of pivots).
fn count_below(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = a[0] - x;
    for i in 0..a.len() {
        if i > 0 {
            d = a[i] - x - b[i - 1] * b[i - 1] / d;
        }
        if d == 0.0 {
            d = -f64::EPSILON * (a[i].abs() + x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn partition_rng(seed: u64, partition: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition as u64);
    rng
}

fn draw_partition(
    cfg: &SamplerConfig,
    map: Option<ScalingMap>,
    partition: usize,
    len: usize,
) -> Vec<f64> {
    let n = cfg.n;
    let mut rng = partition_rng(cfg.seed, partition);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    let gammas: Vec<Gamma<f64>> = (1..n)
        .map(|k| Gamma::new((n - k) as f64, 1.0).expect("valid gamma"))
        .collect();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n.saturating_sub(1)];
    (0..len)
        .map(|_| {
            for ai in a.iter_mut() {
                *ai = normal.sample(&mut rng);
            }
            // χ_{2(n-k)}/2 = √(2 Gamma(n-k, 1)) / 2
            for (bk, g) in b.iter_mut().zip(&gammas) {
                *bk = (g.sample(&mut rng) / 2.0).sqrt();
            }
            let top = top_eigenvalue(&a, &b);
            match map {
                Some(m) => m.inverse(top),
                None => top,
            }
        })
        .collect()
}

fn partitions(total: usize) -> Vec<(usize, usize)> {
    (0..total.div_ceil(PARTITION))
        .map(|p| (p, PARTITION.min(total - p * PARTITION)))
        .collect()
}

/// Draws `num_samples` values of `λ_max`, partitions in parallel.
pub fn sample_lambda_max(cfg: &SamplerConfig) -> Result<Vec<f64>> {
    let map = cfg.validate()?;
    let parts: Vec<Vec<f64>> = partitions(cfg.num_samples)
        .into_par_iter()
        .map(|(p, len)| draw_partition(cfg, map, p, len))
        .collect();
    Ok(parts.concat())
}

/// Single-threaded reference producing the same stream as [`sample_lambda_max`].
pub fn sample_lambda_max_sequential(cfg: &SamplerConfig) -> Result<Vec<f64>> {
    let map = cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.num_samples);
    for (p, len) in partitions(cfg.num_samples) {
        out.extend(draw_partition(cfg, map, p, len));
    }
    Ok(out)
}

/// Fraction of draws `≤ t` and a 3σ binomial half-width.
///
/// The half-width uses the Agresti–Coull centre `(k + 2)/(N + 4)` so it stays
/// positive when every draw falls on one side of `t`.
pub fn empirical_cdf(draws: &[f64], t: f64) -> Result<(f64, f64)> {
    if draws.len() < MIN_DRAWS {
        return Err(invalid(
            "draws",
            format!("need at least {MIN_DRAWS}, got {}", draws.len()),
        ));
    }
    let n = draws.len() as f64;
    let k = draws.iter().filter(|&&x| x <= t).count() as f64;
    let p = (k + 2.0) / (n + 4.0);
    Ok((k / n, 3.0 * (p * (1.0 - p) / n).sqrt()))
}

/// `max_t |F_emp(t) - F(t)|` over the grid.
pub fn ks_distance(draws: &[f64], grid: &[f64], cdf: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in grid {
        let (e, _) = empirical_cdf(draws, t)?;
        worst = worst.max((e - cdf(t)?).abs());
    }
    Ok(worst)
}

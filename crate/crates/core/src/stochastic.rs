//! Normalized partial-sum paths `t -> sum_{x < n <= x + tH} (a_n - mean)` and the
//! variance-scaling (Hurst) diagnostic.
//!
//! Squarefree paths are scaled by `H^{-1/4}`, prime paths (with `a_p = log p`
//! and mean 1) and the synthetic `+-1` hook by `H^{-1/2}`.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::six_over_pi2;
use crate::error::{LabError, Result};
use crate::par::{map_blocks, pairwise_sum, CompensatedSum, Workers};
use crate::sieve::{prime_flags_into, squarefree_flags_into, BasePrimes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SeriesKind {
    Squarefree,
    Prime,
    /// Independent fair signs: `a_n` is the low bit of word `n` of a ChaCha8
    /// stream, mapped to `+-1`. Has independent increments, so Hurst 1/2.
    Synthetic {
        seed: u64,
    },
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesKind::Squarefree => f.write_str("squarefree"),
            SeriesKind::Prime => f.write_str("prime"),
            SeriesKind::Synthetic { seed } => write!(f, "synthetic(seed={seed})"),
        }
    }
}

impl SeriesKind {
    fn exponent(self) -> f64 {
        match self {
            SeriesKind::Squarefree => 0.25,
            SeriesKind::Prime | SeriesKind::Synthetic { .. } => 0.5,
        }
    }

    /// Exact for squarefree and synthetic windows, which are integer sums.
    fn integer_valued(self) -> bool {
        !matches!(self, SeriesKind::Prime)
    }

    fn mean(self) -> f64 {
        match self {
            SeriesKind::Squarefree => six_over_pi2(),
            SeriesKind::Prime => 1.0,
            SeriesKind::Synthetic { .. } => 0.0,
        }
    }
}

/// Per-`n` terms of a series over `(lo, lo + len]`, sharing the sieve tables.
struct Terms {
    kind: SeriesKind,
    base: Option<BasePrimes>,
}

enum Block {
    Counts(Vec<u8>),
    Primes(Vec<bool>),
    Signs(Vec<i8>),
}

impl Terms {
    fn new(kind: SeriesKind, end: u64) -> Self {
        let base = match kind {
            SeriesKind::Synthetic { .. } => None,
            _ => Some(BasePrimes::for_segment_end(end)),
        };
        Terms { kind, base }
    }

    /// The terms for `n = start, ..., start + len - 1`.
    fn block(&self, start: u64, len: usize) -> Block {
        match self.kind {
            SeriesKind::Squarefree => {
                let mut flags = vec![0u8; len];
                squarefree_flags_into(start, self.base.as_ref().unwrap(), &mut flags);
                Block::Counts(flags)
            }
            SeriesKind::Prime => {
                let mut flags = vec![false; len];
                prime_flags_into(start, self.base.as_ref().unwrap(), &mut flags);
                Block::Primes(flags)
            }
            SeriesKind::Synthetic { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_word_pos(start as u128);
                Block::Signs((0..len).map(|_| if rng.next_u32() & 1 == 1 { 1 } else { -1 }).collect())
            }
        }
    }
}

/// Running raw sums `sum a_n` over a block, read off at increasing offsets.
///
/// Returns, for each offset `k`, the sum of the first `k` terms minus `k * mean`
/// for the prime series and the plain integer sum otherwise.
fn prefix_at(block: &Block, start: u64, offsets: &[u64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(offsets.len());
    match block {
        Block::Counts(flags) => {
            let mut run = 0u64;
            let mut i = 0usize;
            for &k in offsets {
                while (i as u64) < k {
                    run += flags[i] as u64;
                    i += 1;
                }
                out.push(run as f64);
            }
        }
        Block::Signs(signs) => {
            let mut run = 0i64;
            let mut i = 0usize;
            for &k in offsets {
                while (i as u64) < k {
                    run += signs[i] as i64;
                    i += 1;
                }
                out.push(run as f64);
            }
        }
        Block::Primes(flags) => {
            let mut acc = CompensatedSum::default();
            let mut i = 0usize;
            for &k in offsets {
                while (i as u64) < k {
                    if flags[i] {
                        acc.add(((start + i as u64) as f64).ln());
                    }
                    i += 1;
                }
                out.push(acc.value() - k as f64);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSeries {
    pub kind: SeriesKind,
    pub x: u64,
    #[serde(rename = "H")]
    pub h: u64,
    pub t_grid: Vec<f64>,
    /// `floor(t_i H)`, the number of integers summed at each grid point.
    pub offsets: Vec<u64>,
    pub values: Vec<f64>,
}

/// The normalized path on the grid `t_i = i t_max / steps`, `i = 0..=steps`.
pub fn path_sample(kind: SeriesKind, x: u64, h: u64, t_max: f64, steps: u64) -> Result<PathSeries> {
    if steps < 1 {
        return Err(LabError::argument("steps must be at least 1"));
    }
    if h < 1 {
        return Err(LabError::argument("H must be at least 1"));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(LabError::argument(format!("t_max must be finite and nonnegative, got {t_max}")));
    }
    let span = t_max * h as f64;
    if span >= (1u64 << 52) as f64 || x.checked_add(span as u64 + 2).is_none() {
        return Err(LabError::range("x + t_max H overflows"));
    }
    let t_grid: Vec<f64> =
        if t_max == 0.0 { vec![0.0] } else { (0..=steps).map(|i| i as f64 * t_max / steps as f64).collect() };
    let offsets: Vec<u64> = t_grid.iter().map(|&t| (t * h as f64).floor() as u64).collect();
    let len = *offsets.last().unwrap();
    let terms = Terms::new(kind, x + len + 2);
    let block = terms.block(x + 1, len as usize);
    let raw = prefix_at(&block, x + 1, &offsets);
    let scale = (h as f64).powf(-kind.exponent());
    let mean = kind.mean();
    let values = raw
        .iter()
        .zip(&offsets)
        .map(|(&s, &k)| match kind {
            SeriesKind::Squarefree => (s - k as f64 * mean) * scale,
            _ => s * scale,
        })
        .collect();
    Ok(PathSeries { kind, x, h, t_grid, offsets, values })
}

/// Writes a path as CSV `t,value` under a comment header with the parameters.
pub fn write_path_csv(path: &PathSeries, w: &mut impl Write) -> std::io::Result<()> {
    let t_max = path.t_grid.last().copied().unwrap_or(0.0);
    let steps = path.t_grid.len().saturating_sub(1);
    writeln!(w, "# kind={} x={} H={} t_max={t_max} steps={steps}", path.kind, path.x, path.h)?;
    writeln!(w, "# the path is constant between lattice points t = k/H, k integer; offset = floor(t H)")?;
    writeln!(w, "t,value")?;
    for (t, v) in path.t_grid.iter().zip(&path.values) {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}

/// [`path_sample`] written to `out` by [`write_path_csv`].
pub fn figure_data(kind: SeriesKind, x: u64, h: u64, t_max: f64, steps: u64, out: &Path) -> Result<PathSeries> {
    let path = path_sample(kind, x, h, t_max, steps)?;
    let mut w = BufWriter::new(File::create(out)?);
    write_path_csv(&path, &mut w)?;
    w.flush()?;
    Ok(path)
}

/// Where the windows `(n, n + H]` start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Sampling {
    /// `trials` starts drawn uniformly from `[X, 2X)` by ChaCha8 seeded with `seed`.
    Random { trials: u64, seed: u64 },
    /// Every integer start in `[X, 2X)`.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurstEstimate {
    pub kind: SeriesKind,
    #[serde(rename = "X")]
    pub x: u64,
    pub sampling: Sampling,
    #[serde(rename = "H_values")]
    pub h_values: Vec<u64>,
    /// Mean of the raw window sum per `H`.
    pub means: Vec<f64>,
    /// Mean-centered variance of the raw window sum per `H`.
    pub variances: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub implied_hurst: f64,
}

/// Least-squares `(slope, intercept)` of `y` against `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Window starts for the chosen sampling, in a fixed order.
fn window_starts(x: u64, sampling: Sampling) -> Vec<u64> {
    match sampling {
        Sampling::Random { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..trials).map(|_| x + rng.gen_range(0..x)).collect()
        }
        Sampling::Exhaustive => (x..2 * x).collect(),
    }
}

/// Variance of `sum_{n < m <= n + H} a_m` over window starts `n`, for each `H`,
/// and the log-log slope; the implied Hurst exponent is half the slope.
///
/// Windows of all lengths share their start, so one sieve of length `max H`
/// serves every `H`. Integer-valued series use exact `i128` moments; prime
/// windows are collected in start order and reduced by pairwise summation, so
/// the result does not depend on the worker count.
pub fn hurst_estimate(
    kind: SeriesKind,
    x: u64,
    hs: &[u64],
    sampling: Sampling,
    workers: Workers,
) -> Result<HurstEstimate> {
    if hs.len() < 2 {
        return Err(LabError::argument("at least two window lengths are required"));
    }
    if hs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::argument("window lengths must be strictly increasing"));
    }
    if x < 1 {
        return Err(LabError::range("X must be at least 1"));
    }
    if hs[0] < 1 || *hs.last().unwrap() > x {
        return Err(LabError::range("window lengths must lie in [1, X]"));
    }
    if let Sampling::Random { trials, .. } = sampling {
        if trials < 2 {
            return Err(LabError::argument("at least two trials are required"));
        }
    }
    let h_max = *hs.last().unwrap();
    let end = x
        .checked_mul(2)
        .and_then(|v| v.checked_add(h_max + 2))
        .ok_or_else(|| LabError::range("2X + H overflows u64"))?;
    let terms = Terms::new(kind, end);
    let starts = window_starts(x, sampling);

    const CHUNK: usize = 64;
    let chunks = starts.len().div_ceil(CHUNK);
    let per_chunk: Vec<Vec<Vec<f64>>> = map_blocks(workers, chunks, |c| {
        starts[c * CHUNK..((c + 1) * CHUNK).min(starts.len())]
            .iter()
            .map(|&n| prefix_at(&terms.block(n + 1, h_max as usize), n + 1, hs))
            .collect()
    });
    let windows: Vec<Vec<f64>> = per_chunk.into_iter().flatten().collect();
    let count = windows.len() as f64;

    let mut means = Vec::with_capacity(hs.len());
    let mut variances = Vec::with_capacity(hs.len());
    for j in 0..hs.len() {
        if kind.integer_valued() {
            let (s1, s2) = windows.iter().fold((0i128, 0i128), |(s1, s2), w| {
                let v = w[j] as i128;
                (s1 + v, s2 + v * v)
            });
            let n = windows.len() as i128;
            means.push(s1 as f64 / count);
            variances.push((n * s2 - s1 * s1) as f64 / (count * count));
        } else {
            let column: Vec<f64> = windows.iter().map(|w| w[j]).collect();
            let mean = pairwise_sum(&column) / count;
            let dev: Vec<f64> = column.iter().map(|v| (v - mean) * (v - mean)).collect();
            means.push(mean);
            variances.push(pairwise_sum(&dev) / count);
        }
    }
    if let Some(pos) = variances.iter().position(|&v| !(v > 0.0)) {
        return Err(LabError::precondition(format!(
            "variance at H = {} is not positive; the log-log fit needs positive variances",
            hs[pos]
        )));
    }
    let log_h: Vec<f64> = hs.iter().map(|&h| (h as f64).ln()).collect();
    let log_v: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = least_squares(&log_h, &log_v);
    Ok(HurstEstimate {
        kind,
        x,
        sampling,
        h_values: hs.to_vec(),
        means,
        variances,
        slope,
        intercept,
        implied_hurst: slope / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::interval_variance;
    use crate::sieve::{is_prime, squarefree_count};

    #[test]
    fn zero_horizon_is_single_zero() {
        let p = path_sample(SeriesKind::Squarefree, 12345, 100, 0.0, 10).unwrap();
        assert_eq!(p.values, vec![0.0]);
        assert_eq!(p.t_grid, vec![0.0]);
    }

    #[test]
    fn squarefree_endpoint_matches_q_difference() {
        let (x, h) = (1_000_000u64, 1000u64);
        let p = path_sample(SeriesKind::Squarefree, x, h, 1.0, 4).unwrap();
        let count = (squarefree_count(x + h) - squarefree_count(x)) as f64;
        let expected = (count - h as f64 * six_over_pi2()) * (h as f64).powf(-0.25);
        assert_eq!(*p.values.last().unwrap(), expected);
        assert_eq!(p.values[0], 0.0);
    }

    #[test]
    fn prime_example() {
        let p = path_sample(SeriesKind::Prime, 100, 10, 1.0, 1).unwrap();
        let logs: f64 = [101f64, 103.0, 107.0, 109.0].iter().map(|v| v.ln()).sum();
        let expected = (logs - 10.0) / 10f64.sqrt();
        assert!((p.values[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn prime_path_against_trial_division() {
        let (x, h) = (50_000u64, 300u64);
        let p = path_sample(SeriesKind::Prime, x, h, 3.0, 7).unwrap();
        for (&k, &v) in p.offsets.iter().zip(&p.values) {
            let s: f64 = (x + 1..=x + k).filter(|&n| is_prime(n)).map(|n| (n as f64).ln()).sum();
            let expected = (s - k as f64) / (h as f64).sqrt();
            assert!((v - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn synthetic_signs_are_reproducible_and_random_access() {
        let a = path_sample(SeriesKind::Synthetic { seed: 7 }, 1000, 50, 2.0, 100).unwrap();
        let b = path_sample(SeriesKind::Synthetic { seed: 7 }, 1000, 50, 2.0, 100).unwrap();
        assert_eq!(a, b);
        let terms = Terms::new(SeriesKind::Synthetic { seed: 7 }, 0);
        let (Block::Signs(whole), Block::Signs(tail)) = (terms.block(1001, 100), terms.block(1051, 50)) else {
            unreachable!()
        };
        assert_eq!(&whole[50..], &tail[..]);
    }

    #[test]
    fn exhaustive_squarefree_matches_interval_statistic() {
        let (x, h) = (10_000u64, 100u64);
        let est =
            hurst_estimate(SeriesKind::Squarefree, x, &[10, h], Sampling::Exhaustive, Workers::sequential()).unwrap();
        let r = interval_variance(x, h, Workers::sequential()).unwrap();
        assert_eq!(est.variances[1], r.variance_mean_centered);
        let shift = est.means[1] - r.center;
        assert!((est.variances[1] + shift * shift - r.variance).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_windows() {
        let w = Workers::sequential();
        let s = Sampling::Random { trials: 10, seed: 1 };
        assert!(matches!(hurst_estimate(SeriesKind::Squarefree, 1000, &[10], s, w), Err(LabError::Argument(_))));
        assert!(matches!(hurst_estimate(SeriesKind::Squarefree, 1000, &[20, 10], s, w), Err(LabError::Argument(_))));
        assert!(matches!(hurst_estimate(SeriesKind::Squarefree, 100, &[10, 1000], s, w), Err(LabError::Range(_))));
    }

    #[test]
    fn synthetic_slope_near_one() {
        let hs: Vec<u64> = (4..=10).map(|k| 1u64 << k).collect();
        let est = hurst_estimate(
            SeriesKind::Synthetic { seed: 3 },
            1 << 20,
            &hs,
            Sampling::Random { trials: 4000, seed: 11 },
            Workers::sequential(),
        )
        .unwrap();
        assert!((est.implied_hurst - 0.5).abs() < 0.05, "{}", est.implied_hurst);
    }

    #[test]
    fn fit_recovers_power_law() {
        let x: Vec<f64> = (1..6).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 2.0).collect();
        let (s, i) = least_squares(&x, &y);
        assert!((s - 0.5).abs() < 1e-14 && (i + 2.0).abs() < 1e-14);
    }

    #[test]
    fn csv_has_header_and_single_row_at_zero() {
        let dir = std::env::temp_dir().join(format!("sqfree-fig-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("p.csv");
        figure_data(SeriesKind::Squarefree, 1000, 10, 0.0, 5, &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let rows: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows, vec!["t,value", "0,0"]);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

//! Squarefree counts in short intervals: the variance around `6H/pi^2`, the
//! shifted correlation sums, and the pointwise deviation profile.
//!
//! For integer `H` the count `#{x < m <= x + H : m squarefree}` is constant for
//! `x` in `[n, n + 1)`, so the average over real `x` in `[X, 2X]` is exactly the
//! average of `Delta_n = Q(n + H) - Q(n)` over integers `n` in `[X, 2X)`.

use serde::Serialize;

use crate::constants::{default_c, six_over_pi2};
use crate::error::{LabError, Result};
use crate::par::{block_count, fold_blocks, Workers};
use crate::sieve::{squarefree_flags_into, BasePrimes, DEFAULT_BLOCK};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "H")]
    pub h: u64,
    /// `sum_{X <= n < 2X} Delta_n`
    pub sum_counts: i128,
    /// `sum_{X <= n < 2X} Delta_n^2`
    pub sum_squares: i128,
    /// Mean square deviation from `6H/pi^2`.
    pub variance: f64,
    /// Mean square deviation from the empirical mean `sum_counts / X`.
    pub variance_mean_centered: f64,
    pub empirical_mean: f64,
    pub center: f64,
    /// `C sqrt(H)`
    pub predicted: f64,
    pub ratio: f64,
    /// `H <= X^{6/11}`
    pub in_unconditional_range: bool,
    /// `H <= X^{2/3}`
    pub in_lindelof_range: bool,
}

impl VarianceReport {
    fn from_sums(x: u64, h: u64, sum_counts: i128, sum_squares: i128, c: f64) -> Self {
        let xf = x as f64;
        let center = six_over_pi2() * h as f64;
        let empirical_mean = sum_counts as f64 / xf;
        // X * S2 - S1^2 is exact and nonnegative (Cauchy-Schwarz).
        let spread = x as i128 * sum_squares - sum_counts * sum_counts;
        let variance_mean_centered = spread as f64 / (xf * xf);
        let shift = empirical_mean - center;
        let variance = variance_mean_centered + shift * shift;
        let predicted = c * (h as f64).sqrt();
        let ratio = if predicted > 0.0 { variance / predicted } else { f64::NAN };
        let log_ratio = (h as f64).ln() / xf.ln();
        VarianceReport {
            x,
            h,
            sum_counts,
            sum_squares,
            variance,
            variance_mean_centered,
            empirical_mean,
            center,
            predicted,
            ratio,
            in_unconditional_range: h <= 1 || log_ratio <= 6.0 / 11.0,
            in_lindelof_range: h <= 1 || log_ratio <= 2.0 / 3.0,
        }
    }
}

/// Variance of squarefree counts in `(n, n + H]` over `n` in `[X, 2X)`.
pub fn interval_variance(x: u64, h: u64, workers: Workers) -> Result<VarianceReport> {
    Ok(interval_variance_sweep(x, &[h], workers)?.remove(0))
}

/// [`interval_variance`] for several window lengths in one sieve pass.
pub fn interval_variance_sweep(x: u64, hs: &[u64], workers: Workers) -> Result<Vec<VarianceReport>> {
    interval_variance_sweep_with_block(x, hs, workers, DEFAULT_BLOCK as u64)
}

/// Moment sums `(sum Delta_n, sum Delta_n^2)` per `H`, streamed over blocks of `n`.
pub fn interval_variance_sweep_with_block(
    x: u64,
    hs: &[u64],
    workers: Workers,
    block: u64,
) -> Result<Vec<VarianceReport>> {
    if x < 1 {
        return Err(LabError::range("X must be at least 1"));
    }
    if hs.is_empty() {
        return Err(LabError::argument("at least one window length is required"));
    }
    if let Some(&h) = hs.iter().find(|&&h| h > x) {
        return Err(LabError::range(format!("H = {h} exceeds X = {x}")));
    }
    if block == 0 {
        return Err(LabError::argument("block size must be positive"));
    }
    let h_max = *hs.iter().max().unwrap();
    let end = x
        .checked_mul(2)
        .and_then(|v| v.checked_add(h_max + 1))
        .ok_or_else(|| LabError::range("2X + H overflows u64"))?;
    let base = BasePrimes::for_segment_end(end);
    let c = if hs.iter().any(|&h| h > 0) { default_c() } else { 0.0 };

    let n_blocks = block_count(x, block);
    let sums = fold_blocks(
        workers,
        n_blocks,
        || vec![(0i128, 0i128); hs.len()],
        |mut acc, b| {
            let start = x + b as u64 * block;
            let stop = (start + block).min(2 * x);
            let len = (stop - start) as usize;
            // flags[j] is the indicator of start + 1 + j, prefix[j] counts (start, start + j].
            let mut flags = vec![0u8; len + h_max as usize];
            squarefree_flags_into(start + 1, &base, &mut flags);
            let mut prefix = Vec::with_capacity(flags.len() + 1);
            prefix.push(0u32);
            let mut run = 0u32;
            for &f in &flags {
                run += f as u32;
                prefix.push(run);
            }
            for (slot, &h) in acc.iter_mut().zip(hs) {
                let h = h as usize;
                let (s1, s2) =
                    prefix[h..h + len].iter().zip(&prefix[..len]).fold((0u64, 0u64), |(s1, s2), (&hi, &lo)| {
                        let d = (hi - lo) as u64;
                        (s1 + d, s2 + d * d)
                    });
                slot.0 += s1 as i128;
                slot.1 += s2 as i128;
            }
            acc
        },
        |mut a, b| {
            for (l, r) in a.iter_mut().zip(b) {
                l.0 += r.0;
                l.1 += r.1;
            }
            a
        },
    );
    Ok(hs.iter().zip(sums).map(|(&h, (s1, s2))| VarianceReport::from_sums(x, h, s1, s2, c)).collect())
}

/// Geometric window lengths `lo, lo*factor, ...` up to `hi` inclusive.
pub fn geometric_sweep(lo: u64, hi: u64, factor: u64) -> Result<Vec<u64>> {
    if lo == 0 || factor < 2 || hi < lo {
        return Err(LabError::argument("sweep needs 1 <= lo <= hi and factor >= 2"));
    }
    let mut out = vec![lo];
    while let Some(next) = out.last().unwrap().checked_mul(factor) {
        if next > hi {
            break;
        }
        out.push(next);
    }
    Ok(out)
}

/// Exact `sum_{n <= x} mu^2(n) mu^2(n + h)`.
pub fn correlation_sum(x: u64, h: u64, workers: Workers) -> Result<u64> {
    if x < 1 || h < 1 {
        return Err(LabError::argument("correlation_sum needs x >= 1 and h >= 1"));
    }
    let end = x.checked_add(h + 1).ok_or_else(|| LabError::range("x + h overflows u64"))?;
    let base = BasePrimes::for_segment_end(end);
    let block = DEFAULT_BLOCK as u64;
    Ok(fold_blocks(
        workers,
        block_count(x, block),
        || 0u64,
        |acc, b| {
            let start = 1 + b as u64 * block;
            let stop = (start + block).min(x + 1);
            let len = (stop - start) as usize;
            let mut flags = vec![0u8; len + h as usize];
            squarefree_flags_into(start, &base, &mut flags);
            let (head, shifted) = (&flags[..len], &flags[h as usize..h as usize + len]);
            acc + head.iter().zip(shifted).filter(|(&a, &b)| a & b == 1).count() as u64
        },
        |a, b| a + b,
    ))
}

/// `(x, (count(x, x + H] - 6H/pi^2) / H^{1/4})` at `samples` evenly spaced `x` in `[X, 2X)`.
pub fn deviation_profile(x: u64, h: u64, samples: u64) -> Result<Vec<(u64, f64)>> {
    if samples < 1 {
        return Err(LabError::argument("samples must be at least 1"));
    }
    if x < 1 {
        return Err(LabError::range("X must be at least 1"));
    }
    let end =
        x.checked_mul(2).and_then(|v| v.checked_add(h + 1)).ok_or_else(|| LabError::range("2X + H overflows u64"))?;
    let base = BasePrimes::for_segment_end(end);
    let center = six_over_pi2() * h as f64;
    let scale = (h as f64).powf(0.25);
    let mut flags = vec![0u8; h as usize];
    Ok((0..samples)
        .map(|i| {
            let at = x + (i as u128 * x as u128 / samples as u128) as u64;
            if h == 0 {
                return (at, 0.0);
            }
            squarefree_flags_into(at + 1, &base, &mut flags);
            let count = flags.iter().map(|&f| f as u64).sum::<u64>();
            (at, (count as f64 - center) / scale)
        })
        .collect())
}

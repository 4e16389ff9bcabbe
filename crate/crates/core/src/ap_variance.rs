//! Variance of squarefree counts over the reduced residue classes of a prime
//! modulus, centered at `(6/pi^2)(x/q) prod_{p|q} (1 - 1/p^2)^{-1}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::CharacterTable;
use crate::constants::{ap_mean, ap_variance_factor, default_c};
use crate::error::{LabError, Result};
use crate::par::{block_count, fold_blocks, Workers};
use crate::sieve::{is_prime, squarefree_flags_into, squarefree_segment, BasePrimes, DEFAULT_BLOCK};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApVarianceReport {
    pub x: u64,
    pub q: u64,
    /// `class_counts[a - 1]` counts squarefree `m <= x` with `m = a (mod q)`, `1 <= a < q`.
    pub class_counts: Vec<u64>,
    /// `sum_a class_counts[a]`
    pub sum_counts: i128,
    /// `sum_a class_counts[a]^2`
    pub sum_squares: i128,
    pub paper_mean: f64,
    pub empirical_mean: f64,
    pub variance_paper_centered: f64,
    pub variance_mean_centered: f64,
    /// `C prod_{p|q} (1 + 2/p)^{-1} sqrt(x/q)`
    pub predicted: f64,
    /// `variance_paper_centered / predicted`
    pub ratio: f64,
}

fn check_inputs(x: u64, q: u64) -> Result<()> {
    if q < 2 || q > x {
        return Err(LabError::range(format!("need 2 <= q <= x, got q = {q}, x = {x}")));
    }
    if !is_prime(q) {
        return Err(LabError::precondition(format!("modulus {q} is not prime")));
    }
    Ok(())
}

/// Per-class squarefree counts up to `x` and their variance about the expected class size.
pub fn ap_variance(x: u64, q: u64, workers: Workers) -> Result<ApVarianceReport> {
    check_inputs(x, q)?;
    let block = DEFAULT_BLOCK as u64;
    let base = BasePrimes::for_segment_end(x + 1);
    let counts = fold_blocks(
        workers,
        block_count(x, block),
        || vec![0u64; q as usize],
        |mut acc, b| {
            let start = 1 + b as u64 * block;
            let stop = (start + block).min(x + 1);
            let mut flags = vec![0u8; (stop - start) as usize];
            squarefree_flags_into(start, &base, &mut flags);
            let mut r = (start % q) as usize;
            for &f in &flags {
                acc[r] += f as u64;
                r += 1;
                if r == q as usize {
                    r = 0;
                }
            }
            acc
        },
        |mut a, b| {
            for (l, r) in a.iter_mut().zip(b) {
                *l += r;
            }
            a
        },
    );
    let class_counts = counts[1..].to_vec();
    let paper_mean = ap_mean(x, q)?;
    let predicted = default_c() * ap_variance_factor(q)? * (x as f64 / q as f64).sqrt();
    Ok(build_report(x, q, class_counts, paper_mean, predicted))
}

fn build_report(x: u64, q: u64, class_counts: Vec<u64>, paper_mean: f64, predicted: f64) -> ApVarianceReport {
    let phi = class_counts.len() as f64;
    let sum_counts: i128 = class_counts.iter().map(|&c| c as i128).sum();
    let sum_squares: i128 = class_counts.iter().map(|&c| c as i128 * c as i128).sum();
    let empirical_mean = sum_counts as f64 / phi;
    let spread = class_counts.len() as i128 * sum_squares - sum_counts * sum_counts;
    let variance_mean_centered = spread as f64 / (phi * phi);
    let variance_paper_centered = class_counts
        .iter()
        .map(|&c| {
            let d = c as f64 - paper_mean;
            d * d
        })
        .sum::<f64>()
        / phi;
    ApVarianceReport {
        x,
        q,
        class_counts,
        sum_counts,
        sum_squares,
        paper_mean,
        empirical_mean,
        variance_paper_centered,
        variance_mean_centered,
        predicted,
        ratio: variance_paper_centered / predicted,
    }
}

/// `variance_paper_centered` (class counts about the predicted mean) computed entirely on the character side.
///
/// With `b_n = mu^2(n) 1{n <= x}`, orthogonality gives
/// `sum_a c_a^2 = (1/phi) sum_chi |sum_n b_n chi(n)|^2` and
/// `sum_a c_a = sum_n b_n chi_0(n)`, hence
/// `(1/phi) sum_a (c_a - m)^2 = (1/phi) [ (1/phi) sum_chi |S_chi|^2 - 2 m S_{chi_0} + phi m^2 ]`.
/// Cost is `phi(q) * x`, so only small instances are sensible.
pub fn paper_variance_via_characters(x: u64, q: u64) -> Result<f64> {
    check_inputs(x, q)?;
    let table = CharacterTable::new(q)?;
    let b: Vec<Complex64> = squarefree_segment(1, x + 1)?.into_iter().map(|f| Complex64::new(f as f64, 0.0)).collect();
    let phi = table.count() as f64;
    let sums: Vec<Complex64> = (0..table.count()).map(|j| table.twisted_sum(j, &b)).collect();
    let second_moment = sums.iter().map(|s| s.norm_sqr()).sum::<f64>() / phi;
    let principal = sums[0].re;
    let m = ap_mean(x, q)?;
    Ok((second_moment - 2.0 * m * principal + phi * m * m) / phi)
}

//! A quick self-check: small instances of every computation compared with
//! independent brute-force evaluations. Runs in a few seconds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ap_variance::ap_variance;
use crate::characters::orthogonality_check;
use crate::constants::{constant_c, six_over_pi2};
use crate::diophantine::{cf_expand, convergent_in_range, pell_classes, pell_fundamental};
use crate::interval::interval_variance;
use crate::main_term::{sinc, sinc_half_moment, sinc_lambda_sum};
use crate::par::Workers;
use crate::sieve::{is_prime, squarefree_count, squarefree_segment};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Brute-force squarefree test by trial division.
fn squarefree_naive(n: u64) -> bool {
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d * d) {
            return false;
        }
        d += 1;
    }
    n >= 1
}

fn interval_naive(x: u64, h: u64) -> f64 {
    let center = six_over_pi2() * h as f64;
    let total: f64 = (x..2 * x)
        .map(|n| {
            let c = (n + 1..=n + h).filter(|&m| squarefree_naive(m)).count() as f64;
            (c - center).powi(2)
        })
        .sum();
    total / x as f64
}

fn ap_naive(x: u64, q: u64) -> f64 {
    let mut counts = vec![0u64; q as usize];
    for n in 1..=x {
        if squarefree_naive(n) {
            counts[(n % q) as usize] += 1;
        }
    }
    let mean = six_over_pi2() * (x as f64 / q as f64) / (1.0 - 1.0 / (q * q) as f64);
    counts[1..].iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (q - 1) as f64
}

/// Runs every check with the given worker count.
pub fn run_checks(workers: Workers) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let seg = squarefree_segment(1, 100_001)?;
    let sieved = seg.iter().map(|&f| f as u64).sum::<u64>();
    let q = squarefree_count(100_000);
    let naive = (1..=2000).filter(|&n| squarefree_naive(n)).count() as u64;
    out.push(check(
        "sieve_counts",
        sieved == q && squarefree_count(2000) == naive,
        format!("Q(1e5) = {q}, sieve = {sieved}; Q(2000) = {}, naive = {naive}", squarefree_count(2000)),
    ));

    let r = interval_variance(10, 2, workers)?;
    let naive = interval_naive(10, 2);
    out.push(check(
        "interval_variance_small",
        (r.variance - 0.160251).abs() < 1e-6 && (r.variance - naive).abs() < 1e-12,
        format!("variance = {:.9}, naive = {naive:.9}", r.variance),
    ));

    let r = interval_variance(3000, 40, workers)?;
    let naive = interval_naive(3000, 40);
    out.push(check(
        "interval_variance_brute",
        (r.variance - naive).abs() <= 1e-9 * naive,
        format!("variance = {:.9}, naive = {naive:.9}", r.variance),
    ));

    let r = ap_variance(20, 5, workers)?;
    let naive = ap_naive(20, 5);
    out.push(check(
        "ap_variance_small",
        (r.variance_paper_centered - 0.2510910).abs() < 1e-6 && (r.variance_paper_centered - naive).abs() < 1e-12,
        format!("variance = {:.9}, naive = {naive:.9}", r.variance_paper_centered),
    ));

    let c6 = constant_c(1_000_000)?;
    out.push(check(
        "constant_c",
        (0.23..=0.25).contains(&c6.value) && c6.tail_bound < 1e-5,
        format!("C = {:.12} +- {:.1e}", c6.value, c6.tail_bound),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for &q in &[3u64, 5, 7, 11] {
        let coeffs: Vec<Complex64> =
            (0..200).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let (lhs, rhs) = orthogonality_check(q, &coeffs)?;
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
    }
    out.push(check("character_orthogonality", worst < 1e-9, format!("max relative gap {worst:.2e}")));

    // sum over all integer lambda of S(lambda/g)^2 is g, so the one-sided sum is (g - 1)/2
    let mut worst = 0.0f64;
    for g in 2..=12u64 {
        let s = sinc_lambda_sum(1.0 / g as f64, 1e-8)?;
        worst = worst.max((s.value - (g as f64 - 1.0) / 2.0).abs());
    }
    out.push(check("lambda_sum_parseval", worst < 1e-8, format!("max absolute gap {worst:.2e}")));

    let direct: f64 = (1..200_000).map(|k| sinc(k as f64 / 3.5).powi(2)).sum::<f64>();
    let s = sinc_lambda_sum(1.0 / 3.5, 1e-8)?;
    out.push(check(
        "lambda_sum_direct",
        (s.value - direct).abs() < 1e-5,
        format!("truncated = {:.12}, direct = {direct:.12}", s.value),
    ));

    let m = sinc_half_moment();
    out.push(check(
        "sinc_half_moment",
        (m.value - 1.0 / PI).abs() < 1e-4,
        format!("value = {:.9}, 1/pi = {:.9}", m.value, 1.0 / PI),
    ));

    let mut cf_ok = true;
    for &(a, b) in &[(1u64, 2u64), (2, 3), (3, 7), (5, 11), (10, 3), (13, 17)] {
        let irr = cf_expand(a, b, 10_000)?;
        let bound = (4 * a * b) as f64;
        cf_ok &= (irr.max_partial_quotient() as f64).powi(2) <= bound;
        cf_ok &= convergent_in_range(a, b, 50).is_ok();
    }
    out.push(check("continued_fractions", cf_ok, "partial quotients <= 2 sqrt(ab), convergents admissible".into()));

    let f2 = pell_fundamental(2)?;
    let f6 = pell_fundamental(6)?;
    let r = pell_classes(1, 2, 7, 20_000)?;
    let pell_ok = (f2.0.to_string(), f2.1.to_string()) == ("6".into(), "2".into())
        && (f6.0.to_string(), f6.1.to_string()) == ("10".into(), "2".into())
        && r.plus_constant_on_complete
        && r.complete_classes.len() >= 2;
    out.push(check(
        "pell_classes",
        pell_ok,
        format!("eps(2) from {f2:?}, eps(6) from {f6:?}; {} complete classes", r.complete_classes.len()),
    ));

    let seq = interval_variance(50_000, 64, Workers::sequential())?;
    let par = interval_variance(50_000, 64, Workers::new(4)?)?;
    out.push(check(
        "worker_determinism",
        (seq.sum_counts, seq.sum_squares) == (par.sum_counts, par.sum_squares),
        format!("sums ({}, {})", seq.sum_counts, seq.sum_squares),
    ));

    let primes_ok = (2..2000u64).filter(|&n| is_prime(n)).count() == 303;
    out.push(check("prime_count", primes_ok, "pi(2000) = 303".into()));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_checks(Workers::sequential()).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}

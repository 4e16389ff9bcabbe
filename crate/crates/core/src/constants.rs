//! Analytic constants: `zeta` at real points, `6/pi^2`, the variance constant
//! `C = zeta(3/2)/pi * prod_p (1 - 3/p^2 + 2/p^3)`, and the progression factors.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::sieve::{distinct_prime_factors, BasePrimes};

/// Truncation used whenever a caller needs `C` without choosing one.
pub const DEFAULT_TRUNCATION: u64 = 10_000_000;

/// `6/pi^2 = 1/zeta(2)`, the density of squarefree integers.
pub fn six_over_pi2() -> f64 {
    6.0 / (PI * PI)
}

/// Riemann zeta at real `s > 1`, absolute error below `1e-12`.
///
/// Euler–Maclaurin at `N = 1000`: the direct sum over `n < N`, the integral
/// tail, the half endpoint term and the `B2`, `B4` corrections. The first
/// omitted term is `s(s+1)...(s+4) N^{-s-5} / 30240`, far below `1e-12` for
/// every `s > 1`.
pub fn zeta_real(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(LabError::domain(format!("zeta_real needs finite s > 1, got {s}")));
    }
    const N: u32 = 1000;
    let n = N as f64;
    // Summed from the small terms upward.
    let head: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    let n_s = n.powf(-s);
    let tail =
        n * n_s / (s - 1.0) + 0.5 * n_s + s * n_s / (12.0 * n) - s * (s + 1.0) * (s + 2.0) * n_s / (720.0 * n * n * n);
    Ok(head + tail)
}

/// A truncated Euler product with a rigorous bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerConstant {
    pub value: f64,
    /// Largest prime included in the product.
    pub truncation_prime: u64,
    /// Absolute bound on `|value - limit|`.
    pub tail_bound: f64,
}

/// `prod_{p <= P} (1 - 3/p^2 + 2/p^3)` as a sum of logarithms.
fn truncated_log_product(primes: &[u64]) -> f64 {
    primes
        .iter()
        .rev()
        .map(|&p| {
            let p = p as f64;
            (-3.0 / (p * p) + 2.0 / (p * p * p)).ln_1p()
        })
        .sum()
}

/// Upper bound on `-log prod_{p > P} (1 - 3/p^2 + 2/p^3)`.
///
/// For `p >= 3`, `-log(1 - 3/p^2 + 2/p^3) <= -log(1 - 3/p^2) <= (3/2)(3/p^2)`,
/// and `sum_{n > P} 1/n^2 <= 1/(P - 1)`.
fn tail_log_bound(truncation: u64) -> f64 {
    4.5 / (truncation as f64 - 1.0)
}

fn constant_cache() -> &'static Mutex<HashMap<u64, EulerConstant>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, EulerConstant>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `C` truncated at primes `<= truncation`, memoized per truncation.
///
/// The omitted tail factor lies in `[exp(-L), 1]` with `L` from
/// [`tail_log_bound`]; the reported value uses the midpoint of that interval and
/// `tail_bound` its half-width.
pub fn constant_c(truncation: u64) -> Result<EulerConstant> {
    if truncation < 2 {
        return Err(LabError::argument("truncation prime must be at least 2"));
    }
    if let Some(c) = constant_cache().lock().unwrap().get(&truncation) {
        return Ok(*c);
    }
    let base = BasePrimes::up_to(truncation);
    let primes = base.primes();
    let prefactor = zeta_real(1.5)? / PI;
    let head = prefactor * truncated_log_product(primes).exp();
    let lower = (-tail_log_bound(truncation)).exp();
    let c = EulerConstant {
        value: head * (1.0 + lower) / 2.0,
        truncation_prime: *primes.last().expect("at least the prime 2"),
        tail_bound: head * (1.0 - lower) / 2.0,
    };
    constant_cache().lock().unwrap().insert(truncation, c);
    Ok(c)
}

/// `C` at [`DEFAULT_TRUNCATION`].
pub fn default_c() -> f64 {
    constant_c(DEFAULT_TRUNCATION).expect("default truncation is valid").value
}

/// `prod_{p <= P} (1 - 1/p^2)`, which tends to `6/pi^2`.
pub fn inverse_zeta2_product(truncation: u64) -> f64 {
    BasePrimes::up_to(truncation)
        .primes()
        .iter()
        .rev()
        .map(|&p| (-1.0 / (p as f64 * p as f64)).ln_1p())
        .sum::<f64>()
        .exp()
}

/// `prod_{p | q} (1 + 2/p)^{-1}`.
pub fn ap_variance_factor(q: u64) -> Result<f64> {
    if q < 2 {
        return Err(LabError::argument("modulus must be at least 2"));
    }
    Ok(distinct_prime_factors(q).into_iter().map(|p| p as f64 / (p as f64 + 2.0)).product())
}

/// `(6/pi^2) (x/q) prod_{p | q} (1 - 1/p^2)^{-1}`, the expected count per reduced class.
pub fn ap_mean(x: u64, q: u64) -> Result<f64> {
    if q < 2 {
        return Err(LabError::argument("modulus must be at least 2"));
    }
    if x < 1 {
        return Err(LabError::argument("x must be at least 1"));
    }
    let correction: f64 = distinct_prime_factors(q)
        .into_iter()
        .map(|p| {
            let p2 = p as f64 * p as f64;
            p2 / (p2 - 1.0)
        })
        .product();
    Ok(six_over_pi2() * (x as f64 / q as f64) * correction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zeta_closed_forms() {
        assert_abs_diff_eq!(zeta_real(2.0).unwrap(), PI * PI / 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(zeta_real(4.0).unwrap(), PI.powi(4) / 90.0, epsilon = 1e-13);
        assert_abs_diff_eq!(zeta_real(2.0).unwrap() * six_over_pi2(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zeta_rejects_pole_side() {
        assert!(matches!(zeta_real(1.0), Err(LabError::Domain(_))));
        assert!(matches!(zeta_real(0.5), Err(LabError::Domain(_))));
        assert!(zeta_real(f64::NAN).is_err());
    }

    #[test]
    fn c_at_two_is_half_prefactor() {
        let c = constant_c(2).unwrap();
        let prefactor = zeta_real(1.5).unwrap() / PI;
        let head = prefactor * 0.5;
        let lower = (-4.5f64).exp();
        assert_eq!(c.truncation_prime, 2);
        assert_abs_diff_eq!(c.value, head * (1.0 + lower) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.tail_bound, head * (1.0 - lower) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn tail_bound_brackets_larger_truncations() {
        let truncs = [2u64, 10, 100, 1000, 10_000, 100_000];
        let cs: Vec<_> = truncs.iter().map(|&t| constant_c(t).unwrap()).collect();
        for w in cs.windows(2) {
            assert!(w[1].tail_bound < w[0].tail_bound);
        }
        for (i, a) in cs.iter().enumerate() {
            for b in &cs[i + 1..] {
                assert!((a.value - b.value).abs() <= a.tail_bound);
            }
        }
    }

    #[test]
    fn progression_factors() {
        assert_abs_diff_eq!(ap_variance_factor(5).unwrap(), 5.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ap_variance_factor(6).unwrap(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(ap_variance_factor(10007).unwrap(), 10007.0 / 10009.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ap_mean(20, 5).unwrap(), 25.0 / (PI * PI), epsilon = 1e-12);
        let q = 30;
        let expected = six_over_pi2() * (4.0 / 3.0) * (9.0 / 8.0) * (25.0 / 24.0);
        assert_abs_diff_eq!(ap_mean(q, q).unwrap(), expected, epsilon = 1e-12);
        assert!(ap_variance_factor(1).is_err());
    }
}

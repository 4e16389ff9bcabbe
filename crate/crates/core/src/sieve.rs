//! Segmented sieves: Möbius values, squarefree indicators, and primes.
//!
//! Everything here works on half-open blocks `[lo, hi)` and needs only the
//! primes up to `sqrt(hi)`. Segments are independent, so the same base-prime
//! table can be shared read-only by any number of workers.

use crate::error::{LabError, Result};

/// Default number of entries per sieve block (fits comfortably in L2).
pub const DEFAULT_BLOCK: usize = 1 << 20;

/// Primes up to a limit, produced once and shared read-only afterwards.
#[derive(Debug, Clone)]
pub struct BasePrimes {
    limit: u64,
    primes: Vec<u64>,
}

impl BasePrimes {
    /// All primes `p <= limit` by a plain sieve of Eratosthenes.
    pub fn up_to(limit: u64) -> Self {
        let n = limit as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        BasePrimes { limit, primes }
    }

    /// Base primes sufficient for sieving any block ending below `hi`.
    pub fn for_segment_end(hi: u64) -> Self {
        Self::up_to(isqrt(hi.saturating_sub(1)))
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn covers(&self, hi: u64) -> bool {
        let top = hi.saturating_sub(1);
        (self.limit as u128 + 1) * (self.limit as u128 + 1) > top as u128
    }
}

/// Möbius values over `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobiusSegment {
    pub lo: u64,
    pub hi: u64,
    pub mu: Vec<i8>,
}

impl MobiusSegment {
    pub fn get(&self, n: u64) -> Option<i8> {
        if n < self.lo || n >= self.hi {
            return None;
        }
        Some(self.mu[(n - self.lo) as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, i8)> + '_ {
        (self.lo..self.hi).zip(self.mu.iter().copied())
    }
}

/// Primality flags over `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSegment {
    pub lo: u64,
    pub hi: u64,
    pub flags: Vec<bool>,
}

impl PrimeSegment {
    pub fn is_prime(&self, n: u64) -> Option<bool> {
        if n < self.lo || n >= self.hi {
            return None;
        }
        Some(self.flags[(n - self.lo) as usize])
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (self.lo..self.hi).zip(self.flags.iter()).filter_map(|(n, &f)| f.then_some(n))
    }
}

fn check_bounds(lo: u64, hi: u64, min_lo: u64) -> Result<()> {
    if lo < min_lo {
        return Err(LabError::range(format!("segment start {lo} must be at least {min_lo}")));
    }
    if hi <= lo {
        return Err(LabError::range(format!("empty or inverted segment [{lo}, {hi})")));
    }
    Ok(())
}

/// Möbius values on `[lo, hi)` with the default block size.
pub fn mobius_segment(lo: u64, hi: u64) -> Result<MobiusSegment> {
    mobius_segment_with_block(lo, hi, DEFAULT_BLOCK)
}

/// Möbius values on `[lo, hi)`, sieved in blocks of `block` entries.
pub fn mobius_segment_with_block(lo: u64, hi: u64, block: usize) -> Result<MobiusSegment> {
    check_bounds(lo, hi, 1)?;
    if block == 0 {
        return Err(LabError::argument("block size must be positive"));
    }
    let base = BasePrimes::for_segment_end(hi);
    let len = usize::try_from(hi - lo).map_err(|_| LabError::range("segment too long"))?;
    let mut mu = vec![0i8; len];
    let mut rem = vec![0u64; block.min(len)];
    let mut start = lo;
    while start < hi {
        let end = hi.min(start.saturating_add(block as u64));
        let off = (start - lo) as usize;
        let n = (end - start) as usize;
        mobius_block(start, &base, &mut mu[off..off + n], &mut rem[..n]);
        start = end;
    }
    Ok(MobiusSegment { lo, hi, mu })
}

/// Divide out every base prime once, flip the sign per prime, zero on a square
/// factor; a leftover cofactor above 1 is one more prime.
fn mobius_block(lo: u64, base: &BasePrimes, mu: &mut [i8], rem: &mut [u64]) {
    let n = mu.len() as u64;
    let hi = lo + n;
    for (i, (m, r)) in mu.iter_mut().zip(rem.iter_mut()).enumerate() {
        *m = 1;
        *r = lo + i as u64;
    }
    for &p in base.primes() {
        let mut j = first_multiple_offset(lo, p);
        while j < n {
            let k = j as usize;
            mu[k] = -mu[k];
            rem[k] /= p;
            j += p;
        }
        let p2 = p as u128 * p as u128;
        if p2 < hi as u128 {
            let p2 = p2 as u64;
            let mut j = first_multiple_offset(lo, p2);
            while j < n {
                mu[j as usize] = 0;
                j += p2;
            }
        }
    }
    for (m, &r) in mu.iter_mut().zip(rem.iter()) {
        if r > 1 && *m != 0 {
            *m = -*m;
        }
    }
}

/// Offset from `lo` of the first multiple of `d` that is `>= lo`.
#[inline]
fn first_multiple_offset(lo: u64, d: u64) -> u64 {
    let r = lo % d;
    if r == 0 {
        0
    } else {
        d - r
    }
}

/// Writes the squarefree indicator of `lo + i` into `out[i]`.
///
/// `base` must contain every prime up to `sqrt(lo + out.len() - 1)`.
pub fn squarefree_flags_into(lo: u64, base: &BasePrimes, out: &mut [u8]) {
    debug_assert!(base.covers(lo + out.len() as u64));
    out.fill(1);
    let n = out.len() as u64;
    let hi = lo + n;
    if lo == 0 && !out.is_empty() {
        out[0] = 0;
    }
    for &p in base.primes() {
        let p2 = p * p;
        if p2 >= hi {
            break;
        }
        let mut j = first_multiple_offset(lo, p2);
        while j < n {
            out[j as usize] = 0;
            j += p2;
        }
    }
}

/// Squarefree indicators over `[lo, hi)`.
pub fn squarefree_segment(lo: u64, hi: u64) -> Result<Vec<u8>> {
    check_bounds(lo, hi, 1)?;
    let base = BasePrimes::for_segment_end(hi);
    let mut out = vec![0u8; (hi - lo) as usize];
    squarefree_flags_into(lo, &base, &mut out);
    Ok(out)
}

/// Primality flags for `lo + i`; `base` must cover `sqrt(lo + out.len() - 1)`.
pub fn prime_flags_into(lo: u64, base: &BasePrimes, out: &mut [bool]) {
    debug_assert!(base.covers(lo + out.len() as u64));
    out.fill(true);
    let n = out.len() as u64;
    let hi = lo + n;
    for i in 0..n.min(2u64.saturating_sub(lo)) {
        out[i as usize] = false;
    }
    for &p in base.primes() {
        if p * p >= hi {
            break;
        }
        let first = (p * p).max(lo.div_ceil(p) * p);
        let mut j = first - lo;
        while j < n {
            out[j as usize] = false;
            j += p;
        }
    }
}

/// Primality flags over `[lo, hi)`, `lo >= 2`.
pub fn prime_segment(lo: u64, hi: u64) -> Result<PrimeSegment> {
    check_bounds(lo, hi, 2)?;
    let base = BasePrimes::for_segment_end(hi);
    let mut flags = vec![false; (hi - lo) as usize];
    prime_flags_into(lo, &base, &mut flags);
    Ok(PrimeSegment { lo, hi, flags })
}

/// `Q(x)`, the number of squarefree `n <= x`, via `sum_{d <= sqrt x} mu(d) floor(x/d^2)`.
pub fn squarefree_count(x: u64) -> u64 {
    if x == 0 {
        return 0;
    }
    let r = isqrt(x);
    let mu = mobius_segment(1, r + 1).expect("valid segment");
    let total: i128 = mu.iter().filter(|&(_, m)| m != 0).map(|(d, m)| m as i128 * (x / (d * d)) as i128).sum();
    total as u64
}

/// Floor of the square root, exact for all `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Deterministic primality by trial division (fine up to ~10^14).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime divisors of `n` in increasing order.
pub fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu_trial(mut n: u64) -> i8 {
        let mut sign = 1;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                n /= p;
                if n.is_multiple_of(p) {
                    return 0;
                }
                sign = -sign;
            }
            p += 1;
        }
        if n > 1 {
            sign = -sign;
        }
        sign
    }

    #[test]
    fn mobius_spec_examples() {
        assert_eq!(mobius_segment(1, 2).unwrap().mu, vec![1]);
        assert_eq!(mobius_segment(12, 13).unwrap().mu, vec![0]);
        assert_eq!(mobius_segment(30, 31).unwrap().mu, vec![-1]);
    }

    #[test]
    fn mobius_matches_trial_division() {
        let seg = mobius_segment(1, 5000).unwrap();
        for (n, m) in seg.iter() {
            assert_eq!(m, mu_trial(n), "n = {n}");
        }
        let seg = mobius_segment(1_000_000_000, 1_000_002_000).unwrap();
        for (n, m) in seg.iter() {
            assert_eq!(m, mu_trial(n), "n = {n}");
        }
    }

    #[test]
    fn mobius_bad_bounds() {
        assert!(matches!(mobius_segment(0, 5), Err(LabError::Range(_))));
        assert!(matches!(mobius_segment(5, 5), Err(LabError::Range(_))));
    }

    #[test]
    fn mobius_block_size_independent() {
        let a = mobius_segment_with_block(1000, 20_000, 7).unwrap();
        let b = mobius_segment_with_block(1000, 20_000, 1 << 20).unwrap();
        let c = mobius_segment_with_block(1000, 20_000, 4096).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn squarefree_count_examples() {
        assert_eq!(squarefree_count(0), 0);
        assert_eq!(squarefree_count(10), 7);
        assert_eq!(squarefree_count(100), 61);
    }

    #[test]
    fn prime_segment_examples() {
        let s = prime_segment(2, 10).unwrap();
        assert_eq!(s.primes().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
        let s = prime_segment(90, 100).unwrap();
        assert_eq!(s.primes().collect::<Vec<_>>(), vec![97]);
        let s = prime_segment(1_000_000, 1_000_020).unwrap();
        assert_eq!(s.primes().collect::<Vec<_>>(), vec![1_000_003]);
        assert!(prime_segment(1, 10).is_err());
    }

    #[test]
    fn primes_match_trial_division() {
        let s = prime_segment(2, 20_000).unwrap();
        for n in 2..20_000 {
            assert_eq!(s.is_prime(n), Some(is_prime(n)));
        }
    }

    #[test]
    fn isqrt_edges() {
        assert_eq!(isqrt(u64::MAX), 4_294_967_295);
        assert_eq!(isqrt(15), 3);
        assert_eq!(isqrt(16), 4);
        assert_eq!(isqrt((1 << 52) + 1), 1 << 26);
    }

    #[test]
    fn factors() {
        assert_eq!(distinct_prime_factors(360), vec![2, 3, 5]);
        assert_eq!(distinct_prime_factors(10007), vec![10007]);
        assert!(distinct_prime_factors(1).is_empty());
    }
}

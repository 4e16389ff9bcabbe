use std::collections::HashMap;

use num_bigint::BigInt;
use serde::Serialize;

use super::check_irrational;
use crate::error::{LabError, Result};
use crate::sieve::isqrt;

/// The continued fraction of `sqrt(b/a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadraticIrrational {
    pub a: u64,
    pub b: u64,
    pub cf_a0: u64,
    /// Partial quotients between `a0` and the start of the period (often empty).
    pub cf_preperiod: Vec<u64>,
    pub cf_period: Vec<u64>,
}

impl QuadraticIrrational {
    pub fn max_partial_quotient(&self) -> u64 {
        self.cf_preperiod.iter().chain(&self.cf_period).copied().chain(std::iter::once(self.cf_a0)).max().unwrap_or(0)
    }
}

/// Partial quotients of `(P + sqrt(D)) / Q`, starting from `sqrt(b/a) = (0 + sqrt(ab)) / a`.
///
/// `Q | D - P^2` holds at every step, so all state stays integral.
#[derive(Debug, Clone)]
pub struct CfTerms {
    d: i128,
    root: i128,
    p: i128,
    q: i128,
}

impl CfTerms {
    fn state(&self) -> (i128, i128) {
        (self.p, self.q)
    }
}

impl Iterator for CfTerms {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        // floor((P + sqrt D)/Q) = floor((P + isqrt D)/Q) for Q > 0 and irrational sqrt D.
        debug_assert!(self.q > 0);
        let term = (self.p + self.root).div_euclid(self.q);
        let p = term * self.q - self.p;
        let q = (self.d - p * p) / self.q;
        self.p = p;
        self.q = q;
        Some(term as u64)
    }
}

/// Infinite partial-quotient stream of `sqrt(b/a)`.
pub fn cf_terms(a: u64, b: u64) -> Result<CfTerms> {
    check_irrational(a, b)?;
    let d = a as i128 * b as i128;
    Ok(CfTerms { d, root: isqrt(d as u64) as i128, p: 0, q: a as i128 })
}

/// Periodic continued fraction of `sqrt(b/a)`, detecting the period by a repeated
/// `(P, Q)` state; fails if no repetition occurs within `max_terms` quotients.
pub fn cf_expand(a: u64, b: u64, max_terms: usize) -> Result<QuadraticIrrational> {
    let mut terms = cf_terms(a, b)?;
    let cf_a0 = terms.next().expect("infinite stream");
    let mut seen: HashMap<(i128, i128), usize> = HashMap::new();
    let mut quotients = Vec::new();
    while quotients.len() < max_terms {
        let state = terms.state();
        if let Some(&start) = seen.get(&state) {
            let cf_period = quotients.split_off(start);
            return Ok(QuadraticIrrational { a, b, cf_a0, cf_preperiod: quotients, cf_period });
        }
        seen.insert(state, quotients.len());
        quotients.push(terms.next().expect("infinite stream"));
    }
    Err(LabError::argument(format!("period of sqrt({b}/{a}) not found within {max_terms} terms")))
}

/// Convergents `(r_k, q_k)` of `sqrt(b/a)` in order.
pub fn convergents(a: u64, b: u64) -> Result<impl Iterator<Item = (BigInt, BigInt)>> {
    let terms = cf_terms(a, b)?;
    let mut prev = (BigInt::from(1), BigInt::from(0));
    let mut prev2 = (BigInt::from(0), BigInt::from(1));
    Ok(terms.map(move |t| {
        let t = BigInt::from(t);
        let r = &t * &prev.0 + &prev2.0;
        let q = &t * &prev.1 + &prev2.1;
        prev2 = std::mem::replace(&mut prev, (r.clone(), q.clone()));
        (r, q)
    }))
}

/// `|sqrt(b/a) - r/q| <= 1/q^2`, evaluated exactly.
///
/// Equivalent to `(rq - 1)/q^2 <= sqrt(b/a) <= (rq + 1)/q^2`; each side is
/// squared after checking its sign.
pub(crate) fn within_inverse_square(a: u64, b: u64, r: &BigInt, q: &BigInt) -> bool {
    let a = BigInt::from(a);
    let b = BigInt::from(b);
    let q2 = q * q;
    let lo = r * q - 1;
    let hi = r * q + 1;
    // sqrt(b/a) >= lo/q2  <=>  lo <= 0 or b q2^2 >= a lo^2
    let above_lo = lo <= BigInt::from(0) || &b * &q2 * &q2 >= &a * &lo * &lo;
    // sqrt(b/a) <= hi/q2  <=>  hi >= 0 and b q2^2 <= a hi^2
    let below_hi = hi >= BigInt::from(0) && &b * &q2 * &q2 <= &a * &hi * &hi;
    above_lo && below_hi
}

/// First convergent `r/q` with `q >= R`. Its denominator lies in
/// `[R, 3 sqrt(ab) R]` and it satisfies `|sqrt(b/a) - r/q| <= 1/q^2`, both checked exactly.
pub fn convergent_in_range(a: u64, b: u64, r_min: u64) -> Result<(BigInt, BigInt)> {
    if r_min < 1 {
        return Err(LabError::argument("R must be at least 1"));
    }
    let r_big = BigInt::from(r_min);
    let (r, q) = convergents(a, b)?.find(|(_, q)| *q >= r_big).expect("convergent denominators grow without bound");
    // q <= 3 sqrt(ab) R  <=>  q^2 <= 9 ab R^2
    let upper_ok = &q * &q <= BigInt::from(9u8) * BigInt::from(a) * BigInt::from(b) * &r_big * &r_big;
    if !upper_ok || !within_inverse_square(a, b, &r, &q) {
        return Err(LabError::domain(format!(
            "convergent {r}/{q} of sqrt({b}/{a}) violates the range or approximation contract"
        )));
    }
    Ok((r, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let q = cf_expand(1, 2, 100).unwrap();
        assert_eq!(q.cf_a0, 1);
        assert!(q.cf_preperiod.is_empty());
        assert_eq!(q.cf_period, vec![2]);
    }

    #[test]
    fn sqrt_three_halves() {
        let q = cf_expand(2, 3, 100).unwrap();
        assert_eq!(q.cf_a0, 1);
        assert_eq!(q.cf_period, vec![4, 2]);
    }

    #[test]
    fn sqrt_half_has_preperiod() {
        // sqrt(1/2) = [0; 1, 2, 2, ...]
        let q = cf_expand(2, 1, 100).unwrap();
        assert_eq!(q.cf_a0, 0);
        assert_eq!(q.cf_preperiod, vec![1]);
        assert_eq!(q.cf_period, vec![2]);
    }

    #[test]
    fn rational_root_rejected() {
        assert!(matches!(cf_expand(1, 4, 10), Err(LabError::Domain(_))));
        assert!(matches!(cf_expand(2, 8, 10), Err(LabError::Domain(_))));
    }

    #[test]
    fn terms_match_float_expansion_for_sqrt_seven() {
        // sqrt 7 = [2; 1, 1, 1, 4]
        let t: Vec<u64> = cf_terms(1, 7).unwrap().take(9).collect();
        assert_eq!(t, vec![2, 1, 1, 1, 4, 1, 1, 1, 4]);
    }

    #[test]
    fn convergent_examples() {
        let (r, q) = convergent_in_range(1, 2, 1).unwrap();
        assert_eq!((r, q), (BigInt::from(1), BigInt::from(1)));
        let (r, q) = convergent_in_range(1, 2, 5).unwrap();
        assert_eq!((r, q), (BigInt::from(7), BigInt::from(5)));
        let (r, q) = convergent_in_range(2, 3, 1).unwrap();
        assert_eq!((r, q), (BigInt::from(1), BigInt::from(1)));
        let (r, q) = convergent_in_range(2, 3, 5).unwrap();
        assert_eq!((r, q), (BigInt::from(11), BigInt::from(9)));
    }

    #[test]
    fn approximation_check_is_sharp() {
        // 17/12 approximates sqrt 2 well; 3/2 with denominator 12 would not
        assert!(within_inverse_square(1, 2, &BigInt::from(17), &BigInt::from(12)));
        assert!(!within_inverse_square(1, 2, &BigInt::from(18), &BigInt::from(12)));
    }
}

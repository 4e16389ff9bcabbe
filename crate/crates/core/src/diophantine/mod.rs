//! Exact integer machinery behind the point-counting estimates: periodic
//! continued fractions of `sqrt(b/a)`, convergent selection, counts of `m` with
//! `||m sqrt(b/a)||` small, counts in the indefinite form box
//! `|a m1^2 - b m2^2| <= b M2^2 / T`, and the class structure of solutions to
//! `n1 x^2 - n2 y^2 = N` under the unit group.
//!
//! Nothing here compares floating-point approximations of irrationals: every
//! inequality involving `sqrt(b/a)` or a power of the fundamental unit is
//! squared out with explicit sign tracking and evaluated in `BigInt`.

mod cf;
mod counting;
mod pell;

pub use cf::{cf_expand, cf_terms, convergent_in_range, convergents, CfTerms, QuadraticIrrational};
pub use counting::{count_form_box, count_near_multiples, lat2_bound, lat_bound};
pub use pell::{pell_classes, pell_fundamental, shift_class, ClassSize, PellClassReport};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{LabError, Result};
use crate::sieve::isqrt;

/// Rejects `(a, b)` with `sqrt(b/a)` rational, i.e. `ab` a perfect square.
pub(crate) fn check_irrational(a: u64, b: u64) -> Result<()> {
    if a == 0 || b == 0 {
        return Err(LabError::domain("a and b must be positive"));
    }
    let ab = a as u128 * b as u128;
    let ab = u64::try_from(ab).map_err(|_| LabError::range("a * b must fit in 64 bits"))?;
    let r = isqrt(ab);
    if r * r == ab {
        return Err(LabError::domain(format!("sqrt({b}/{a}) is rational")));
    }
    Ok(())
}

/// Sign of `u + v sqrt(d)` for integers `u, v` and nonsquare `d > 0`.
pub(crate) fn sign_surd(u: &BigInt, v: &BigInt, d: &BigInt) -> i32 {
    let su = sign(u);
    let sv = sign(v);
    if sv == 0 {
        return su;
    }
    if su == 0 || su == sv {
        return sv;
    }
    // opposite signs: compare u^2 with v^2 d
    let lhs = u * u;
    let rhs = v * v * d;
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => su,
        std::cmp::Ordering::Less => sv,
        std::cmp::Ordering::Equal => 0,
    }
}

pub(crate) fn sign(x: &BigInt) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_negative() {
        -1
    } else {
        1
    }
}

/// Exact dyadic decomposition of a finite positive `f64`: `x = num / 2^shift`.
pub(crate) fn dyadic(x: f64) -> (BigInt, u32) {
    debug_assert!(x.is_finite() && x > 0.0);
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = if exponent == 0 { (bits & ((1 << 52) - 1)) << 1 } else { (bits & ((1 << 52) - 1)) | (1 << 52) };
    // x = mantissa * 2^(exponent - 1075)
    let e = exponent - 1075;
    if e >= 0 {
        (BigInt::from(mantissa) << e as usize, 0)
    } else {
        (BigInt::from(mantissa), (-e) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surd_signs() {
        let d = BigInt::from(2);
        let s = |u: i64, v: i64| sign_surd(&BigInt::from(u), &BigInt::from(v), &d);
        assert_eq!(s(3, -2), 1); // 3 - 2.83
        assert_eq!(s(-3, 2), -1);
        assert_eq!(s(1, -1), -1);
        assert_eq!(s(0, 5), 1);
        assert_eq!(s(-4, 0), -1);
        assert_eq!(s(0, 0), 0);
    }

    #[test]
    fn dyadic_is_exact() {
        for x in [0.1, 0.5, 1.0, 3.75, 1e-300, 1e300, 5e-324] {
            let (num, shift) = dyadic(x);
            let back = num.to_string().parse::<f64>().unwrap() / 2f64.powi(shift as i32).max(f64::MIN_POSITIVE);
            if shift < 1000 {
                assert_eq!(back, x);
            }
        }
        assert_eq!(dyadic(0.5), (BigInt::from(1u64 << 52), 53));
    }
}

use num_bigint::BigInt;

use super::{check_irrational, dyadic};
use crate::error::{LabError, Result};

/// Number of `m` in `[M, 2M)` with `||m sqrt(b/a)|| <= eta`.
///
/// With `k = floor(m sqrt(b/a)) = isqrt(floor(m^2 b / a))`, the distance to `k`
/// and to `k + 1` are compared with `eta` after squaring; `eta` enters as its
/// exact dyadic value, so no rounding touches the boundary.
pub fn count_near_multiples(a: u64, b: u64, m: u64, eta: f64) -> Result<u64> {
    check_irrational(a, b)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(LabError::argument(format!("eta must lie in (0, 1], got {eta}")));
    }
    if m < 1 {
        return Err(LabError::argument("M must be at least 1"));
    }
    let (num, shift) = dyadic(eta);
    let scale = BigInt::from(1) << shift as usize;
    let a_big = BigInt::from(a);
    let b_scaled = BigInt::from(b) * &scale * &scale;
    let mut count = 0;
    for mm in m..2 * m {
        let mm = BigInt::from(mm);
        let m2b = &mm * &mm * b;
        let k = (&m2b / a).sqrt();
        let lhs = &mm * &mm * &b_scaled;
        // m alpha <= k + eta
        let up = &k * &scale + &num;
        let near_below = lhs <= &a_big * &up * &up;
        // m alpha >= k + 1 - eta
        let down = (&k + 1) * &scale - &num;
        let near_above = down <= BigInt::from(0) || lhs >= &a_big * &down * &down;
        if near_below || near_above {
            count += 1;
        }
    }
    Ok(count)
}

/// Pairs `m1 in [M1, 2 M1)`, `m2 in [M2, 2 M2)` with `|a m1^2 - b m2^2| <= b M2^2 / T`.
///
/// For fixed `m1` the admissible `m2` form an interval, located by two binary
/// searches. `T` is used at its exact dyadic value.
pub fn count_form_box(a: u64, b: u64, m1: u64, m2: u64, t: f64) -> Result<u64> {
    check_irrational(a, b)?;
    if m1 < 1 || m2 < 1 {
        return Err(LabError::argument("M1 and M2 must be at least 1"));
    }
    if !(t >= 1.0) || !t.is_finite() {
        return Err(LabError::argument(format!("T must be finite and at least 1, got {t}")));
    }
    // T = t_num / 2^shift, so the condition is t_num |a m1^2 - b m2^2| <= b M2^2 2^shift.
    let (t_num, shift) = dyadic(t);
    let bound = BigInt::from(b) * BigInt::from(m2) * BigInt::from(m2) * (BigInt::from(1) << shift as usize);
    let tb = &t_num * b;
    let mut count = 0;
    for x in m1..2 * m1 {
        let tam = &t_num * a * BigInt::from(x) * BigInt::from(x);
        // g(y) = t (b y^2 - a x^2) is increasing in y
        let g = |y: u64| &tb * BigInt::from(y) * BigInt::from(y) - &tam;
        let lo = partition_point(m2, 2 * m2, |y| g(y) < -&bound);
        let hi = partition_point(m2, 2 * m2, |y| g(y) <= bound);
        count += hi.saturating_sub(lo);
    }
    Ok(count)
}

/// First `y` in `[lo, hi)` where the monotone predicate turns false.
fn partition_point(mut lo: u64, mut hi: u64, pred: impl Fn(u64) -> bool) -> u64 {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `eta M + sqrt(eta M) (ab)^{1/4} + 1`, the shape of the near-multiple bound.
pub fn lat_bound(a: u64, b: u64, m: u64, eta: f64) -> f64 {
    let em = eta * m as f64;
    em + em.sqrt() * (a as f64 * b as f64).powf(0.25) + 1.0
}

/// `M1 M2 / T + (sqrt(M1 M2) (ab)^{1/4} / sqrt(T) + 1) 1{M2 < T}`, the shape of the form-box bound.
pub fn lat2_bound(a: u64, b: u64, m1: u64, m2: u64, t: f64) -> f64 {
    let mm = m1 as f64 * m2 as f64;
    let second = if (m2 as f64) < t { mm.sqrt() * (a as f64 * b as f64).powf(0.25) / t.sqrt() + 1.0 } else { 0.0 };
    mm / t + second
}

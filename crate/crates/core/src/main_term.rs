//! The analytic main term of the short-interval variance.
//!
//! The quantity of interest is
//!
//! ```text
//! 2 H^2 sum_{d1^2, d2^2 <= z} mu(d1) mu(d2) / (d1^2 d2^2) sum_{lambda >= 1} |W(H lambda / gcd(d1, d2)^2)|^2
//! ```
//!
//! for `W` the sinc function or a caller-supplied weight. The inner sum only
//! depends on `d0 = gcd(d1, d2)`, so the double sum is regrouped as
//! `sum_{d0} A(d0) L(H / d0^2)` with `A(d0)` obtained by Möbius inversion over
//! multiples of `d0`. That replaces `(sqrt z)^2` lambda-series by `sqrt z` of them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::default_c;
use crate::error::{LabError, Result};
use crate::par::{map_blocks, pairwise_sum, CompensatedSum, Workers};
use crate::quadrature::{adaptive_gauss, GaussRule};
use crate::sieve::{isqrt, mobius_segment};

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let k = x.round();
    let r = x - k;
    let s = (PI * r).sin();
    if k.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// `S(x) = sin(pi x) / (pi x)`, with `S(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// Smooth bump equal to 1 on `[-1, 1]` and 0 outside `(-2, 2)`.
pub fn smooth_cutoff(x: f64) -> f64 {
    fn psi(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    let a = x.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 2.0 {
        return 0.0;
    }
    let up = psi(2.0 - a);
    up / (up + psi(a - 1.0))
}

/// The regrouped coefficients `A(d0) = sum_{gcd(d1,d2) = d0, d1,d2 <= D} mu(d1) mu(d2) / (d1^2 d2^2)`.
///
/// Index 0 is unused. With `s(k) = sum_{k | d <= D} mu(d)/d^2`, the sum over pairs
/// with `k | gcd` is `s(k)^2`, and Möbius inversion over multiples recovers `A`.
pub fn gcd_coefficients(d_max: u64) -> Vec<f64> {
    let d = d_max as usize;
    if d == 0 {
        return vec![0.0];
    }
    let mu = mobius_segment(1, d_max + 1).expect("valid segment").mu;
    let mu_of = |n: usize| mu[n - 1] as f64;
    let mut s = vec![0.0; d + 1];
    for (k, sk) in s.iter_mut().enumerate().skip(1) {
        *sk = (k..d + 1).step_by(k).rev().map(|m| mu_of(m) / (m as f64 * m as f64)).sum();
    }
    let mut a = vec![0.0; d + 1];
    for (d0, ad) in a.iter_mut().enumerate().skip(1) {
        *ad = (d0..d + 1).step_by(d0).rev().map(|k| mu_of(k / d0) * s[k] * s[k]).sum();
    }
    a
}

/// A truncated `sum_{lambda >= 1} S(t lambda)^2` with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaSum {
    pub value: f64,
    /// Number of explicitly summed terms.
    pub terms: u64,
    /// Bound on `|value - exact|`.
    pub error_bound: f64,
}

/// `sum_{lambda > L} 1/lambda^2` by the asymptotic expansion of the trigamma function.
fn inverse_square_tail(l: u64) -> f64 {
    let x = l as f64 + 1.0;
    let x2 = x * x;
    1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x) + 1.0 / (42.0 * x2 * x2 * x2 * x)
}

/// `sum_{lambda >= M} z^lambda / lambda^2` for `z = exp(2 pi i t)`, by two
/// rounds of summation by parts, with a bound on the remainder.
///
/// With `g(lambda) = 1/lambda^2 - 1/(lambda - 1)^2`,
/// `sum = z^M / (M^2 (1 - z)) + z^{M+1} g(M+1) / (1 - z)^2 + R`, and since the
/// second differences of `1/lambda^2` are positive, `|R| <= |g(M+1)| / |1 - z|^2`.
fn oscillating_tail(t: f64, m: u64) -> (Complex64, f64) {
    let phase = |k: u64| {
        // 2 t k is of order 1/sqrt(rel_tol), so its rounding error stays far below the period
        let a = 2.0 * t * k as f64;
        Complex64::new(sin_pi(a + 0.5), sin_pi(a))
    };
    let one_minus_z = Complex64::new(1.0, 0.0) - phase(1);
    let mf = m as f64;
    let g = 1.0 / ((mf + 1.0) * (mf + 1.0)) - 1.0 / (mf * mf);
    let value = phase(m) / (one_minus_z * mf * mf) + phase(m + 1) * g / (one_minus_z * one_minus_z);
    (value, g.abs() / one_minus_z.norm_sqr())
}

/// `sum_{lambda >= 1} S(t lambda)^2` for `t > 0`.
///
/// Terms up to `L = ceil(1/(t sqrt(rel_tol))) + ceil(1/t)` are summed directly.
/// The remainder is `(1/(2 pi^2 t^2)) sum_{lambda > L} (1 - cos(2 pi t lambda)) / lambda^2`;
/// its smooth part is the trigamma tail and its oscillating part is summed by
/// parts ([`oscillating_tail`]). The reported bound is the smaller of the
/// summation-by-parts remainder and the crude `|S(y)| <= 1/(pi y)` tail
/// `1/(pi^2 t^2 L)`; when the crude bound is smaller (t very close to an
/// integer) the oscillating correction is dropped. Integer `t` gives exactly zero.
pub fn sinc_lambda_sum(t: f64, rel_tol: f64) -> Result<LambdaSum> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(LabError::argument(format!("lambda-sum step must be positive, got {t}")));
    }
    if !(rel_tol > 0.0) {
        return Err(LabError::argument("rel_tol must be positive"));
    }
    if t.fract() == 0.0 {
        return Ok(LambdaSum { value: 0.0, terms: 0, error_bound: 0.0 });
    }
    let l = (1.0 / (t * rel_tol.sqrt())).ceil() as u64 + (1.0 / t).ceil() as u64;
    let head = (1..=l).rev().map(|k| sinc(t * k as f64).powi(2)).collect::<CompensatedSum>().value();
    let scale = 1.0 / (PI * PI * t * t);
    let smooth = 0.5 * scale * inverse_square_tail(l);
    let crude = scale / l as f64;
    let (osc, osc_bound) = oscillating_tail(t, l + 1);
    let by_parts = 0.5 * scale * osc_bound;
    let (value, error_bound) = if by_parts < crude {
        (head + smooth - 0.5 * scale * osc.re, by_parts + scale * (l as f64 + 1.0).powi(-7))
    } else {
        (head + smooth, crude)
    };
    Ok(LambdaSum { value, terms: l, error_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SincMainTermResult {
    #[serde(rename = "H")]
    pub h: f64,
    pub z: f64,
    /// The double sum.
    pub value: f64,
    /// Largest number of lambda terms summed for any `d0`.
    pub lambda_truncation: u64,
    /// Bound on the total lambda-tail error, `2H^2 sum_{d0} |A(d0)| err(d0)`.
    pub truncation_error_bound: f64,
    /// `C sqrt(H)`
    pub prediction: f64,
    pub ratio_to_prediction: f64,
}

fn check_hz(h: f64, z: f64, rel_tol: f64) -> Result<()> {
    if !(h >= 1.0) || !h.is_finite() {
        return Err(LabError::argument(format!("H must be >= 1, got {h}")));
    }
    if !(z >= 1.0) || !z.is_finite() {
        return Err(LabError::argument(format!("z must be >= 1, got {z}")));
    }
    if !(rel_tol > 0.0) {
        return Err(LabError::argument("rel_tol must be positive"));
    }
    Ok(())
}

/// Largest `d` with `d^2 <= z`.
fn divisor_limit(z: f64) -> u64 {
    isqrt(z.floor() as u64)
}

/// Chunked map over `d0 = 1..=d_max`, results in `d0` order.
fn per_gcd<T: Send>(d_max: u64, workers: Workers, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    const CHUNK: u64 = 16;
    let blocks = d_max.div_ceil(CHUNK) as usize;
    map_blocks(workers, blocks, |b| {
        let lo = 1 + b as u64 * CHUNK;
        let hi = (lo + CHUNK).min(d_max + 1);
        (lo..hi).map(&f).collect::<Vec<T>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// The sinc double sum, grouped by `d0 = gcd(d1, d2)`.
pub fn sinc_main_term(h: f64, z: f64, rel_tol: f64, workers: Workers) -> Result<SincMainTermResult> {
    check_hz(h, z, rel_tol)?;
    let d_max = divisor_limit(z);
    let a = gcd_coefficients(d_max);
    let parts = per_gcd(d_max, workers, |d0| {
        let coeff = a[d0 as usize];
        if coeff == 0.0 {
            return Ok((0.0, 0.0, 0));
        }
        let g = (d0 * d0) as f64;
        let s = sinc_lambda_sum(h / g, rel_tol)?;
        Ok((coeff * s.value, coeff.abs() * s.error_bound, s.terms))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let bounds: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let scale = 2.0 * h * h;
    let value = scale * pairwise_sum(&values);
    let prediction = default_c() * h.sqrt();
    Ok(SincMainTermResult {
        h,
        z,
        value,
        lambda_truncation: parts.iter().map(|p| p.2).max().unwrap_or(0),
        truncation_error_bound: scale * pairwise_sum(&bounds),
        prediction,
        ratio_to_prediction: value / prediction,
    })
}

/// Decay contract for a weight: `|W(y)| <= k0 / (1 + y)^ell` for `y >= 0`, and
/// `W(y) = 0` for `y >= support` when a support is given.
///
/// The contract is the caller's obligation; it is used for truncation and is
/// not checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub k0: f64,
    pub ell: f64,
    pub support: Option<f64>,
}

/// A real weight function together with its decay contract.
pub struct Weight<'a> {
    pub f: &'a (dyn Fn(f64) -> f64 + Sync),
    pub envelope: DecayEnvelope,
}

impl Weight<'_> {
    fn eval(&self, y: f64) -> f64 {
        (self.f)(y)
    }

    fn validate(&self) -> Result<()> {
        let e = self.envelope;
        if e.support.is_none() && !(e.ell > 0.75 && e.k0 > 0.0) {
            return Err(LabError::argument("weights without compact support need k0 > 0 and ell > 3/4"));
        }
        if let Some(s) = e.support {
            if !(s > 0.0) || !s.is_finite() {
                return Err(LabError::argument("support must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// `sum_{lambda >= 1} |W(t lambda)|^2`, truncated by the decay contract.
pub fn weight_lambda_sum(weight: &Weight<'_>, t: f64, rel_tol: f64) -> Result<LambdaSum> {
    weight.validate()?;
    if !(t > 0.0) || !(rel_tol > 0.0) {
        return Err(LabError::argument("lambda-sum needs t > 0 and rel_tol > 0"));
    }
    let env = weight.envelope;
    let term = |k: u64| weight.eval(t * k as f64).powi(2);
    if let Some(support) = env.support {
        let l = (support / t).floor() as u64;
        let value = (1..=l).rev().map(term).collect::<CompensatedSum>().value();
        return Ok(LambdaSum { value, terms: l, error_bound: 0.0 });
    }
    // sum_{lambda > L} k0^2 (t lambda)^{-2 ell} <= k0^2 t^{-2 ell} L^{1 - 2 ell} / (2 ell - 1)
    let p = 2.0 * env.ell;
    let tail_bound = |l: u64| env.k0 * env.k0 * t.powf(-p) * (l as f64).powf(1.0 - p) / (p - 1.0);
    const MAX_TERMS: u64 = 1 << 34;
    let mut acc = CompensatedSum::default();
    let mut done = 0u64;
    let mut next = (1.0 / t).ceil().max(16.0) as u64;
    loop {
        (done + 1..=next).rev().for_each(|k| acc.add(term(k)));
        let value = acc.value();
        done = next;
        let bound = tail_bound(done);
        if bound <= rel_tol * value.abs() || bound < f64::MIN_POSITIVE {
            return Ok(LambdaSum { value, terms: done, error_bound: bound });
        }
        if done >= MAX_TERMS {
            return Err(LabError::argument("weight decays too slowly for the requested tolerance"));
        }
        next = (done * 2).min(MAX_TERMS);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedMainTerm {
    #[serde(rename = "H")]
    pub h: f64,
    pub z: f64,
    /// The double sum with `W` in place of `S`.
    pub value: f64,
    pub truncation_error_bound: f64,
    /// `pi * int_0^inf |W(y)|^2 sqrt(y) dy`
    pub moment: f64,
    /// `C sqrt(H) * moment`
    pub prediction: f64,
    pub ratio_to_prediction: f64,
}

/// The weighted double sum and the two sides of its asymptotic comparison.
pub fn weighted_main_term(
    h: f64,
    z: f64,
    weight: &Weight<'_>,
    rel_tol: f64,
    workers: Workers,
) -> Result<WeightedMainTerm> {
    check_hz(h, z, rel_tol)?;
    weight.validate()?;
    let d_max = divisor_limit(z);
    let a = gcd_coefficients(d_max);
    let parts = per_gcd(d_max, workers, |d0| {
        let coeff = a[d0 as usize];
        if coeff == 0.0 {
            return Ok((0.0, 0.0));
        }
        let s = weight_lambda_sum(weight, h / (d0 * d0) as f64, rel_tol)?;
        Ok((coeff * s.value, coeff.abs() * s.error_bound))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let scale = 2.0 * h * h;
    let value = scale * pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let bound = scale * pairwise_sum(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
    let moment = weight_moment(weight, rel_tol)?;
    let prediction = default_c() * h.sqrt() * moment;
    Ok(WeightedMainTerm {
        h,
        z,
        value,
        truncation_error_bound: bound,
        moment,
        prediction,
        ratio_to_prediction: value / prediction,
    })
}

/// `pi * int_0^inf |W(y)|^2 sqrt(y) dy` by panel-adaptive Gauss–Legendre.
///
/// The first unit panel is integrated in `y = u^2` to remove the square-root
/// cusp; the cutoff is the support or the point where the envelope tail drops
/// below `rel_tol`.
pub fn weight_moment(weight: &Weight<'_>, rel_tol: f64) -> Result<f64> {
    weight.validate()?;
    let env = weight.envelope;
    let tol = rel_tol.max(1e-15);
    let cutoff = match env.support {
        Some(s) => s,
        None => {
            let p = 2.0 * env.ell - 1.5;
            ((env.k0 * env.k0 / (p * tol)).powf(1.0 / p)).clamp(1.0, 1e6)
        }
    };
    let f = |y: f64| weight.eval(y).powi(2) * y.sqrt();
    let first_end = cutoff.min(1.0);
    let u_end = first_end.sqrt();
    let mut total = adaptive_gauss(&|u: f64| 2.0 * u * u * weight.eval(u * u).powi(2), 0.0, u_end, tol * 1e-2);
    let mut a = first_end;
    while a < cutoff {
        let b = (a + 1.0).min(cutoff);
        total += adaptive_gauss(&f, a, b, tol * 1e-2);
        a = b;
    }
    Ok(PI * total)
}

/// `int_0^inf S(y)^2 sqrt(y) dy`, whose exact value is `1/pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfMoment {
    pub value: f64,
    /// Integral over `[0, 1]` alone.
    pub partial_to_one: f64,
    /// Panel summation stops at this integer.
    pub cutoff: u64,
    /// Mean-value estimate of the integral beyond the cutoff, included in `value`.
    pub tail_estimate: f64,
    /// `(1/pi^2) int_Y^inf y^{-3/2} dy = 2 / (pi^2 sqrt(Y))`
    pub tail_bound: f64,
}

/// Sums 20-point Gauss panels between consecutive zeros of `S` up to `Y = 10^5`
/// and adds the mean-value tail `(1/(2 pi^2)) int_Y^inf y^{-3/2} dy`; at an
/// integer cutoff the oscillating correction is `O(Y^{-3/2})`.
pub fn sinc_half_moment() -> HalfMoment {
    sinc_half_moment_to(100_000)
}

pub fn sinc_half_moment_to(cutoff: u64) -> HalfMoment {
    let rule = GaussRule::new(20);
    let first = rule.integrate(|u| 2.0 * u * u * sinc(u * u).powi(2), 0.0, 1.0);
    let mut panels: Vec<f64> =
        (1..cutoff).map(|k| rule.integrate(|y| sinc(y).powi(2) * y.sqrt(), k as f64, k as f64 + 1.0)).collect();
    panels.reverse();
    let y = cutoff as f64;
    let tail_estimate = 1.0 / (PI * PI * y.sqrt());
    HalfMoment {
        value: first + pairwise_sum(&panels) + tail_estimate,
        partial_to_one: first,
        cutoff,
        tail_estimate,
        tail_bound: 2.0 / (PI * PI * y.sqrt()),
    }
}

//! Oracles shared by the integration tests. None of them touch the library:
//! trial division, window scans, and closed forms from Poisson summation.

#![allow(dead_code)]

pub fn mobius_naive(mut n: u64) -> i64 {
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

pub fn squarefree_naive(n: u64) -> bool {
    n >= 1 && mobius_naive(n) != 0
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Mean of `(#{squarefree m in (n, n + H]} - 6H/pi^2)^2` over `n` in `[X, 2X)`, by scanning each window.
pub fn interval_variance_scan(x: u64, h: u64) -> f64 {
    let center = 6.0 * h as f64 / (std::f64::consts::PI * std::f64::consts::PI);
    let total: f64 = (x..2 * x)
        .map(|n| {
            let c = (n + 1..=n + h).filter(|&m| squarefree_naive(m)).count() as f64;
            (c - center) * (c - center)
        })
        .sum();
    total / x as f64
}

/// Mean over reduced classes `a mod q` of `(count - mean)^2`, with
/// `mean = (6/pi^2)(x/q)(1 - 1/q^2)^{-1}` for prime `q`.
pub fn ap_variance_scan(x: u64, q: u64) -> f64 {
    let mut counts = vec![0u64; q as usize];
    for n in (1..=x).filter(|&n| squarefree_naive(n)) {
        counts[(n % q) as usize] += 1;
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let qf = q as f64;
    let mean = 6.0 / pi2 * x as f64 / qf * qf * qf / (qf * qf - 1.0);
    counts[1..].iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (qf - 1.0)
}

/// `sum_{lambda >= 1} S(lambda t)^2` from Poisson summation: the Fourier
/// transform of `S^2` is the triangle `max(0, 1 - |xi|)`, so
/// `sum_{lambda in Z} S(lambda t)^2 = (1/t) sum_{|k| < t} (1 - |k|/t)`.
pub fn lambda_sum_poisson(t: f64) -> f64 {
    let kmax = t.ceil() as i64;
    let full: f64 = (-kmax..=kmax).map(|k| (1.0 - k.unsigned_abs() as f64 / t).max(0.0)).sum::<f64>() / t;
    (full - 1.0) / 2.0
}

/// `2H^2 sum_{d1, d2 <= sqrt z} mu(d1) mu(d2) / (d1 d2)^2 sum_{lambda >= 1} S(H lambda / gcd(d1, d2)^2)^2`
/// by the pair loop, with the inner series in closed form.
pub fn main_term_pairs(h: f64, z: f64) -> f64 {
    let zf = z.floor() as u64;
    let mut d = 0;
    while (d + 1) * (d + 1) <= zf {
        d += 1;
    }
    let mut total = 0.0;
    for d1 in 1..=d {
        let m1 = mobius_naive(d1);
        if m1 == 0 {
            continue;
        }
        for d2 in 1..=d {
            let m2 = mobius_naive(d2);
            if m2 == 0 {
                continue;
            }
            let g = gcd(d1, d2);
            let w = (m1 * m2) as f64 / ((d1 * d1) as f64 * (d2 * d2) as f64);
            total += w * lambda_sum_poisson(h / (g * g) as f64);
        }
    }
    2.0 * h * h * total
}

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::{cf::convergents, sign, sign_surd};
use crate::error::{LabError, Result};

/// Class sizes `(#T_m^+, #T_m^-)` for one index `m`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassSize {
    pub plus: u64,
    pub minus: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PellClassReport {
    pub n1: u64,
    pub n2: u64,
    pub rhs: i64,
    #[serde(rename = "box")]
    pub box_size: u64,
    /// `(x0, y0)` with `x0^2 - 4 n1 n2 y0^2 = 4`, as decimal strings.
    pub fundamental: (String, String),
    /// `eps = x0/2 + y0 sqrt(n1 n2)`, rounded.
    pub epsilon: f64,
    pub solutions: Vec<(i64, i64)>,
    pub class_sizes: BTreeMap<i64, ClassSize>,
    /// Indices whose whole class lies inside the box.
    pub complete_classes: Vec<i64>,
    /// `#T_m^+` takes one value across `complete_classes`.
    pub plus_constant_on_complete: bool,
}

/// Least positive `(x0, y0)` with `x0^2 - 4 D y0^2 = 4`.
///
/// Every solution has `x0` even, so `(x0/2, y0)` is the fundamental solution of
/// `X^2 - D Y^2 = 1`, read off the first convergent of `sqrt(D)` with that norm.
pub fn pell_fundamental(d: u64) -> Result<(BigInt, BigInt)> {
    if d < 2 {
        return Err(LabError::domain("D must be at least 2"));
    }
    let dd = BigInt::from(d);
    let (p, q) = convergents(1, d)?
        .find(|(p, q)| p * p - &dd * q * q == BigInt::one())
        .expect("Pell equation X^2 - D Y^2 = 1 is always solvable for nonsquare D");
    Ok((p * 2, q))
}

/// `u + v sqrt(D)` with integer coordinates.
#[derive(Debug, Clone, PartialEq)]
struct Surd {
    u: BigInt,
    v: BigInt,
}

impl Surd {
    fn mul(&self, other: &Surd, d: &BigInt) -> Surd {
        Surd { u: &self.u * &other.u + &self.v * &other.v * d, v: &self.u * &other.v + &self.v * &other.u }
    }

    fn conj(&self) -> Surd {
        Surd { u: self.u.clone(), v: -&self.v }
    }

    /// `|w / conj(w)| >= 1`, equivalently `(u + v sqrt D)^2 >= (u - v sqrt D)^2`, i.e. `uv >= 0`.
    fn ratio_at_least_one(&self) -> bool {
        sign(&self.u) * sign(&self.v) >= 0
    }
}

/// Class index `m` with `eps^{2m-2} <= R < eps^{2m}`, `R = |w / conj(w)|`.
///
/// Multiplying `w` by `eps` multiplies `R` by `eps^2` since `eps` has norm 1,
/// so `w` is walked into the window `[1, eps^2)`, which is class 1.
fn class_index(w: &Surd, eps: &Surd, d: &BigInt) -> i64 {
    let eps_bar = eps.conj();
    let mut w = w.clone();
    let mut k = 0i64;
    while !w.ratio_at_least_one() {
        w = w.mul(eps, d);
        k += 1;
    }
    loop {
        let down = w.mul(&eps_bar, d);
        if !down.ratio_at_least_one() {
            break;
        }
        w = down;
        k -= 1;
    }
    1 - k
}

/// Solutions of `n1 x^2 - n2 y^2 = rhs` with `|x|, |y| <= box`, grouped into the
/// classes `T_m^+` (`sqrt(n1) x > sqrt(n2) y`) and `T_m^-`.
///
/// The class index is computed from `w = n1 x + y sqrt(n1 n2)`, for which
/// `w / conj(w)` equals the ratio `(sqrt(n1) x + sqrt(n2) y) / (sqrt(n1) x - sqrt(n2) y)`.
/// Indices `m <= 0` occur and are reported as such.
pub fn pell_classes(n1: u64, n2: u64, rhs: i64, box_size: u64) -> Result<PellClassReport> {
    if n1 < 1 || n2 < 1 {
        return Err(LabError::domain("n1 and n2 must be positive"));
    }
    if rhs == 0 {
        return Err(LabError::domain("rhs must be nonzero"));
    }
    if !(1..=1 << 30).contains(&box_size) {
        return Err(LabError::range("box must lie in [1, 2^30]"));
    }
    let d_u = n1.checked_mul(n2).ok_or_else(|| LabError::range("n1 * n2 overflows u64"))?;
    let (x0, y0) = pell_fundamental(d_u)?;
    let d = BigInt::from(d_u);
    let eps = Surd { u: &x0 / 2, v: y0.clone() };

    let (n1i, n2i, rhs_i) = (n1 as i128, n2 as i128, rhs as i128);
    let bx = box_size as i128;
    let mut solutions = Vec::new();
    for x in -bx..=bx {
        let num = n1i * x * x - rhs_i;
        if num < 0 || num % n2i != 0 {
            continue;
        }
        let y2 = num / n2i;
        let y = y2.sqrt();
        if y * y != y2 || y > bx {
            continue;
        }
        solutions.push((x as i64, y as i64));
        if y != 0 {
            solutions.push((x as i64, -y as i64));
        }
    }
    solutions.sort_unstable();

    let mut class_sizes: BTreeMap<i64, ClassSize> = BTreeMap::new();
    for &(x, y) in &solutions {
        let w = Surd { u: BigInt::from(n1) * x, v: BigInt::from(y) };
        let m = class_index(&w, &eps, &d);
        // sqrt(n1) x > sqrt(n2) y  <=>  n1 x - y sqrt(D) > 0
        let plus = sign_surd(&w.u, &-&w.v, &d) > 0;
        let slot = class_sizes.entry(m).or_default();
        if plus {
            slot.plus += 1;
        } else {
            slot.minus += 1;
        }
    }

    let epsilon = eps.u.to_f64().unwrap_or(f64::INFINITY) + y0.to_f64().unwrap_or(f64::INFINITY) * (d_u as f64).sqrt();
    let complete_classes = complete_classes(n1, n2, rhs, box_size, epsilon);
    let mut plus_counts = complete_classes.iter().map(|m| class_sizes.get(m).copied().unwrap_or_default().plus);
    let first = plus_counts.next();
    let plus_constant_on_complete = plus_counts.all(|c| Some(c) == first);

    Ok(PellClassReport {
        n1,
        n2,
        rhs,
        box_size,
        fundamental: (x0.to_string(), y0.to_string()),
        epsilon,
        solutions,
        class_sizes,
        complete_classes,
        plus_constant_on_complete,
    })
}

/// Indices `m` whose every solution satisfies `|x|, |y| <= box`.
///
/// On class `m`, `sqrt R` ranges over `[eps^{m-1}, eps^m)`, and
/// `|x| <= sqrt|rhs| (sqrt R + 1/sqrt R) / (2 sqrt n1)`, likewise `y` with `n2`.
/// The extreme is at `eps^k + eps^{-k}`, `k = max(m, 1 - m)`. A relative margin
/// of `1e-9` keeps rounding from admitting a class that reaches the boundary.
fn complete_classes(n1: u64, n2: u64, rhs: i64, box_size: u64, eps: f64) -> Vec<i64> {
    let root = (rhs.unsigned_abs() as f64).sqrt();
    let reach = |k: i32| {
        let spread = eps.powi(k) + eps.powi(-k);
        let x = root * spread / (2.0 * (n1 as f64).sqrt());
        let y = root * spread / (2.0 * (n2 as f64).sqrt());
        x.max(y) * (1.0 + 1e-9)
    };
    let limit = box_size as f64;
    let mut out = Vec::new();
    let mut k = 1;
    while reach(k) <= limit && k < 4096 {
        // k = m for m >= 1 and k = 1 - m for m <= 0
        out.push(1 - k as i64);
        out.push(k as i64);
        k += 1;
    }
    out.sort_unstable();
    out
}

/// The unit action `(x, y) -> (X1 x + n2 Y1 y, n1 Y1 x + X1 y)`, which carries `T_m^±` to `T_{m+1}^±`.
pub fn shift_class(n1: u64, n2: u64, fundamental: (&BigInt, &BigInt), (x, y): (i64, i64)) -> (BigInt, BigInt) {
    let x1 = fundamental.0 / 2;
    let y1 = fundamental.1;
    let (x, y) = (BigInt::from(x), BigInt::from(y));
    (&x1 * &x + y1 * n2 * &y, y1 * n1 * &x + &x1 * &y)
}

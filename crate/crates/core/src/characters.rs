//! Dirichlet characters to a prime modulus, built from a primitive root and a
//! discrete-logarithm table, and the orthogonality identity they satisfy.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::sieve::{distinct_prime_factors, is_prime};

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mut b = base as u128 % m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        exp >>= 1;
    }
    acc as u64
}

/// Smallest primitive root modulo the prime `q`.
pub fn primitive_root(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(LabError::precondition(format!("modulus {q} is not prime")));
    }
    if q == 2 {
        return Ok(1);
    }
    let phi = q - 1;
    let factors = distinct_prime_factors(phi);
    (2..q)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, phi / f, q) != 1))
        .ok_or_else(|| LabError::domain(format!("no primitive root found modulo {q}")))
}

/// All `q - 1` characters modulo a prime `q`.
///
/// Character `j` sends `g^k` to `exp(2 pi i j k / (q - 1))`; `j = 0` is principal.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    q: u64,
    /// `index[n]` is the discrete logarithm of `n` to the base of the primitive root.
    index: Vec<u32>,
    roots: Vec<Complex64>,
}

impl CharacterTable {
    pub fn new(q: u64) -> Result<Self> {
        if q > 1 << 24 {
            return Err(LabError::argument(format!("modulus {q} too large for an explicit character table")));
        }
        let g = primitive_root(q)?;
        let phi = (q - 1) as usize;
        let mut index = vec![u32::MAX; q as usize];
        let mut power = 1u64;
        for k in 0..phi {
            index[power as usize] = k as u32;
            power = power * g % q;
        }
        let roots = (0..phi).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / phi as f64)).collect();
        Ok(CharacterTable { q, index, roots })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn count(&self) -> usize {
        (self.q - 1) as usize
    }

    /// `chi_j(n)`; zero when `q | n`.
    pub fn value(&self, j: usize, n: u64) -> Complex64 {
        let r = (n % self.q) as usize;
        if r == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.index[r] as usize;
        self.roots[(j * k) % self.count()]
    }

    /// `sum_n b_n chi_j(n)` for coefficients indexed from `n = 1`.
    pub fn twisted_sum(&self, j: usize, coefficients: &[Complex64]) -> Complex64 {
        coefficients.iter().enumerate().map(|(i, &b)| b * self.value(j, i as u64 + 1)).sum()
    }
}

/// Both sides of
/// `(1/phi(q)) sum_{chi != chi_0} |sum_n b_n chi(n)|^2
///   = sum_{(a,q)=1} |sum_{n = a (q)} b_n - (1/phi(q)) sum_{(n,q)=1} b_n|^2`,
/// character side first. Coefficients are `b_1, ..., b_N`.
pub fn orthogonality_check(q: u64, coefficients: &[Complex64]) -> Result<(f64, f64)> {
    if coefficients.len() >= 100_000 {
        return Err(LabError::argument("orthogonality check supports N < 10^5 coefficients"));
    }
    let table = CharacterTable::new(q)?;
    let phi = table.count() as f64;
    let character_side = (1..table.count()).map(|j| table.twisted_sum(j, coefficients).norm_sqr()).sum::<f64>() / phi;

    let mut classes = vec![Complex64::new(0.0, 0.0); q as usize];
    for (i, &b) in coefficients.iter().enumerate() {
        classes[(i as u64 + 1) as usize % q as usize] += b;
    }
    let coprime_total: Complex64 = classes[1..].iter().sum();
    let mean = coprime_total / phi;
    let residue_side = classes[1..].iter().map(|&c| (c - mean).norm_sqr()).sum();
    Ok((character_side, residue_side))
}

//! Integer primitives shared by the simulator and the auditor.
//!
//! Everything here works on `u64` values with `u128` intermediates. All
//! rational comparisons are done by cross-multiplication, never in floating
//! point.

use serde::Serialize;

use crate::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `base^exponent mod modulus` by square-and-multiply.
pub fn mod_pow(base: u64, exponent: u64, modulus: u64) -> Result<u64> {
    if modulus < 2 {
        return Err(Error::InvalidModulus(modulus));
    }
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    let mut e = exponent;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    Ok(acc as u64)
}

/// Multiplicative order of `x` modulo `n`, found by stepping through
/// `x, x², x³, …` until the product returns to 1.
///
/// This is deliberately the naive walk. The simulator never calls it to
/// recover an order; it is the reference the recovered orders are checked
/// against.
pub fn order_oracle(x: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidModulus(n));
    }
    if x == 0 || x >= n {
        return Err(Error::OutOfRange {
            value: x,
            expected: format!("1 <= x < {n}"),
        });
    }
    let g = gcd(x, n);
    if g != 1 {
        return Err(Error::NotAUnit { x, n, gcd: g });
    }
    let (x, m) = (x as u128, n as u128);
    let mut power = x % m;
    let mut r = 1;
    while power != 1 {
        power = power * x % m;
        r += 1;
    }
    Ok(r)
}

/// Smallest prime factor of `n >= 2`, by trial division.
pub fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n >= 2);
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut p = 3;
    while p <= n / p {
        if n.is_multiple_of(p) {
            return p;
        }
        p += 2;
    }
    n
}

/// Returns `Some((p, e))` when `n = p^e` for a prime `p` and `e >= 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let p = smallest_prime_factor(n);
    let mut rest = n;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// Euler's totient via trial-division factorisation.
pub fn euler_phi(r: u64) -> Result<u64> {
    if r == 0 {
        return Err(Error::InvalidArgument("totient of 0 is undefined".into()));
    }
    let mut rest = r;
    let mut phi = r;
    while rest > 1 {
        let p = smallest_prime_factor(rest);
        while rest.is_multiple_of(p) {
            rest /= p;
        }
        phi = phi / p * (p - 1);
    }
    Ok(phi)
}

/// The representative of `v mod q` in the half-open interval `(-q/2, q/2]`.
///
/// # Panics
///
/// If `q < 2`.
pub fn signed_residue(v: i128, q: u64) -> i64 {
    assert!(q >= 2, "signed_residue needs q >= 2, got {q}");
    let q = q as i128;
    let t = v.rem_euclid(q);
    // t in [0, q); fold the upper half down. 2t > q  <=>  t > q/2.
    if 2 * t > q {
        (t - q) as i64
    } else {
        t as i64
    }
}

/// `⌈log₂ n⌉` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    64 - (n - 1).leading_zeros()
}

/// A continued-fraction expansion of `c/q` together with every convergent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergentSequence {
    pub numerator_c: u64,
    pub denominator_q: u64,
    pub partial_quotients: Vec<u64>,
    /// `(d_i, r_i)` pairs, each in lowest terms.
    pub convergents: Vec<(u64, u64)>,
}

impl ConvergentSequence {
    pub fn last(&self) -> (u64, u64) {
        *self
            .convergents
            .last()
            .expect("an expansion always has at least one convergent")
    }
}

/// Expands `c/q` (with `0 <= c < q`) into partial quotients and convergents.
pub fn continued_fraction(c: u64, q: u64) -> Result<ConvergentSequence> {
    if q == 0 || c >= q {
        return Err(Error::OutOfRange {
            value: c,
            expected: format!("0 <= c < q = {q}"),
        });
    }

    let mut partial_quotients = Vec::new();
    let mut convergents = Vec::new();
    // h_{i-1}, h_{i-2} and k_{i-1}, k_{i-2}
    let (mut h1, mut h2): (u64, u64) = (1, 0);
    let (mut k1, mut k2): (u64, u64) = (0, 1);
    let (mut num, mut den) = (c, q);
    while den != 0 {
        let a = num / den;
        (num, den) = (den, num - a * den);
        let h = a * h1 + h2;
        let k = a * k1 + k2;
        partial_quotients.push(a);
        convergents.push((h, k));
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
    }

    Ok(ConvergentSequence {
        numerator_c: c,
        denominator_q: q,
        partial_quotients,
        convergents,
    })
}

/// `|c/q - d/r| <= 1/(2q)`, evaluated as `2·|c·r - d·q| <= r`.
pub fn within_half_step(c: u64, q: u64, d: u64, r: u64) -> bool {
    let lhs = (c as i128 * r as i128 - d as i128 * q as i128).unsigned_abs();
    2 * lhs <= r as u128
}

/// Picks the convergent `d/r` of `c/q` with the largest `r <= denominator_bound`
/// that lies within `1/(2q)` of `c/q`.
///
/// Returns `None` when no convergent qualifies, or when `c >= q`.
pub fn recover_rational(c: u64, q: u64, denominator_bound: u64) -> Option<(u64, u64)> {
    let expansion = continued_fraction(c, q).ok()?;
    expansion
        .convergents
        .iter()
        .copied()
        .filter(|&(d, r)| r <= denominator_bound && within_half_step(c, q, d, r))
        .max_by_key(|&(_, r)| r)
}

//! Independent reference computations. Nothing here calls the closed forms
//! or the fast paths under test.

#![allow(dead_code)]

use std::f64::consts::PI;

pub fn naive_gcd(a: u64, b: u64) -> u64 {
    (1..=a.max(b)).rev().find(|d| a.is_multiple_of(*d) && b.is_multiple_of(*d)).unwrap_or(0)
}

/// Powers of `x` modulo `n` by repeated multiplication, `x^0 .. x^(len-1)`.
pub fn power_table(x: u64, n: u64, len: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(len as usize);
    let mut acc = 1 % n;
    for _ in 0..len {
        out.push(acc);
        acc = acc * x % n;
    }
    out
}

/// φ(r) by counting `gcd(j, r) = 1` over `[1, r]` with Euclid.
pub fn totient_by_counting(r: u64) -> u64 {
    fn g(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    (1..=r).filter(|&j| g(j, r) == 1).count() as u64
}

/// `|(1/q) Σ_{a : x^a ≡ x^k} exp(2πi·a·c/q)|²`, summed directly over every
/// `a` in `[0, q)`.
pub fn brute_force_joint(n: u64, x: u64, q: u64, c: u64, k: u64) -> f64 {
    let powers = power_table(x, n, q.max(k + 1));
    let target = powers[k as usize];
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for a in 0..q {
        if powers[a as usize] == target {
            let phase = 2.0 * PI * ((a * c) % q) as f64 / q as f64;
            re += phase.cos();
            im += phase.sin();
        }
    }
    (re * re + im * im) / (q * q) as f64
}

/// Marginal `P(c)` via the brute-force joint over every `k < r`.
pub fn brute_force_marginal(n: u64, x: u64, r: u64, q: u64, c: u64) -> f64 {
    (0..r).map(|k| brute_force_joint(n, x, q, c, k)).sum()
}

/// Least `r >= 1` with `x^r ≡ 1 (mod n)` by scanning a power table.
pub fn order_by_scan(x: u64, n: u64) -> u64 {
    let powers = power_table(x, n, n + 1);
    (1..=n).find(|&j| powers[j as usize] == 1).expect("x is a unit")
}

/// Riemann-sum check of `(1/r)|∫₀¹ exp(2πiuθ) du|` with `steps` midpoints.
pub fn integral_by_quadrature(theta: f64, r: u64, steps: usize) -> f64 {
    let h = 1.0 / steps as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..steps {
        let u = (i as f64 + 0.5) * h;
        re += (2.0 * PI * u * theta).cos() * h;
        im += (2.0 * PI * u * theta).sin() * h;
    }
    (re * re + im * im).sqrt() / r as f64
}

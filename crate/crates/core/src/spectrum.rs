//! Post-QFT measurement statistics, computed in closed form.
//!
//! After modular exponentiation and the QFT on register-1, the amplitude of
//! `|c, x^k⟩` is a geometric series over the exponents `a = b·r + k` that
//! share the residue `k`:
//!
//! ```text
//! P(c, k) = | (1/q) Σ_{b=0}^{m_k - 1} exp(2πi·b·rc/q) |²
//!         = sin²(π·m_k·rc/q) / (q²·sin²(π·rc/q))      (rc ≢ 0 mod q)
//!         = (m_k/q)²                                   (rc ≡ 0 mod q)
//! ```
//!
//! with `m_k = ⌊(q - k - 1)/r⌋ + 1`. Only `m_k` depends on `k`, and it takes
//! at most two values, so a full spectrum costs `O(q)` work.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::numtheory::{ceil_log2, gcd, order_oracle, signed_residue};
use crate::{Error, Result};

/// Spectra at or above this size are filled in parallel.
const PARALLEL_THRESHOLD: u64 = 1 << 14;

/// Relative slack allowed when comparing `p_min` against `4/(π² r²)`.
pub const SINC_BOUND_SLACK: f64 = 0.05;

/// A modulus, a base and the base's true order (from the brute-force oracle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactoringInstance {
    n: u64,
    x: u64,
    ell: u32,
    r: u64,
}

impl FactoringInstance {
    pub fn new(n: u64, x: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::OutOfRange {
                value: n,
                expected: "n >= 3".into(),
            });
        }
        if !(2..n).contains(&x) {
            return Err(Error::OutOfRange {
                value: x,
                expected: format!("2 <= x <= {}", n - 1),
            });
        }
        let g = gcd(x, n);
        if g != 1 {
            return Err(Error::NotAUnit { x, n, gcd: g });
        }
        let r = order_oracle(x, n)?;
        Ok(Self {
            n,
            x,
            ell: ceil_log2(n),
            r,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    /// Register-2 width `⌈log₂ n⌉`.
    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// True order of `x` modulo `n`.
    pub fn r(&self) -> u64 {
        self.r
    }
}

pub(crate) fn check_power_of_two(q: u64) -> Result<()> {
    if q < 2 || !q.is_power_of_two() {
        return Err(Error::OutOfRange {
            value: q,
            expected: "a power of two >= 2".into(),
        });
    }
    Ok(())
}

/// `m_k`: how many `a` in `[0, q)` are congruent to `k` modulo `r`.
pub fn term_count(q: u64, r: u64, k: u64) -> u64 {
    if k >= q {
        0
    } else {
        (q - k - 1) / r + 1
    }
}

/// `|(1/q) Σ_{b<m} exp(2πi·b·t/q)|²` where `t = rc mod q`.
fn geometric_power(m: u64, t: u64, q: u64) -> f64 {
    let qf = q as f64;
    if t == 0 {
        let a = m as f64 / qf;
        return a * a;
    }
    // sin² has period π, so reduce m·t modulo q before scaling.
    let mt = ((m as u128 * t as u128) % q as u128) as f64;
    let num = (PI * mt / qf).sin();
    let den = (PI * t as f64 / qf).sin();
    let ratio = num / (den * qf);
    ratio * ratio
}

fn residue_class(r: u64, c: u64, q: u64) -> u64 {
    ((r as u128 * c as u128) % q as u128) as u64
}

/// Exact probability of observing `|c, x^k⟩`.
pub fn joint_probability(instance: &FactoringInstance, q: u64, c: u64, k: u64) -> Result<f64> {
    check_power_of_two(q)?;
    let r = instance.r();
    if k >= r {
        return Err(Error::OutOfRange {
            value: k,
            expected: format!("0 <= k < r = {r}"),
        });
    }
    if c >= q {
        return Err(Error::OutOfRange {
            value: c,
            expected: format!("0 <= c < q = {q}"),
        });
    }
    Ok(geometric_power(term_count(q, r, k), residue_class(r, c, q), q))
}

/// `{r·c}_q` folded into `(-q/2, q/2]`.
pub fn rc_residue(r: u64, c: u64, q: u64) -> i64 {
    signed_residue(r as i128 * c as i128, q)
}

/// `c` is "good" when `|{rc}_q| <= r/2`.
pub fn is_good(r: u64, c: u64, q: u64) -> bool {
    2 * rc_residue(r, c, q).unsigned_abs() <= r
}

/// All `c` in `[0, q)` with `|{rc}_q| <= r/2`, ascending.
pub fn good_c_set(r: u64, q: u64) -> Vec<u64> {
    assert!(r >= 1 && q >= 2);
    // A good c sits within 1/2 of d·q/r for some d in [0, r].
    let mut out: Vec<u64> = (0..=r)
        .flat_map(|d| {
            let lo = (d as u128 * q as u128 / r as u128) as u64;
            [lo, lo + 1]
        })
        .filter(|&c| c < q && is_good(r, c, q))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// One line of a spectrum dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub c: u64,
    pub marginal_probability: f64,
    pub signed_residue: i64,
    pub good_flag: bool,
}

/// Marginal distribution of register-1 for a fixed instance and `q`.
///
/// Joint probabilities are recomputed on demand from the closed form; only
/// the marginals `P(c) = Σ_k P(c, k)` are stored.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    instance: FactoringInstance,
    q: u64,
    marginals: Vec<f64>,
}

/// The (at most two) distinct term counts over `k in [0, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermSplit {
    /// `k < long_count` have `m_k = short + 1`.
    pub long_count: u64,
    /// The remaining `r - long_count` residues have `m_k = short`.
    pub short: u64,
}

impl TermSplit {
    pub fn new(q: u64, r: u64) -> Self {
        Self {
            long_count: q % r,
            short: q / r,
        }
    }
}

impl SpectrumTable {
    pub fn instance(&self) -> &FactoringInstance {
        &self.instance
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn r(&self) -> u64 {
        self.instance.r()
    }

    pub fn split(&self) -> TermSplit {
        TermSplit::new(self.q, self.r())
    }

    pub fn marginals(&self) -> &[f64] {
        &self.marginals
    }

    pub fn marginal(&self, c: u64) -> f64 {
        self.marginals[c as usize]
    }

    /// `P(c, k)`; panics when `c >= q` or `k >= r`.
    pub fn joint(&self, c: u64, k: u64) -> f64 {
        assert!(c < self.q && k < self.r());
        geometric_power(
            term_count(self.q, self.r(), k),
            residue_class(self.r(), c, self.q),
            self.q,
        )
    }

    pub fn signed_residue(&self, c: u64) -> i64 {
        rc_residue(self.r(), c, self.q)
    }

    pub fn is_good(&self, c: u64) -> bool {
        is_good(self.r(), c, self.q)
    }

    pub fn row(&self, c: u64) -> SpectrumRow {
        SpectrumRow {
            c,
            marginal_probability: self.marginal(c),
            signed_residue: self.signed_residue(c),
            good_flag: self.is_good(c),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = SpectrumRow> + '_ {
        (0..self.q).map(|c| self.row(c))
    }

    /// `Σ_c P(c)`.
    pub fn normalization(&self) -> f64 {
        self.marginals.iter().sum()
    }

    /// `c` values whose marginal exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<u64> {
        (0..self.q)
            .filter(|&c| self.marginal(c) > threshold)
            .collect()
    }
}

/// Materialises the marginal distribution over all `c in [0, q)`.
pub fn build_spectrum(instance: &FactoringInstance, q: u64) -> Result<SpectrumTable> {
    check_power_of_two(q)?;
    let r = instance.r();
    let split = TermSplit::new(q, r);
    let long_weight = split.long_count as f64;
    let short_weight = (r - split.long_count) as f64;

    let marginal = |c: u64| {
        let t = residue_class(r, c, q);
        let mut p = 0.0;
        if split.long_count > 0 {
            p += long_weight * geometric_power(split.short + 1, t, q);
        }
        if split.short > 0 {
            p += short_weight * geometric_power(split.short, t, q);
        }
        p
    };

    let marginals = if q >= PARALLEL_THRESHOLD {
        (0..q).into_par_iter().map(marginal).collect()
    } else {
        (0..q).map(marginal).collect()
    };

    Ok(SpectrumTable {
        instance: *instance,
        q,
        marginals,
    })
}

/// `(1/r)·|∫₀¹ exp(2πiuθ) du| = |sin(πθ)/(πθ)|/r`, equal to `1/r` at `θ = 0`.
pub fn integral_amplitude(theta: f64, r: u64) -> f64 {
    sinc(theta).abs() / r as f64
}

/// Normalised sinc, `sin(πθ)/(πθ)` with the removable singularity filled.
pub fn sinc(theta: f64) -> f64 {
    if theta == 0.0 {
        1.0
    } else {
        let x = PI * theta;
        x.sin() / x
    }
}

/// Numerical check of the good-`c` probability bound for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub x: u64,
    pub r: u64,
    pub q: u64,
    /// `n² <= q < 2n²`; when false the report is advisory only.
    pub compliant_q: bool,
    pub good_count: usize,
    /// Smallest `P(c, k)` over good `c` and every `k < r`.
    pub p_min: f64,
    pub p_min_at: (u64, u64),
    /// `1/(3r²)`
    pub one_third_bound: f64,
    /// `4/(π² r²)`
    pub sinc_bound: f64,
    /// Smallest `ε >= 0` with `p_min >= 4/(π² r²)·(1 - ε)`.
    pub sinc_shortfall: f64,
    /// Largest `|√P(c, k) - |sinc(θ)|/r|` over good `c`, `θ = {rc}_q / r`.
    pub max_integral_gap: f64,
    pub exceeds_one_third_bound: bool,
    /// `sinc_shortfall <= SINC_BOUND_SLACK`
    pub meets_sinc_bound: bool,
}

pub fn verify_bounds(instance: &FactoringInstance, q: u64) -> Result<BoundReport> {
    check_power_of_two(q)?;
    let n = instance.n() as u128;
    let r = instance.r();
    let rf = r as f64;
    let compliant_q = n * n <= q as u128 && (q as u128) < 2 * n * n;

    let good = good_c_set(r, q);
    let split = TermSplit::new(q, r);
    // Representative k for each distinct term count.
    let ks: Vec<u64> = [0, split.long_count]
        .into_iter()
        .filter(|&k| k < r)
        .collect();

    let mut p_min = f64::INFINITY;
    let mut p_min_at = (0, 0);
    let mut max_gap: f64 = 0.0;
    for &c in &good {
        let theta = rc_residue(r, c, q) as f64 / rf;
        let approx = integral_amplitude(theta, r);
        for &k in &ks {
            let p = geometric_power(term_count(q, r, k), residue_class(r, c, q), q);
            if p < p_min {
                p_min = p;
                p_min_at = (c, k);
            }
            max_gap = max_gap.max((p.sqrt() - approx).abs());
        }
    }

    let one_third_bound = 1.0 / (3.0 * rf * rf);
    let sinc_bound = 4.0 / (PI * PI * rf * rf);
    let sinc_shortfall = (1.0 - p_min / sinc_bound).max(0.0);
    Ok(BoundReport {
        n: instance.n(),
        x: instance.x(),
        r,
        q,
        compliant_q,
        good_count: good.len(),
        p_min,
        p_min_at,
        one_third_bound,
        sinc_bound,
        sinc_shortfall,
        max_integral_gap: max_gap,
        exceeds_one_third_bound: p_min > one_third_bound,
        meets_sinc_bound: sinc_shortfall <= SINC_BOUND_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fifteen(x: u64) -> FactoringInstance {
        FactoringInstance::new(15, x).unwrap()
    }

    #[test]
    fn instance_validation() {
        let inst = fifteen(7);
        assert_eq!((inst.n(), inst.x(), inst.ell(), inst.r()), (15, 7, 4, 4));
        assert!(FactoringInstance::new(15, 1).is_err());
        assert!(FactoringInstance::new(15, 15).is_err());
        assert!(FactoringInstance::new(2, 1).is_err());
        assert_eq!(
            FactoringInstance::new(15, 6),
            Err(Error::NotAUnit { x: 6, n: 15, gcd: 3 })
        );
    }

    #[test]
    fn joint_examples() {
        let inst = fifteen(7);
        assert_eq!(joint_probability(&inst, 256, 64, 0).unwrap(), 0.0625);
        assert_eq!(joint_probability(&inst, 256, 0, 0).unwrap(), 0.0625);
        assert_eq!(joint_probability(&inst, 256, 1, 0).unwrap(), 0.0);
        assert!(joint_probability(&inst, 256, 1, 4).is_err());
        assert!(joint_probability(&inst, 256, 256, 0).is_err());
        assert!(joint_probability(&inst, 100, 1, 0).is_err());
    }

    #[test]
    fn term_counts_take_two_values() {
        assert_eq!(term_count(256, 4, 3), 64);
        assert_eq!(term_count(512, 6, 0), 86);
        assert_eq!(term_count(512, 6, 1), 86);
        assert_eq!(term_count(512, 6, 2), 85);
        assert_eq!(term_count(2, 4, 2), 0);
        let split = TermSplit::new(512, 6);
        assert_eq!(split, TermSplit { long_count: 2, short: 85 });
    }

    #[test]
    fn spectrum_fifteen() {
        let table = build_spectrum(&fifteen(7), 256).unwrap();
        assert_eq!(table.support(0.0), vec![0, 64, 128, 192]);
        for c in [0, 64, 128, 192] {
            assert_eq!(table.marginal(c), 0.25);
        }
        assert!((table.normalization() - 1.0).abs() < 1e-12);

        let table = build_spectrum(&fifteen(14), 256).unwrap();
        assert_eq!(table.support(0.0), vec![0, 128]);
        assert_eq!(table.marginal(128), 0.5);
    }

    #[test]
    fn single_qubit_spectrum() {
        let table = build_spectrum(&fifteen(7), 2).unwrap();
        assert_eq!(table.rows().count(), 2);
        // q < r: each residue class holds at most one exponent, so nothing
        // interferes and both outcomes are equally likely.
        assert_eq!(table.marginal(0), 0.5);
        assert_eq!(table.marginal(1), 0.5);
        assert!(table.is_good(1));
    }

    #[test]
    fn good_sets() {
        assert_eq!(good_c_set(4, 256), vec![0, 64, 128, 192]);
        assert_eq!(good_c_set(1, 256), vec![0]);
        assert_eq!(good_c_set(4, 2), vec![0, 1]);
        assert_eq!(good_c_set(6, 512).len(), 6);
    }

    #[test]
    fn sinc_values() {
        assert_eq!(integral_amplitude(0.0, 4), 0.25);
        let half = integral_amplitude(0.5, 4);
        assert!((half - 2.0 / (PI * 4.0)).abs() < 1e-15);
        assert_eq!(integral_amplitude(-0.5, 4), half);
    }

    #[test]
    fn bounds_fifteen() {
        let report = verify_bounds(&fifteen(7), 256).unwrap();
        assert!(report.compliant_q);
        assert_eq!(report.p_min, 1.0 / 16.0);
        assert!((report.one_third_bound - 1.0 / 48.0).abs() < 1e-15);
        assert!(report.exceeds_one_third_bound);
        assert!(report.meets_sinc_bound);
        assert_eq!(report.sinc_shortfall, 0.0);
        assert!(report.max_integral_gap < 1e-15);

        let advisory = verify_bounds(&fifteen(7), 16).unwrap();
        assert!(!advisory.compliant_q);
    }
}

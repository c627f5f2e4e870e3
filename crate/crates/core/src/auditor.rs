//! Grades a register configuration against the conditions the
//! continued-fraction step and the success-probability argument rely on.
//!
//! Evidence is recorded as exact integers so two audits of the same
//! configuration serialise to identical bytes.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::numtheory::{ceil_log2, order_oracle, recover_rational};
use crate::spectrum::{verify_bounds, FactoringInstance};
use crate::{Error, Result};

/// Largest `q` for which the distinguishability check enumerates every `c`.
pub const MAX_ENUMERATED_Q: u64 = 1 << 24;

const SINGLE_QUBIT_NOTE: &str = "register-1 holds a single qubit; any modular \
exponentiation wired for particular bases is not a general x^a mod n oracle, \
and gate-level circuits are outside what this audit models";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegisterConfig {
    pub n: u64,
    /// `s`, so that `q = 2^s`.
    pub register1_qubits: u32,
    pub register2_qubits: u32,
    pub base_x: Option<u64>,
}

impl RegisterConfig {
    pub fn new(n: u64, register1_qubits: u32, register2_qubits: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::OutOfRange {
                value: n,
                expected: "n >= 3".into(),
            });
        }
        if !(1..=63).contains(&register1_qubits) {
            return Err(Error::OutOfRange {
                value: register1_qubits as u64,
                expected: "1 <= register-1 qubits <= 63".into(),
            });
        }
        if register2_qubits == 0 {
            return Err(Error::OutOfRange {
                value: 0,
                expected: "register-2 qubits >= 1".into(),
            });
        }
        Ok(Self {
            n,
            register1_qubits,
            register2_qubits,
            base_x: None,
        })
    }

    pub fn with_base(mut self, x: u64) -> Self {
        self.base_x = Some(x);
        self
    }

    pub fn q(&self) -> u64 {
        1 << self.register1_qubits
    }

    pub fn ell(&self) -> u32 {
        ceil_log2(self.n)
    }

    fn n_squared(&self) -> u128 {
        self.n as u128 * self.n as u128
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ConditionId {
    #[serde(rename = "COND_Q_GE_N2")]
    QAtLeastNSquared,
    #[serde(rename = "COND_Q_LT_2N2")]
    QBelowTwiceNSquared,
    #[serde(rename = "COND_CFE_DISTINGUISH")]
    CfeDistinguishes,
    #[serde(rename = "COND_REG2_WIDTH")]
    Register2Width,
    #[serde(rename = "COND_TOTAL_QUBITS")]
    TotalQubits,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::QAtLeastNSquared => "COND_Q_GE_N2",
            ConditionId::QBelowTwiceNSquared => "COND_Q_LT_2N2",
            ConditionId::CfeDistinguishes => "COND_CFE_DISTINGUISH",
            ConditionId::Register2Width => "COND_REG2_WIDTH",
            ConditionId::TotalQubits => "COND_TOTAL_QUBITS",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hard checks decide the verdict; advisory ones are only recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Hard,
    Advisory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub condition_id: ConditionId,
    pub description: &'static str,
    pub severity: Severity,
    pub evidence: BTreeMap<&'static str, u128>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Compliant,
    NonCompliant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub config: RegisterConfig,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    /// Failed conditions in check order, advisory ones included.
    pub narrative: Vec<ConditionId>,
    pub notes: Vec<&'static str>,
}

impl AuditReport {
    pub fn check(&self, id: ConditionId) -> &Check {
        self.checks
            .iter()
            .find(|c| c.condition_id == id)
            .expect("every audit runs every check")
    }

    pub fn is_compliant(&self) -> bool {
        self.verdict == Verdict::Compliant
    }
}

/// How many reduced fractions `d/r` with `0 <= d < r < n` no observable
/// `c` recovers, out of how many there are. `None` when `q` is too large to
/// enumerate.
pub fn unrecoverable_fractions(n: u64, q: u64) -> Option<(u64, u64)> {
    let targets = totient_sum_below(n);
    if q as u128 >= n as u128 * n as u128 {
        // Every target is within 1/(2q) of round(d·q/r)/q and is the unique
        // such fraction, so recovery always succeeds.
        return Some((0, targets));
    }
    if q > MAX_ENUMERATED_Q {
        return None;
    }
    let recovered: HashSet<(u64, u64)> = (0..q)
        .filter_map(|c| recover_rational(c, q, n))
        .filter(|&(d, r)| r < n && d < r)
        .collect();
    Some((targets - recovered.len() as u64, targets))
}

/// `Σ_{r=1}^{n-1} φ(r)`, by a totient sieve.
pub fn totient_sum_below(n: u64) -> u64 {
    let n = n as usize;
    let mut phi: Vec<u64> = (0..n as u64).collect();
    for p in 2..n {
        if phi[p] == p as u64 {
            for m in (p..n).step_by(p) {
                phi[m] -= phi[m] / p as u64;
            }
        }
    }
    phi.iter().skip(1).sum()
}

fn evidence<const N: usize>(pairs: [(&'static str, u128); N]) -> BTreeMap<&'static str, u128> {
    pairs.into_iter().collect()
}

pub fn audit(config: &RegisterConfig) -> AuditReport {
    let q = config.q() as u128;
    let n2 = config.n_squared();
    let ell = config.ell() as u128;
    let s = config.register1_qubits as u128;
    let reg2 = config.register2_qubits as u128;

    let cfe = {
        let mut ev = evidence([("q", q), ("observable_c_values", q)]);
        let passed = match unrecoverable_fractions(config.n, config.q()) {
            Some((missing, total)) => {
                ev.insert("target_fractions", total as u128);
                ev.insert("unrecoverable_fractions", missing as u128);
                missing == 0
            }
            None => {
                ev.insert("enumeration_skipped", 1);
                false
            }
        };
        Check {
            condition_id: ConditionId::CfeDistinguishes,
            description: "every reduced d/r with r < n is recovered from some observable c/q",
            severity: Severity::Hard,
            evidence: ev,
            passed,
        }
    };

    let checks = vec![
        Check {
            condition_id: ConditionId::QAtLeastNSquared,
            description: "register-1 dimension q satisfies q >= n^2",
            severity: Severity::Hard,
            evidence: evidence([("q", q), ("n_squared", n2)]),
            passed: q >= n2,
        },
        Check {
            condition_id: ConditionId::QBelowTwiceNSquared,
            description: "register-1 dimension q satisfies q < 2n^2",
            severity: Severity::Advisory,
            evidence: evidence([("q", q), ("two_n_squared", 2 * n2)]),
            passed: q < 2 * n2,
        },
        cfe,
        Check {
            condition_id: ConditionId::Register2Width,
            description: "register-2 holds ceil(log2 n) qubits",
            severity: Severity::Hard,
            evidence: evidence([("register2_qubits", reg2), ("required", ell)]),
            passed: reg2 >= ell,
        },
        Check {
            condition_id: ConditionId::TotalQubits,
            description: "register-1 plus register-2 hold at least 3*ceil(log2 n) qubits",
            severity: Severity::Advisory,
            evidence: evidence([("total_qubits", s + reg2), ("required", 3 * ell)]),
            passed: s + reg2 >= 3 * ell,
        },
    ];

    let verdict = if checks
        .iter()
        .all(|c| c.passed || c.severity == Severity::Advisory)
    {
        Verdict::Compliant
    } else {
        Verdict::NonCompliant
    };
    let narrative = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.condition_id)
        .collect();
    let notes = if config.register1_qubits == 1 {
        vec![SINGLE_QUBIT_NOTE]
    } else {
        Vec::new()
    };

    AuditReport {
        config: *config,
        checks,
        verdict,
        narrative,
        notes,
    }
}

/// Whether the `p > 1/(3r²)` argument can be carried out for a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Applicability {
    pub n: u64,
    pub x: u64,
    pub r: u64,
    pub q: u64,
    pub applicable: bool,
    /// `r/q`; the integral approximation needs this to be small.
    pub order_over_q: f64,
    pub p_min: Option<f64>,
    pub one_third_bound: f64,
    pub explanation: String,
}

pub fn bound_argument_applicability(config: &RegisterConfig, x: u64) -> Result<Applicability> {
    let n = config.n;
    let r = order_oracle(x, n)?;
    let q = config.q();
    let one_third_bound = 1.0 / (3.0 * (r * r) as f64);
    let order_over_q = r as f64 / q as f64;

    if (q as u128) < config.n_squared() {
        return Ok(Applicability {
            n,
            x,
            r,
            q,
            applicable: false,
            order_over_q,
            p_min: None,
            one_third_bound,
            explanation: format!(
                "q = {q} < n^2 = {}: replacing the sum over b by an integral and \
                 dropping k < r both need r much smaller than q, but r/q = {r}/{q}",
                config.n_squared()
            ),
        });
    }

    let instance = FactoringInstance::new(n, x)?;
    let report = verify_bounds(&instance, q)?;
    Ok(Applicability {
        n,
        x,
        r,
        q,
        applicable: true,
        order_over_q,
        p_min: Some(report.p_min),
        one_third_bound,
        explanation: format!(
            "q = {q} >= n^2: smallest good-c probability {:.6e} vs 1/(3r^2) = {:.6e}",
            report.p_min, one_third_bound
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u64, s: u32, reg2: u32) -> RegisterConfig {
        RegisterConfig::new(n, s, reg2).unwrap()
    }

    #[test]
    fn compliant_fifteen() {
        let report = audit(&cfg(15, 8, 4));
        assert!(report.is_compliant());
        assert!(report.checks.iter().all(|c| c.passed));
        assert!(report.narrative.is_empty());
        assert!(report.notes.is_empty());
    }

    #[test]
    fn single_qubit_fifteen() {
        let report = audit(&cfg(15, 1, 4));
        assert_eq!(report.verdict, Verdict::NonCompliant);
        let a = report.check(ConditionId::QAtLeastNSquared);
        assert!(!a.passed);
        assert_eq!(a.evidence["q"], 2);
        assert_eq!(a.evidence["n_squared"], 225);
        let c = report.check(ConditionId::CfeDistinguishes);
        assert!(!c.passed);
        assert_eq!(c.evidence["observable_c_values"], 2);
        // 64 reduced fractions with r < 15; c = 0 and c = 1 recover 0/1 and 1/2.
        assert_eq!(c.evidence["target_fractions"], 64);
        assert_eq!(c.evidence["unrecoverable_fractions"], 62);
        assert_eq!(report.notes.len(), 1);
        assert_eq!(report.narrative[0], ConditionId::QAtLeastNSquared);
    }

    #[test]
    fn sixteen_dimensional_register() {
        let report = audit(&cfg(15, 4, 4));
        assert!(!report.is_compliant());
        let a = report.check(ConditionId::QAtLeastNSquared);
        assert!(!a.passed);
        assert_eq!(a.evidence["q"], 16);
    }

    #[test]
    fn narrow_register_two() {
        let report = audit(&cfg(15, 8, 2));
        assert!(!report.is_compliant());
        assert_eq!(
            report.narrative,
            vec![ConditionId::Register2Width, ConditionId::TotalQubits]
        );
    }

    #[test]
    fn oversized_register_is_advisory() {
        let report = audit(&cfg(15, 9, 4));
        assert!(report.is_compliant());
        assert!(!report.check(ConditionId::QBelowTwiceNSquared).passed);
        assert_eq!(report.narrative, vec![ConditionId::QBelowTwiceNSquared]);
    }

    #[test]
    fn config_validation() {
        assert!(RegisterConfig::new(2, 8, 4).is_err());
        assert!(RegisterConfig::new(15, 0, 4).is_err());
        assert!(RegisterConfig::new(15, 64, 4).is_err());
        assert!(RegisterConfig::new(15, 8, 0).is_err());
        assert_eq!(cfg(15, 8, 4).with_base(7).base_x, Some(7));
    }

    #[test]
    fn totient_sums() {
        use crate::numtheory::euler_phi;
        for n in 1..200 {
            let direct: u64 = (1..n).map(|r| euler_phi(r).unwrap()).sum();
            assert_eq!(totient_sum_below(n), direct, "n = {n}");
        }
    }

    #[test]
    fn unrecoverable_counts() {
        assert_eq!(unrecoverable_fractions(15, 2), Some((62, 64)));
        assert_eq!(unrecoverable_fractions(15, 256), Some((0, 64)));
        assert_eq!(unrecoverable_fractions(10_000, 1 << 25), None);
    }

    #[test]
    fn applicability() {
        let single = bound_argument_applicability(&cfg(15, 1, 4), 7).unwrap();
        assert!(!single.applicable);
        assert_eq!((single.r, single.q), (4, 2));
        assert_eq!(single.order_over_q, 2.0);

        let full = bound_argument_applicability(&cfg(15, 8, 4), 7).unwrap();
        assert!(full.applicable);
        assert_eq!(full.p_min, Some(1.0 / 16.0));
        assert!(full.p_min.unwrap() > full.one_third_bound);

        assert!(matches!(
            bound_argument_applicability(&cfg(15, 8, 4), 5),
            Err(Error::NotAUnit { .. })
        ));
        assert!(bound_argument_applicability(&cfg(15, 8, 4), 1).is_err());
    }
}

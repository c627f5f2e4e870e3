//! End-to-end simulation: choose `q`, measure, recover `r`, split `n`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::numtheory::{ceil_log2, euler_phi, gcd, mod_pow, prime_power, recover_rational};
use crate::spectrum::{build_spectrum, verify_bounds, FactoringInstance, SpectrumTable};
use crate::{Error, Result};

/// Seed used whenever the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x5eed_1994;

/// The register-1 width `s` and size `q = 2^s` with `n² <= q < 2n²`.
pub fn choose_q(n: u64) -> Result<(u32, u64)> {
    if n < 3 {
        return Err(Error::OutOfRange {
            value: n,
            expected: "n >= 3".into(),
        });
    }
    let square = (n as u128) * (n as u128);
    if square > 1 << 63 {
        return Err(Error::OutOfRange {
            value: n,
            expected: "n² <= 2^63".into(),
        });
    }
    let square = square as u64;
    let s = ceil_log2(square);
    Ok((s, 1 << s))
}

/// Rejects moduli that order finding cannot (or need not) split.
pub fn validate_modulus(n: u64) -> Result<()> {
    if n < 3 {
        return Err(Error::OutOfRange {
            value: n,
            expected: "n >= 3".into(),
        });
    }
    if n.is_multiple_of(2) {
        return Err(Error::EvenModulus { n });
    }
    if let Some((base, exponent)) = prime_power(n) {
        return Err(Error::PrimePower { n, base, exponent });
    }
    Ok(())
}

/// Checks `n` and `x` for a run; `gcd(x, n) > 1` comes back as
/// [`Error::SharedFactor`].
pub fn prepare_instance(n: u64, x: u64) -> Result<FactoringInstance> {
    validate_modulus(n)?;
    if !(2..n).contains(&x) {
        return Err(Error::OutOfRange {
            value: x,
            expected: format!("2 <= x <= {}", n - 1),
        });
    }
    let g = gcd(x, n);
    if g != 1 {
        return Err(Error::SharedFactor { x, n, factor: g });
    }
    FactoringInstance::new(n, x)
}

/// Counter-based seed for trial `index` of a batch started from `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finaliser over a Weyl sequence
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inverse-CDF sampler over a spectrum's marginals.
#[derive(Debug, Clone)]
pub struct MeasurementSampler<'a> {
    table: &'a SpectrumTable,
    cumulative: Vec<f64>,
    last_supported: u64,
}

impl<'a> MeasurementSampler<'a> {
    pub fn new(table: &'a SpectrumTable) -> Self {
        let mut running = 0.0;
        let cumulative = table
            .marginals()
            .iter()
            .map(|p| {
                running += p;
                running
            })
            .collect();
        let last_supported = table
            .marginals()
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(0) as u64;
        Self {
            table,
            cumulative,
            last_supported,
        }
    }

    pub fn table(&self) -> &SpectrumTable {
        self.table
    }

    /// Draws `(c, k)` with probability `P(c, k)`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (u64, u64) {
        let total = *self.cumulative.last().expect("q >= 2");
        let u = rng.gen::<f64>() * total;
        let c = (self.cumulative.partition_point(|&acc| acc <= u) as u64).min(self.last_supported);
        (c, self.sample_k(c, rng))
    }

    /// `k` given `c`: residues split into a "long" class (`m_k = A + 1`) and a
    /// "short" class (`m_k = A`), uniform within each class.
    fn sample_k<R: Rng>(&self, c: u64, rng: &mut R) -> u64 {
        let r = self.table.r();
        let split = self.table.split();
        let long_count = split.long_count;
        let short_count = r - long_count;
        let long_w = if long_count > 0 {
            long_count as f64 * self.table.joint(c, 0)
        } else {
            0.0
        };
        let short_w = if short_count > 0 {
            short_count as f64 * self.table.joint(c, long_count)
        } else {
            0.0
        };
        let pick_long = long_count > 0
            && (short_count == 0 || rng.gen::<f64>() * (long_w + short_w) < long_w);
        if pick_long {
            rng.gen_range(0..long_count)
        } else {
            long_count + rng.gen_range(0..short_count)
        }
    }
}

/// One seeded measurement of `(c, k)` from `table`.
pub fn sample_measurement(table: &SpectrumTable, seed: u64) -> (u64, u64) {
    MeasurementSampler::new(table).sample(&mut rng_from_seed(seed))
}

/// Continued-fraction recovery of `d/r` from `c/q`. `c = 0` yields nothing.
pub fn recover_order(c: u64, q: u64, n: u64) -> Option<(u64, u64)> {
    if c == 0 {
        return None;
    }
    recover_rational(c, q, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// No convergent of `c/q` lies within `1/(2q)`, or `c = 0`.
    BadCNoRecovery,
    /// `d` shared a factor with `r`, so the recovered denominator is a
    /// proper divisor of the order.
    DRNotCoprimeUnderstatesR,
    OrderCheckFailed,
    /// The order was recovered but is odd, so `x^(r/2)` does not exist.
    OddOrder,
    XPowHalfRIsMinusOne,
    TrivialGcd,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::BadCNoRecovery => "bad_c_no_recovery",
            FailureReason::DRNotCoprimeUnderstatesR => "d_r_not_coprime_understates_r",
            FailureReason::OrderCheckFailed => "order_check_failed",
            FailureReason::OddOrder => "odd_order",
            FailureReason::XPowHalfRIsMinusOne => "x_pow_half_r_is_minus_one",
            FailureReason::TrivialGcd => "trivial_gcd",
        }
    }

    pub const ALL: [FailureReason; 6] = [
        FailureReason::BadCNoRecovery,
        FailureReason::DRNotCoprimeUnderstatesR,
        FailureReason::OrderCheckFailed,
        FailureReason::OddOrder,
        FailureReason::XPowHalfRIsMinusOne,
        FailureReason::TrivialGcd,
    ];
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything that happened during one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub instance: FactoringInstance,
    pub q: u64,
    pub sampled_c: u64,
    pub sampled_k: u64,
    pub recovered: Option<(u64, u64)>,
    pub order_verified: bool,
    /// `(f, n / f)` with `f` the smaller nontrivial divisor.
    pub factors: Option<(u64, u64)>,
    pub failure_reason: Option<FailureReason>,
}

impl RunTrace {
    /// The recovered denominator equals the true order.
    pub fn recovered_true_order(&self) -> bool {
        self.order_verified && self.recovered.map(|(_, r)| r) == Some(self.instance.r())
    }
}

/// Steps after the measurement: recovery, verification, factor extraction.
fn finish_run(instance: &FactoringInstance, q: u64, c: u64, k: u64) -> RunTrace {
    let (n, x) = (instance.n(), instance.x());
    let mut trace = RunTrace {
        instance: *instance,
        q,
        sampled_c: c,
        sampled_k: k,
        recovered: None,
        order_verified: false,
        factors: None,
        failure_reason: None,
    };

    let Some((d, r_candidate)) = recover_order(c, q, n) else {
        trace.failure_reason = Some(FailureReason::BadCNoRecovery);
        return trace;
    };
    trace.recovered = Some((d, r_candidate));

    let pow = |e: u64| mod_pow(x, e, n).expect("n >= 3");
    if pow(r_candidate) != 1 {
        // The true order is diagnostic only; it never feeds the recovery.
        trace.failure_reason = Some(if instance.r().is_multiple_of(r_candidate) {
            FailureReason::DRNotCoprimeUnderstatesR
        } else {
            FailureReason::OrderCheckFailed
        });
        return trace;
    }
    trace.order_verified = true;

    if r_candidate % 2 == 1 {
        trace.failure_reason = Some(FailureReason::OddOrder);
        return trace;
    }
    let half = pow(r_candidate / 2);
    if half == n - 1 {
        trace.failure_reason = Some(FailureReason::XPowHalfRIsMinusOne);
        return trace;
    }
    let nontrivial = |g: u64| g > 1 && g < n;
    let lower = gcd((half + n - 1) % n, n);
    let upper = gcd(half + 1, n);
    match [lower, upper].into_iter().find(|&g| nontrivial(g)) {
        Some(f) => {
            let other = n / f;
            trace.factors = Some((f.min(other), f.max(other)));
        }
        None => trace.failure_reason = Some(FailureReason::TrivialGcd),
    }
    trace
}

/// Runs the full procedure once against a prebuilt spectrum.
pub fn run_with_sampler(sampler: &MeasurementSampler<'_>, seed: u64) -> RunTrace {
    let table = sampler.table();
    let (c, k) = sampler.sample(&mut rng_from_seed(seed));
    finish_run(table.instance(), table.q(), c, k)
}

/// Recovery and factor extraction for a given measurement outcome, skipping
/// the sampling step.
pub fn run_from_measurement(instance: &FactoringInstance, q: u64, c: u64, k: u64) -> Result<RunTrace> {
    crate::spectrum::check_power_of_two(q)?;
    if c >= q || k >= instance.r() {
        return Err(Error::InvalidArgument(format!(
            "measurement ({c}, {k}) outside [0, {q}) x [0, {})",
            instance.r()
        )));
    }
    Ok(finish_run(instance, q, c, k))
}

/// Simulates one complete execution for modulus `n` and base `x`.
pub fn run_once(n: u64, x: u64, seed: u64) -> Result<RunTrace> {
    let instance = prepare_instance(n, x)?;
    let (_, q) = choose_q(n)?;
    let table = build_spectrum(&instance, q)?;
    Ok(run_with_sampler(&MeasurementSampler::new(&table), seed))
}

/// `r·φ(r)·1/(3r²) = φ(r)/(3r)`.
pub fn success_bound(r: u64) -> Result<f64> {
    let phi = euler_phi(r)?;
    Ok(phi as f64 / (3.0 * r as f64))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FailureCounts {
    pub bad_c_no_recovery: u64,
    pub d_r_not_coprime_understates_r: u64,
    pub order_check_failed: u64,
    pub odd_order: u64,
    pub x_pow_half_r_is_minus_one: u64,
    pub trivial_gcd: u64,
}

impl FailureCounts {
    fn bump(&mut self, reason: FailureReason) {
        *self.slot(reason) += 1;
    }

    fn slot(&mut self, reason: FailureReason) -> &mut u64 {
        match reason {
            FailureReason::BadCNoRecovery => &mut self.bad_c_no_recovery,
            FailureReason::DRNotCoprimeUnderstatesR => &mut self.d_r_not_coprime_understates_r,
            FailureReason::OrderCheckFailed => &mut self.order_check_failed,
            FailureReason::OddOrder => &mut self.odd_order,
            FailureReason::XPowHalfRIsMinusOne => &mut self.x_pow_half_r_is_minus_one,
            FailureReason::TrivialGcd => &mut self.trivial_gcd,
        }
    }

    pub fn get(&self, reason: FailureReason) -> u64 {
        match reason {
            FailureReason::BadCNoRecovery => self.bad_c_no_recovery,
            FailureReason::DRNotCoprimeUnderstatesR => self.d_r_not_coprime_understates_r,
            FailureReason::OrderCheckFailed => self.order_check_failed,
            FailureReason::OddOrder => self.odd_order,
            FailureReason::XPowHalfRIsMinusOne => self.x_pow_half_r_is_minus_one,
            FailureReason::TrivialGcd => self.trivial_gcd,
        }
    }

    fn merge(mut self, other: &FailureCounts) -> Self {
        for reason in FailureReason::ALL {
            *self.slot(reason) += other.get(reason);
        }
        self
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    order_recovered: u64,
    factored: u64,
    factor_pairs: Vec<(u64, u64)>,
    failures: FailureCounts,
}

impl Tally {
    fn record(mut self, trace: &RunTrace) -> Self {
        if trace.recovered_true_order() {
            self.order_recovered += 1;
        }
        if let Some(f) = trace.factors {
            self.factored += 1;
            if !self.factor_pairs.contains(&f) {
                self.factor_pairs.push(f);
            }
        }
        if let Some(reason) = trace.failure_reason {
            self.failures.bump(reason);
        }
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        self.order_recovered += other.order_recovered;
        self.factored += other.factored;
        for f in other.factor_pairs {
            if !self.factor_pairs.contains(&f) {
                self.factor_pairs.push(f);
            }
        }
        self.failures = self.failures.merge(&other.failures);
        self
    }
}

/// Empirical per-run success compared with `φ(r)/(3r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessReport {
    pub n: u64,
    pub x: u64,
    pub r: u64,
    pub q: u64,
    pub trials: u64,
    pub seed: u64,
    pub order_recovered: u64,
    pub factored: u64,
    pub order_rate: f64,
    pub factor_rate: f64,
    pub phi_r: u64,
    pub success_bound: f64,
    /// `order_rate + 3σ >= success_bound`, σ the binomial standard error at the bound.
    pub meets_bound: bool,
    /// `φ(r)/r · ln ln r`; reported only, no constant is asserted.
    pub totient_loglog: f64,
    /// Distinct factor pairs seen, ascending.
    pub factor_pairs: Vec<(u64, u64)>,
    pub failures: FailureCounts,
}

/// Runs `trials` seeded executions against a single shared spectrum.
///
/// Trial `i` uses `derive_seed(seed, i)` and yields exactly the trace that
/// `run_once(n, x, derive_seed(seed, i))` would.
pub fn estimate_success(n: u64, x: u64, trials: u64, seed: u64) -> Result<SuccessReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let instance = prepare_instance(n, x)?;
    let (_, q) = choose_q(n)?;
    let table = build_spectrum(&instance, q)?;
    let sampler = MeasurementSampler::new(&table);

    let tally = (0..trials)
        .into_par_iter()
        .map(|i| run_with_sampler(&sampler, derive_seed(seed, i)))
        .fold(Tally::default, |t, trace| t.record(&trace))
        .reduce(Tally::default, Tally::merge);

    let r = instance.r();
    let phi_r = euler_phi(r)?;
    let bound = success_bound(r)?;
    let order_rate = tally.order_recovered as f64 / trials as f64;
    let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
    let mut factor_pairs = tally.factor_pairs;
    factor_pairs.sort_unstable();

    Ok(SuccessReport {
        n,
        x,
        r,
        q,
        trials,
        seed,
        order_recovered: tally.order_recovered,
        factored: tally.factored,
        order_rate,
        factor_rate: tally.factored as f64 / trials as f64,
        phi_r,
        success_bound: bound,
        meets_bound: order_rate + 3.0 * sigma >= bound,
        totient_loglog: phi_r as f64 / r as f64 * (r as f64).ln().ln(),
        factor_pairs,
        failures: tally.failures,
    })
}

/// Bases in `[2, n)` coprime to `n`.
pub fn coprime_bases(n: u64) -> Vec<u64> {
    (2..n).filter(|&x| gcd(x, n) == 1).collect()
}

/// One line of a sweep over instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub x: u64,
    pub r: u64,
    pub phi_r: u64,
    pub success_bound: f64,
    pub order_rate: f64,
    pub factor_rate: f64,
    pub p_min: f64,
    pub one_third_bound: f64,
}

pub fn sweep_row(n: u64, x: u64, trials: u64, seed: u64) -> Result<SweepRow> {
    let report = estimate_success(n, x, trials, seed)?;
    let instance = prepare_instance(n, x)?;
    let bounds = verify_bounds(&instance, report.q)?;
    Ok(SweepRow {
        n,
        x,
        r: report.r,
        phi_r: report.phi_r,
        success_bound: report.success_bound,
        order_rate: report.order_rate,
        factor_rate: report.factor_rate,
        p_min: bounds.p_min,
        one_third_bound: bounds.one_third_bound,
    })
}

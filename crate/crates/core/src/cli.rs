//! Command-line front end.
//!
//! Exit status is `0` for success (or a compliant audit), `1` for usage
//! errors and `2` for a non-compliant audit. Nothing reads the environment;
//! when `--seed` is omitted [`DEFAULT_SEED`] is used.

use std::ffi::OsString;
use std::io::{self, Write};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::auditor::{audit, bound_argument_applicability, Applicability, AuditReport, RegisterConfig};
use crate::pipeline::{
    choose_q, coprime_bases, derive_seed, estimate_success, prepare_instance, run_once,
    sweep_row, validate_modulus, RunTrace, SuccessReport, DEFAULT_SEED,
};
use crate::spectrum::{build_spectrum, verify_bounds, BoundReport, FactoringInstance, SpectrumTable};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NON_COMPLIANT: i32 = 2;

/// Traces are listed one by one up to this many trials.
pub const MAX_LISTED_TRIALS: u64 = 20;

#[derive(Debug, Parser)]
#[command(name = "shor-audit", version, about = "Exact Shor order-finding simulator and register auditor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Human,
    DelimitedTable,
    StructuredRecord,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full procedure and report traces or aggregate success rates.
    Simulate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
    },
    /// Check a register configuration.
    Audit {
        #[arg(long)]
        n: u64,
        /// Register-1 qubits (q = 2^s).
        #[arg(long)]
        s: u32,
        /// Register-2 qubits.
        #[arg(long)]
        reg2: u32,
        /// Base for the bound-applicability check.
        #[arg(long)]
        x: Option<u64>,
    },
    /// Dump the register-1 measurement distribution.
    Spectrum {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: u64,
        /// Register-1 dimension; defaults to the power of two in [n², 2n²).
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
    },
    /// Empirical success rates against the bounds for many instances.
    Sweep {
        #[arg(long = "n-list", value_delimiter = ',', num_args = 1.., required = true)]
        n_list: Vec<u64>,
        /// Bases to try; every coprime base when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        bases: Vec<u64>,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the good-c probability bound for one instance.
    VerifyBounds {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: u64,
    },
}

/// Rounds to 12 significant digits.
pub fn round12(p: f64) -> f64 {
    if p == 0.0 || !p.is_finite() {
        return p;
    }
    format!("{p:.11e}").parse().expect("formatted float parses")
}

/// The printed form of a probability: 12 significant digits, shortest text.
pub fn fmt_prob(p: f64) -> String {
    format!("{}", round12(p))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// A problem with the command line; maps to exit status 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

impl From<io::Error> for UsageError {
    fn from(e: io::Error) -> Self {
        UsageError(format!("write failed: {e}"))
    }
}

pub type CmdResult = std::result::Result<i32, UsageError>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let target: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Simulate {
            n,
            x,
            trials,
            seed,
            format,
        } => cmd_simulate(n, x, trials, seed.unwrap_or(DEFAULT_SEED), format, out),
        Command::Audit { n, s, reg2, x } => cmd_audit(n, s, reg2, x, out),
        Command::Spectrum { n, x, q, format } => cmd_spectrum(n, x, q, format, out),
        Command::Sweep {
            n_list,
            bases,
            trials,
            seed,
        } => cmd_sweep(&n_list, &bases, trials, seed.unwrap_or(DEFAULT_SEED), out),
        Command::VerifyBounds { n, x } => cmd_verify_bounds(n, x, out),
    }
}

/// A [`RunTrace`] with every nested field pulled up to the top level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatTrace {
    pub n: u64,
    pub x: u64,
    pub ell: u32,
    pub r: u64,
    pub q: u64,
    pub sampled_c: u64,
    pub sampled_k: u64,
    pub recovered_d: Option<u64>,
    pub recovered_r: Option<u64>,
    pub order_verified: bool,
    pub factor_1: Option<u64>,
    pub factor_2: Option<u64>,
    pub failure_reason: Option<&'static str>,
}

pub const TRACE_HEADER: &str = "trial,n,x,ell,r,q,sampled_c,sampled_k,recovered_d,recovered_r,\
order_verified,factor_1,factor_2,failure_reason";

impl From<&RunTrace> for FlatTrace {
    fn from(t: &RunTrace) -> Self {
        Self {
            n: t.instance.n(),
            x: t.instance.x(),
            ell: t.instance.ell(),
            r: t.instance.r(),
            q: t.q,
            sampled_c: t.sampled_c,
            sampled_k: t.sampled_k,
            recovered_d: t.recovered.map(|(d, _)| d),
            recovered_r: t.recovered.map(|(_, r)| r),
            order_verified: t.order_verified,
            factor_1: t.factors.map(|(a, _)| a),
            factor_2: t.factors.map(|(_, b)| b),
            failure_reason: t.failure_reason.map(|f| f.as_str()),
        }
    }
}

impl FlatTrace {
    fn csv_row(&self, trial: u64) -> String {
        format!(
            "{trial},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.x,
            self.ell,
            self.r,
            self.q,
            self.sampled_c,
            self.sampled_k,
            opt(self.recovered_d),
            opt(self.recovered_r),
            self.order_verified,
            opt(self.factor_1),
            opt(self.factor_2),
            opt(self.failure_reason),
        )
    }

    fn human_line(&self, trial: u64) -> String {
        let recovered = match (self.recovered_d, self.recovered_r) {
            (Some(d), Some(r)) => format!("{d}/{r}"),
            _ => "none".into(),
        };
        let factors = match (self.factor_1, self.factor_2) {
            (Some(a), Some(b)) => format!("{a} x {b}"),
            _ => "none".into(),
        };
        format!(
            "trial {trial:>2}  c = {:<8} k = {:<4} recovered = {:<8} verified = {:<5}  factors = {:<10} {}",
            self.sampled_c,
            self.sampled_k,
            recovered,
            self.order_verified,
            factors,
            self.failure_reason.unwrap_or("ok"),
        )
    }
}

fn success_record(report: &SuccessReport) -> serde_json::Value {
    let mut value = serde_json::to_value(report).expect("report serialises");
    let obj = value.as_object_mut().expect("struct is an object");
    obj.insert("record".into(), json!("success_report"));
    for key in ["order_rate", "factor_rate", "success_bound", "totient_loglog"] {
        let p = obj[key].as_f64().unwrap_or(f64::NAN);
        obj.insert(key.into(), json!(round12(p)));
    }
    value
}

pub const SUCCESS_HEADER: &str = "n,x,r,q,trials,seed,order_recovered,factored,order_rate,\
factor_rate,phi_r,success_bound,meets_bound,factor_pairs";

fn success_csv_row(r: &SuccessReport) -> String {
    let pairs: Vec<String> = r.factor_pairs.iter().map(|(a, b)| format!("{a}x{b}")).collect();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.n,
        r.x,
        r.r,
        r.q,
        r.trials,
        r.seed,
        r.order_recovered,
        r.factored,
        fmt_prob(r.order_rate),
        fmt_prob(r.factor_rate),
        r.phi_r,
        fmt_prob(r.success_bound),
        r.meets_bound,
        if pairs.is_empty() { "none".into() } else { pairs.join(";") },
    )
}

fn success_human(r: &SuccessReport, out: &mut dyn Write) -> io::Result<()> {
    let pairs: Vec<String> = r.factor_pairs.iter().map(|(a, b)| format!("{a} x {b}")).collect();
    writeln!(out, "n = {}, x = {}, r = {}, q = {}", r.n, r.x, r.r, r.q)?;
    writeln!(out, "trials               {}", r.trials)?;
    writeln!(out, "seed                 {}", r.seed)?;
    writeln!(
        out,
        "order recovered      {} ({})",
        r.order_recovered,
        fmt_prob(r.order_rate)
    )?;
    writeln!(out, "factored             {} ({})", r.factored, fmt_prob(r.factor_rate))?;
    writeln!(
        out,
        "bound phi(r)/(3r)    {} (phi(r) = {})",
        fmt_prob(r.success_bound),
        r.phi_r
    )?;
    writeln!(out, "meets bound (3 sd)   {}", r.meets_bound)?;
    writeln!(
        out,
        "factor pairs         {}",
        if pairs.is_empty() { "none".into() } else { pairs.join(", ") }
    )?;
    let f = &r.failures;
    writeln!(
        out,
        "failures             bad_c_no_recovery={} d_r_not_coprime_understates_r={} \
         order_check_failed={} odd_order={} x_pow_half_r_is_minus_one={} trivial_gcd={}",
        f.bad_c_no_recovery,
        f.d_r_not_coprime_understates_r,
        f.order_check_failed,
        f.odd_order,
        f.x_pow_half_r_is_minus_one,
        f.trivial_gcd
    )
}

pub fn cmd_simulate(
    n: u64,
    x: u64,
    trials: u64,
    seed: u64,
    format: OutputFormat,
    out: &mut dyn Write,
) -> CmdResult {
    if trials == 0 {
        return Err(UsageError("--trials must be positive".into()));
    }
    match prepare_instance(n, x) {
        Ok(_) => {}
        Err(Error::SharedFactor { x, n, factor }) => {
            // The classical pre-check already split n; this is a completed run.
            let other = n / factor;
            match format {
                OutputFormat::StructuredRecord => writeln!(
                    out,
                    "{}",
                    json!({"record": "shared_factor", "n": n, "x": x, "factor_1": factor.min(other), "factor_2": factor.max(other)})
                )?,
                OutputFormat::DelimitedTable => {
                    writeln!(out, "n,x,factor_1,factor_2")?;
                    writeln!(out, "{n},{x},{},{}", factor.min(other), factor.max(other))?;
                }
                OutputFormat::Human => writeln!(
                    out,
                    "gcd({x}, {n}) = {factor}: {n} = {} x {} without any quantum step",
                    factor.min(other),
                    factor.max(other)
                )?,
            }
            return Ok(EXIT_OK);
        }
        Err(e) => return Err(e.into()),
    }

    let report = estimate_success(n, x, trials, seed)?;
    if trials <= MAX_LISTED_TRIALS {
        let traces: Vec<FlatTrace> = (0..trials)
            .map(|i| run_once(n, x, derive_seed(seed, i)).map(|t| FlatTrace::from(&t)))
            .collect::<crate::Result<_>>()?;
        match format {
            OutputFormat::Human => {
                for (i, t) in traces.iter().enumerate() {
                    writeln!(out, "{}", t.human_line(i as u64))?;
                }
                writeln!(out)?;
                success_human(&report, out)?;
            }
            OutputFormat::DelimitedTable => {
                writeln!(out, "{TRACE_HEADER}")?;
                for (i, t) in traces.iter().enumerate() {
                    writeln!(out, "{}", t.csv_row(i as u64))?;
                }
            }
            OutputFormat::StructuredRecord => {
                for (i, t) in traces.iter().enumerate() {
                    let mut v = serde_json::to_value(t).expect("trace serialises");
                    let obj = v.as_object_mut().expect("object");
                    obj.insert("record".into(), json!("run_trace"));
                    obj.insert("trial".into(), json!(i));
                    writeln!(out, "{v}")?;
                }
                writeln!(out, "{}", success_record(&report))?;
            }
        }
    } else {
        match format {
            OutputFormat::Human => success_human(&report, out)?,
            OutputFormat::DelimitedTable => {
                writeln!(out, "{SUCCESS_HEADER}")?;
                writeln!(out, "{}", success_csv_row(&report))?;
            }
            OutputFormat::StructuredRecord => writeln!(out, "{}", success_record(&report))?,
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AuditDocument<'a> {
    record: &'static str,
    #[serde(flatten)]
    report: &'a AuditReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_argument: Option<Applicability>,
}

pub fn cmd_audit(n: u64, s: u32, reg2: u32, x: Option<u64>, out: &mut dyn Write) -> CmdResult {
    let mut config = RegisterConfig::new(n, s, reg2)?;
    if let Some(x) = x {
        config = config.with_base(x);
    }
    let bound_argument = x
        .map(|x| bound_argument_applicability(&config, x))
        .transpose()?;
    let report = audit(&config);
    let doc = AuditDocument {
        record: "audit_report",
        report: &report,
        bound_argument,
    };
    serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| UsageError(e.to_string()))?;
    writeln!(out)?;
    Ok(if report.is_compliant() {
        EXIT_OK
    } else {
        EXIT_NON_COMPLIANT
    })
}

pub const SPECTRUM_HEADER: &str = "c,marginal_probability,signed_residue,good_flag";

fn spectrum_trailer(table: &SpectrumTable) -> crate::Result<(f64, f64)> {
    let bounds = verify_bounds(table.instance(), table.q())?;
    Ok((table.normalization(), bounds.p_min))
}

pub fn cmd_spectrum(
    n: u64,
    x: u64,
    q: Option<u64>,
    format: OutputFormat,
    out: &mut dyn Write,
) -> CmdResult {
    let instance = FactoringInstance::new(n, x)?;
    let q = match q {
        Some(q) if q < 2 || !q.is_power_of_two() => {
            return Err(UsageError(format!("--q must be a power of two >= 2, got {q}")))
        }
        Some(q) => q,
        None => choose_q(n)?.1,
    };
    let table = build_spectrum(&instance, q)?;
    let (normalization, p_min) = spectrum_trailer(&table)?;

    match format {
        OutputFormat::DelimitedTable => {
            writeln!(out, "{SPECTRUM_HEADER}")?;
            for row in table.rows() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    row.c,
                    fmt_prob(row.marginal_probability),
                    row.signed_residue,
                    row.good_flag
                )?;
            }
            writeln!(out, "# normalization={}", fmt_prob(normalization))?;
            writeln!(out, "# p_min_good={}", fmt_prob(p_min))?;
        }
        OutputFormat::StructuredRecord => {
            for row in table.rows() {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "record": "spectrum_row",
                        "c": row.c,
                        "marginal_probability": round12(row.marginal_probability),
                        "signed_residue": row.signed_residue,
                        "good_flag": row.good_flag,
                    })
                )?;
            }
            writeln!(
                out,
                "{}",
                json!({
                    "record": "spectrum_summary",
                    "n": n, "x": x, "r": instance.r(), "q": q,
                    "normalization": round12(normalization),
                    "p_min_good": round12(p_min),
                })
            )?;
        }
        OutputFormat::Human => {
            writeln!(out, "n = {n}, x = {x}, r = {}, q = {q}", instance.r())?;
            writeln!(out, "{:>10}  {:<20} {:>10}  good", "c", "P(c)", "{rc}_q")?;
            let mut omitted = 0u64;
            for row in table.rows() {
                if round12(row.marginal_probability) == 0.0 {
                    omitted += 1;
                    continue;
                }
                writeln!(
                    out,
                    "{:>10}  {:<20} {:>10}  {}",
                    row.c,
                    fmt_prob(row.marginal_probability),
                    row.signed_residue,
                    if row.good_flag { "yes" } else { "no" }
                )?;
            }
            if omitted > 0 {
                writeln!(out, "({omitted} rows with zero probability omitted)")?;
            }
            writeln!(out, "normalization = {}", fmt_prob(normalization))?;
            writeln!(out, "p_min over good c = {}", fmt_prob(p_min))?;
        }
    }
    Ok(EXIT_OK)
}

pub const SWEEP_HEADER: &str =
    "n,x,r,phi_r,success_bound,order_rate,factor_rate,p_min,one_third_bound";

pub fn cmd_sweep(
    n_list: &[u64],
    bases: &[u64],
    trials: u64,
    seed: u64,
    out: &mut dyn Write,
) -> CmdResult {
    if n_list.is_empty() {
        return Err(UsageError("--n-list must name at least one modulus".into()));
    }
    if trials == 0 {
        return Err(UsageError("--trials must be positive".into()));
    }
    for &n in n_list {
        validate_modulus(n)?;
    }

    writeln!(out, "{SWEEP_HEADER}")?;
    for &n in n_list {
        let candidates = if bases.is_empty() {
            coprime_bases(n)
        } else {
            bases.to_vec()
        };
        for x in candidates {
            match prepare_instance(n, x) {
                Ok(_) => {}
                // Bases that are not units modulo this n have no order.
                Err(Error::SharedFactor { .. }) | Err(Error::OutOfRange { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
            let row = sweep_row(n, x, trials, seed)?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                row.n,
                row.x,
                row.r,
                row.phi_r,
                fmt_prob(row.success_bound),
                fmt_prob(row.order_rate),
                fmt_prob(row.factor_rate),
                fmt_prob(row.p_min),
                fmt_prob(row.one_third_bound),
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn bounds_human(b: &BoundReport, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "n = {}, x = {}, r = {}, q = {}", b.n, b.x, b.r, b.q)?;
    writeln!(out, "q in [n^2, 2n^2)        {}", b.compliant_q)?;
    writeln!(out, "good c values           {}", b.good_count)?;
    writeln!(
        out,
        "p_min                   {} at (c, k) = ({}, {})",
        fmt_prob(b.p_min),
        b.p_min_at.0,
        b.p_min_at.1
    )?;
    writeln!(out, "1/(3r^2)                {}", fmt_prob(b.one_third_bound))?;
    writeln!(out, "4/(pi^2 r^2)            {}", fmt_prob(b.sinc_bound))?;
    writeln!(out, "shortfall vs 4/(pi^2 r^2) {}", fmt_prob(b.sinc_shortfall))?;
    writeln!(out, "max |exact - integral|  {}", fmt_prob(b.max_integral_gap))?;
    writeln!(out, "p_min > 1/(3r^2)        {}", b.exceeds_one_third_bound)?;
    writeln!(out, "p_min >= 4/(pi^2 r^2)(1 - eps) {}", b.meets_sinc_bound)?;
    if !b.compliant_q {
        writeln!(out, "note: q outside [n^2, 2n^2); figures are advisory")?;
    }
    Ok(())
}

pub fn cmd_verify_bounds(n: u64, x: u64, out: &mut dyn Write) -> CmdResult {
    let instance = FactoringInstance::new(n, x)?;
    let (_, q) = choose_q(n)?;
    let report = verify_bounds(&instance, q)?;
    bounds_human(&report, out)?;
    Ok(EXIT_OK)
}

//! Audits register configurations for n = 15, including the single-qubit
//! first register, and checks whether the 1/(3r²) argument applies.

use shor_audit::auditor::{audit, bound_argument_applicability, RegisterConfig};

fn main() -> shor_audit::Result<()> {
    for (s, reg2) in [(1, 4), (4, 4), (7, 4), (8, 4), (8, 2), (9, 4)] {
        let config = RegisterConfig::new(15, s, reg2)?;
        let report = audit(&config);
        println!("s = {s}, register 2 = {reg2} qubits, q = {}: {:?}", config.q(), report.verdict);
        for check in &report.checks {
            println!(
                "    {:<22} {:<8} {:?} {:?}",
                check.condition_id.as_str(),
                if check.passed { "pass" } else { "FAIL" },
                check.severity,
                check.evidence
            );
        }
        for note in &report.notes {
            println!("    note: {note}");
        }
        let applicability = bound_argument_applicability(&config, 7)?;
        println!("    bound argument: {}", applicability.explanation);
    }
    Ok(())
}

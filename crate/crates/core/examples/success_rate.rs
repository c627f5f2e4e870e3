//! Estimates how often a run recovers the order and compares it with φ(r)/(3r).

use shor_audit::pipeline::{estimate_success, FailureReason, DEFAULT_SEED};

fn main() -> shor_audit::Result<()> {
    let trials = 20_000;
    for (n, x) in [(15, 7), (21, 2), (35, 3), (91, 2), (143, 5), (221, 3)] {
        let report = estimate_success(n, x, trials, DEFAULT_SEED)?;
        println!(
            "n = {n:3}, x = {x}, r = {:3}: order rate {:.4}, factor rate {:.4}, bound {:.4}, meets bound: {}",
            report.r, report.order_rate, report.factor_rate, report.success_bound, report.meets_bound
        );
        for reason in FailureReason::ALL {
            let count = report.failures.get(reason);
            if count > 0 {
                println!("      {reason:<32} {count}");
            }
        }
    }
    Ok(())
}

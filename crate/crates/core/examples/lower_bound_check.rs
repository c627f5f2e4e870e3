//! Checks p > 1/(3r²) on every good outcome for all bases of a few moduli.

use shor_audit::pipeline::{choose_q, coprime_bases};
use shor_audit::spectrum::{verify_bounds, FactoringInstance};

fn main() -> shor_audit::Result<()> {
    for n in [15, 21, 33, 35, 39, 51, 55, 57] {
        let (_, q) = choose_q(n)?;
        let mut worst: Option<(f64, u64, u64)> = None;
        for x in coprime_bases(n).into_iter().filter(|&x| x > 1) {
            let report = verify_bounds(&FactoringInstance::new(n, x)?, q)?;
            assert!(report.exceeds_one_third_bound && report.meets_sinc_bound);
            // ratio p_min / (1/(3r^2)); above 1 means the bound holds
            let ratio = report.p_min / report.one_third_bound;
            if worst.is_none_or(|(w, _, _)| ratio < w) {
                worst = Some((ratio, x, report.r));
            }
        }
        let (ratio, x, r) = worst.unwrap();
        println!("n = {n:2}, q = {q:5}: tightest base x = {x:2} (r = {r:2}), p_min·3r² = {ratio:.4}");
    }
    Ok(())
}

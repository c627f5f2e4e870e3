//! Factors 15 with each of the demonstration bases, first from a seeded
//! run and then from every peak of the measurement distribution.

use shor_audit::pipeline::{choose_q, derive_seed, run_from_measurement, run_once, DEFAULT_SEED};
use shor_audit::spectrum::{build_spectrum, FactoringInstance};

fn main() -> shor_audit::Result<()> {
    let n = 15;
    let (s, q) = choose_q(n)?;
    println!("n = {n}: {s} qubits in register 1, q = {q}");

    for x in [2, 7, 8, 13] {
        let trace = run_once(n, x, derive_seed(DEFAULT_SEED, x))?;
        println!(
            "\nx = {x:2}  r = {}  sampled c = {:3}  recovered = {:?}  factors = {:?}",
            trace.instance.r(),
            trace.sampled_c,
            trace.recovered,
            trace.factors
        );

        let instance = FactoringInstance::new(n, x)?;
        let table = build_spectrum(&instance, q)?;
        for c in table.support(1e-12) {
            let t = run_from_measurement(&instance, q, c, 0)?;
            let outcome = match (t.factors, t.failure_reason) {
                (Some((a, b)), _) => format!("{a} x {b}"),
                (None, Some(reason)) => reason.to_string(),
                (None, None) => unreachable!(),
            };
            println!("    c = {c:3}  P = {:.4}  {outcome}", table.marginal(c));
        }
    }
    Ok(())
}

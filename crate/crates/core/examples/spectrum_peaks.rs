//! Prints the measurement distribution for n = 15, x = 7 at a properly sized
//! register and at a single-qubit register, where the peaks vanish.

use shor_audit::pipeline::choose_q;
use shor_audit::spectrum::{build_spectrum, FactoringInstance};

fn show(instance: &FactoringInstance, q: u64) -> shor_audit::Result<()> {
    let table = build_spectrum(instance, q)?;
    println!("q = {q}, r = {}, normalization = {}", table.r(), table.normalization());
    for row in table.rows().filter(|row| row.marginal_probability > 1e-12) {
        println!(
            "  c = {:4}  P(c) = {:.6}  {{rc}}_q = {:3}  good = {}",
            row.c, row.marginal_probability, row.signed_residue, row.good_flag
        );
    }
    Ok(())
}

fn main() -> shor_audit::Result<()> {
    let instance = FactoringInstance::new(15, 7)?;
    let (_, q) = choose_q(15)?;
    show(&instance, q)?;
    println!();
    show(&instance, 2)?;

    // r = 6 does not divide q, so the peaks spread over neighbouring c
    println!();
    let instance = FactoringInstance::new(21, 2)?;
    let (_, q) = choose_q(21)?;
    let table = build_spectrum(&instance, q)?;
    let top: Vec<_> = table.rows().filter(|row| row.marginal_probability > 0.01).collect();
    println!("n = 21, x = 2, q = {q}: {} outcomes above 1%", top.len());
    for row in top {
        println!("  c = {:3}  P(c) = {:.4}  good = {}", row.c, row.marginal_probability, row.good_flag);
    }
    Ok(())
}

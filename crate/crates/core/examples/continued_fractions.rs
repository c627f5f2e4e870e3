//! Continued-fraction recovery of d/r from a measured c/q.

use shor_audit::numtheory::{continued_fraction, recover_rational, within_half_step};

fn main() -> shor_audit::Result<()> {
    let (q, n) = (256, 15);
    for c in [192, 64, 43, 85, 86, 0] {
        let cf = continued_fraction(c, q)?;
        println!("{c}/{q} = {:?}", cf.partial_quotients);
        for &(d, r) in &cf.convergents {
            let mark = if r < n && within_half_step(c, q, d, r) { "  <- within 1/(2q)" } else { "" };
            println!("    {d}/{r}{mark}");
        }
        match recover_rational(c, q, n) {
            Some((d, r)) => println!("  recovered d/r = {d}/{r}"),
            None => println!("  nothing recovered"),
        }
    }

    // once q >= n², each reduced d/r with r < n is recovered from its nearest c
    for (n, q) in [(21u64, 512u64), (181, 32768)] {
        let mut hits = 0;
        for r in 1..n {
            for d in 0..r {
                if shor_audit::numtheory::gcd(d, r) != 1 {
                    continue;
                }
                let c = (d * q + r / 2) / r;
                if recover_rational(c, q, n) == Some((d, r)) {
                    hits += 1;
                }
            }
        }
        println!("n = {n}, q = {q}: {hits} reduced fractions recovered from their nearest c");
    }
    Ok(())
}

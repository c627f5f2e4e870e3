//! Exact classical simulation of Shor's order-finding routine, plus an
//! auditor that checks quantum register sizes against the conditions the
//! continued-fraction step depends on.
//!
//! The crate is organised bottom-up:
//!
//! * [`numtheory`] holds the integer primitives (modular powers, totient,
//!   brute-force order, signed residues, continued fractions).
//! * [`spectrum`] evaluates the post-QFT joint distribution `P(c, k)` in
//!   closed form and checks the `4/(π² r²)` lower bound numerically.
//! * [`pipeline`] runs the full procedure: choose `q`, sample, recover the
//!   order, extract factors, and estimate the per-run success rate.
//! * [`auditor`] grades a register configuration and produces an
//!   [`auditor::AuditReport`].
//! * [`cli`] is the command-line front end used by the `shor-audit` binary.
//!
//! ```
//! use shor_audit::pipeline::{choose_q, run_once};
//!
//! assert_eq!(choose_q(15).unwrap(), (8, 256));
//! let trace = run_once(15, 7, 3).unwrap();
//! assert!(trace.factors.is_none() || trace.factors == Some((3, 5)));
//! ```

pub mod auditor;
pub mod cli;
mod error;
pub mod numtheory;
pub mod pipeline;
pub mod spectrum;

pub use error::{Error, Result};

//! Numerical toolkit for operator-norm constants of iterated `L_p(L_q)` mixed norms
//! over finite probability spaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`measure`]: finite probability spaces, partitions, filtrations, and
//!   conditional expectation, the combinatorial substrate everything else
//!   evaluates on.
//! * [`mixed_norm`]: iterated mixed-norm chains (`ℓ_p(ℓ_q(...))` with counting
//!   or probability weights), norm folding, and exponent-sequence reduction.
//! * [`constants`]: two-point projection and geometric-mean ratio constants
//!   `c(p,q)` and `κ(p,q)`, estimated by a seeded multi-start derivative-free
//!   optimizer and cross-checked by an exhaustive grid oracle.
//! * [`witness`]: conditional-expectation witness specifications, their
//!   numerator/denominator evaluation, the two-level base witness, tensor
//!   amplification, and certified lower bounds that grow like `c(p,q)^n`.
//! * [`martingale`]: dyadic martingale differences, sign-transform ratio
//!   enumeration, Stein-projection ratios, and a seeded search for transform
//!   lower bounds.
//! * [`hardy`]: discrete torus grids, analytic projection, outer functions
//!   from prescribed moduli, and the one-sided analytic variant of the base
//!   two-point ratio.
//!
//! All randomized routines are deterministic given a master seed; every RNG
//! stream is derived from `(master_seed, restart_index)`.

pub mod constants;
pub mod error;
pub mod hardy;
pub mod martingale;
pub mod measure;
pub mod mixed_norm;
mod numerics;
mod optim;
pub mod witness;

pub use error::{Error, Result};

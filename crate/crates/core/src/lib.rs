//! Product-formula engine for one-dimensional periodic evolution equations.
//!
//! The crate builds strongly continuous semigroups `exp(tL)` for operators
//! `Lf = a f'' + b f' + c f` on a periodic grid out of cheap one-step maps
//! (Chernoff functions), measures how fast the iterated maps converge,
//! synthesizes Schrodinger groups from a single self-adjoint scheme, and
//! recovers resolvents by Laplace-transform quadrature.

pub mod chernoff;
pub mod error;
pub mod expr;
pub mod grid;
pub mod operators;
pub mod quadrature;
pub mod quasifeynman;
pub mod rates;
pub mod resolvent;

pub use error::{Error, Result};

use std::sync::atomic::{AtomicUsize, Ordering};

static THREADS: AtomicUsize = AtomicUsize::new(1);

/// Set the number of worker threads used for bulk interpolant evaluation.
/// Results are bit-identical for any thread count; this is purely a speed knob.
pub fn set_threads(n: usize) {
    THREADS.store(n.max(1), Ordering::Relaxed);
}

pub fn threads() -> usize {
    THREADS.load(Ordering::Relaxed)
}

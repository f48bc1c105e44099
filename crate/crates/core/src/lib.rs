//! Minimal-support k-uniform and AME states, the combinatorial designs behind
//! them, and exact local-equivalence search with replayable certificates.
//!
//! The crate is `no_std` (it needs `alloc`). Every search is single threaded
//! and deterministic; file formats and the command line live in `ame-cli`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod butson;
pub mod cyclotomic;
pub mod designs;
pub mod equivalence;
mod error;
pub mod linalg;
pub mod operator;
pub mod phases;
pub mod reductions;
pub mod smith;
pub mod states;

pub use error::{Error, Result};
pub use operator::{LocalOperator, SiteKind, SiteMatrix};
pub use phases::{ComplexAmp, Phase, Turn};
pub use states::{MinimalSupportState, MultiIndex, SparseState};

/// Default tolerance for floating-point comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

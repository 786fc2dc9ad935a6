//! Learning Gaussian-evolved bosonic Fock states from low-order moments.
//!
//! The crate covers symplectic and passive-linear-optics utilities, exact moment matrices of
//! Fock states, the moment-based learners, exact oracles (permanents and a truncated Fock-space
//! simulator), symplectic invariants of moment tensors, and a measurement-budget model.

pub mod cli;
pub mod error;
pub mod invariants;
pub mod io;
pub mod learner;
pub mod linalg;
pub mod measurement;
pub mod moments;
pub mod oracle;
pub mod symplectic;

pub use error::{Error, Result};

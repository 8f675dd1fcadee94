//! Micromaser laser theory in manifest Lindblad form.

pub mod error;
pub mod fock;
pub mod generators;
pub mod kraus;
pub mod measure;
pub mod observables;
pub mod runner;
pub mod steady;
pub mod superop;

pub use error::{Error, Result};

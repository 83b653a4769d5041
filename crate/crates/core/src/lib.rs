//! Product-state satisfiability for random k-QSAT.

pub mod error;
pub mod field;
pub mod experiments;
pub mod graph;
pub mod groebner;
pub mod homotopy;
pub mod instance;
pub mod io;
pub mod patterns;
pub mod polysystem;
pub mod polytope;
pub mod rng;
pub mod transfer;

pub use error::{QsatError, Result};

//! Exact phase-damping dynamics of bosonic modes coupled through a cross-Kerr
//! interaction to a thermal reservoir of harmonic oscillators.

pub mod bipartite;
pub mod config;
pub mod dephasing;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod grid;
pub mod master_eq;
pub mod oracle;
pub mod output;
pub mod reservoir;
pub mod scenario;

pub use error::{Error, Result};

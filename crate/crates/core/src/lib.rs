//! Desk-scale workbench for the stochastic collision model of pure dephasing.
//!
//! The crate is organised bottom-up:
//!
//! * [`qstate`]: dense states, Kraus channels, partial traces, entropies and
//!   distances. Owns the qubit-ordering convention used everywhere else.
//! * [`scm`]: closed-form analytics of the collision model (collision
//!   probability, coherence factors, exact global states).
//! * [`circuit`]: gate IR, circuit builders, coupling maps, SWAP routing and
//!   the `|0>`-aware SWAP peephole.
//! * [`simulator`]: statevector and noisy density-matrix execution, seeded
//!   shot sampling in arbitrary product bases.
//! * [`tomography`]: diluted maximum-likelihood reconstruction and
//!   single-qubit linear inversion.
//! * [`darwinism`]: quantum/classical mutual information over environment
//!   fractions, Holevo bound, Pauli scans and the BLP witness.

pub mod circuit;
pub mod darwinism;
mod error;
pub mod qstate;
pub mod scm;
pub mod simulator;
pub mod tomography;

pub use error::{Error, Result};

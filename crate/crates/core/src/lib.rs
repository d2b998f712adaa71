//! Hamiltonian truncation of two-dimensional `φ⁴` theory: basis, operators,
//! evolution, observables, resource estimates and circuits.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod hamiltonian;
pub mod linalg;
pub mod observables;
pub mod resources;
pub mod wavepacket;

pub use error::{Error, Result};
pub use wavepacket::StateVector;

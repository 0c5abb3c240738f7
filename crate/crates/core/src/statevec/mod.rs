//! Dense state-vector simulator with party-owned registers.
//!
//! Conventions: qubit `j` is bit `j` of a basis index; a register's qubit 0
//! is its least significant bit; registers occupy qubits in allocation order.

mod machine;
mod state;

pub use machine::{Machine, RegHandle, RegisterMap};
pub use state::{deposit, extract, Gate, StateVector, DEFAULT_QUBIT_CAP, NORM_TOLERANCE};

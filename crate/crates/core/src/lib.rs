//! Simulation and cost accounting for oblivious quantum multiparty
//! communication protocols.
//!
//! A protocol is an input-independent instruction program. Executing it on
//! the state-vector simulator yields per-party outputs and a ledger of every
//! qubit sent; the ledger always equals the schedule derived from the
//! program text alone.

pub mod bits;
pub mod error;
pub mod functions;
pub mod instances;
pub mod netmodel;
pub mod party;
pub mod protocols;
pub mod reduction;
pub mod statevec;

pub use bits::BitString;
pub use error::{Error, Result};
pub use party::{Party, Topology, TopologyKind};

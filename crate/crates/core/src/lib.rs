//! Blind delegated period finding for odd semiprimes.
//!
//! Compiles a period-finding circuit over a small primitive gate set,
//! splits it at the first non-Clifford layer into a stabilizer part and a
//! remainder, and executes the two halves on simulated servers that share
//! EPR pairs, with classical post-processing recovering the factors and a
//! CHSH/tomography loop policing the servers.

pub mod builder;
pub mod circuit;
pub mod clifford;
pub mod codec;
pub mod counting;
pub mod decompose;
pub mod error;
pub mod partition;
pub mod protocol;
pub mod shor;
pub mod statevec;
pub mod unitary;

pub use circuit::{Circuit, Component, Gate};
pub use error::{Error, Result};
pub use statevec::{Distribution, StateVector};

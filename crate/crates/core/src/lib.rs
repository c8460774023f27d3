//! Fault-tolerant resource estimates for Trotterized phase estimation of
//! Hubbard and plane-wave electronic-structure Hamiltonians.

pub mod dense;
pub mod hamiltonians;
pub mod pauli;
pub mod orderings;
pub mod trotter_error;
pub mod gate_count;
pub mod optimizer;
pub mod surface_code;
pub mod pipeline;
pub mod verify;

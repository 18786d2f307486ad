//! Entanglement percolation on pair-entangled pure-state networks.
//!
//! [`state`] holds the Schmidt-coefficient algebra (conversion probabilities,
//! swapping, concurrence), [`network`] builds chains and 2D lattices,
//! [`percolation`] is the Monte Carlo bond percolation engine and
//! [`protocols`] composes them into end-to-end distribution strategies.

pub mod network;
pub mod percolation;
pub mod protocols;
pub mod report;
pub mod state;

pub use network::{build_lattice, honeycomb_to_triangular, Boundary, Edge, LatticeKind, LatticeSpec, Network, NodeId};
pub use state::{OutcomeDistribution, SchmidtVector};

//! Simulation and analysis of linear-optical schemes that certify genuine
//! multipartite entanglement of single-photon W states.

pub mod fock;
pub mod optics;
pub mod simplex;
pub mod experiment;
pub mod witness;

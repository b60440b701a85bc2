//! Second-order entanglement statistics of random fermionic Gaussian states.

pub mod appendix_sums;
pub mod closed_forms;
pub mod jacobi;
pub mod kernel;
pub mod observables;
pub mod quadrature;
pub mod sampling;
pub mod special;
pub mod stats;

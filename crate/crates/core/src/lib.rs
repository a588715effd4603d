//! Dissipative cavity-QED entanglement.
//!
//! Lindblad propagation on truncated Fock spaces, Wootters concurrence, two
//! closed-form cavity/atom scenarios with their master-equation oracles, and
//! the one-atom micromaser steady state.

pub mod config;
pub mod entanglement;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod lindblad;
pub mod micromaser;
pub mod optimize;
pub mod record;
pub mod run;
pub mod scenario_a;
pub mod scenario_b;
pub mod validation;

pub use error::{Error, Result};
pub use hilbert::{Composite, DensityMatrix, SubsystemSpec};
pub use linalg::ComplexMatrix;
pub use micromaser::PhotonDistribution;

//! Trapped-ion qubit simulation toolbox.
//!
//! Single-qubit carrier and sideband dynamics of a spin coupled to a
//! truncated harmonic oscillator, the driven-oscillator phase machinery
//! behind spin-dependent-force gates, and the two-qubit gate identities that
//! tie those gates to a universal set.

pub mod couplings;
pub mod driven_osc;
pub mod error;
pub mod ion_species;
pub mod qlinalg;
pub mod report;
pub mod spin_motion;
pub mod twoqubit;

pub use error::{Error, Result};
pub use qlinalg::{ComplexMatrix, SpinFockSpace, StateVector, C64};

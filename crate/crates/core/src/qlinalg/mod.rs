//! Dense complex linear algebra and composite spin ⊗ Fock bookkeeping.
//!
//! Units: ħ = 1 throughout, and frequencies are angular in units of the
//! trap frequency unless a function says otherwise.

mod expm;
mod matrix;
mod space;
mod special;
mod state;

pub use num_complex::Complex64 as C64;

pub use expm::{matexp_aih, HermitianEigen, HERMITIAN_TOL};
pub use matrix::{kron, kron_all, kron_with_limit, pauli, ComplexMatrix};
pub use space::{
    born_probabilities, check_leakage, leakage, Spin, SpinFockSpace, LEAKAGE_ERROR, LEAKAGE_WARN,
};
pub use special::{
    assoc_laguerre, coherent_state, ladder_operators, number_operator, position_quadrature,
};
pub use state::{fidelity, StateVector};

/// Largest matrix dimension the kernel will build.
pub const MAX_DIM: usize = 4096;

/// Tolerance for every evolution operator's unitarity, `max |U†U - I|`.
pub const UNITARY_TOL: f64 = 1e-10;

use nalgebra::{DMatrix, DVector};

use super::{ComplexMatrix, StateVector, C64};
use crate::error::{Error, Result};

/// Tolerance on `max |H - H^dagger|` accepted by the exponentiators.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Spectral decomposition `H = V diag(λ) V^dagger` of a Hermitian matrix.
///
/// Built once and reused to evaluate `exp(-iHt)` at many times, or any
/// other function of `H`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch {
                expected: h.rows(),
                actual: h.cols(),
            });
        }
        let asym = h.hermitian_deviation();
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian { max_asymmetry: asym });
        }
        // Symmetrize so rounding-level asymmetry never reaches the solver.
        let m = h.inner();
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        Ok(Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Normalized eigenvector belonging to `eigenvalues()[k]`.
    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_inner(self.vectors.column(k).into_owned())
    }

    /// `V diag(f(λ)) V^dagger`
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let d = DVector::from_iterator(self.dim(), self.values.iter().map(|&l| f(l)));
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= d[j];
        }
        ComplexMatrix::from_inner(scaled * self.vectors.adjoint())
    }

    /// `exp(-iHt)`
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.apply_function(|l| C64::from_polar(1.0, -l * t))
    }

    /// `exp(-iHt) |psi⟩` without forming the propagator.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        let mut coeffs = self.vectors.adjoint() * psi.inner();
        for (c, &l) in coeffs.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -l * t);
        }
        Ok(StateVector::from_inner(&self.vectors * coeffs))
    }
}

/// `exp(-iHt)` for Hermitian `H` (ħ = 1), exact for all `t` up to rounding.
pub fn matexp_aih(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(HermitianEigen::new(h)?.propagator(t))
}

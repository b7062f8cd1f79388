use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use super::{StateVector, C64, MAX_DIM};
use crate::error::{invalid, Error, Result};

/// Dense complex matrix.
///
/// Entries are addressed as `(row, col)`; constructors and serializers use
/// row-major order regardless of the column-major storage underneath.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &entries),
        })
    }

    /// Matrix from literal real rows (gate tables). All rows must have equal length.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, rows[0].len(), |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, |i, j| f(i, j)),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn from_inner(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            inner: &self.inner * factor,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// `self * other`, checking the inner dimensions.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                actual: other.rows(),
            });
        }
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.cols() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                actual: state.dim(),
            });
        }
        Ok(StateVector::from_inner(&self.inner * state.inner()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows(), self.cols()),
            (other.rows(), other.cols()),
            "shape mismatch in max_abs_diff"
        );
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |H - H^dagger|`; zero for an exactly Hermitian matrix.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.inner[(i, j)] - self.inner[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |M^dagger M - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.inner.adjoint() * &self.inner;
        let id = DMatrix::<C64>::identity(self.rows(), self.rows());
        prod.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// `|tr(A^dagger B)| / dim`; equals 1 for unitaries equal up to a global phase.
    pub fn phase_insensitive_overlap(&self, other: &Self) -> f64 {
        let tr = (self.inner.adjoint() * &other.inner).trace();
        tr.norm() / self.rows() as f64
    }

    /// Compares `self` against `other` up to one global phase.
    ///
    /// Returns `(phase, max_dev)` where `self ≈ e^{i phase} other` and
    /// `max_dev` is the residual entrywise deviation after removing the phase.
    pub fn global_phase_distance(&self, other: &Self) -> (f64, f64) {
        let tr = (other.inner.adjoint() * &self.inner).trace();
        let phase = if tr.norm() > 0.0 { tr.arg() } else { 0.0 };
        let aligned = other.scale(C64::from_polar(1.0, phase));
        (phase, self.max_abs_diff(&aligned))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                if i != j && self.inner[(i, j)].norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            inner: &self.inner * &other.inner - &other.inner * &self.inner,
        }
    }
}

/// Kronecker product with the default dimension ceiling.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_limit(a, b, MAX_DIM)
}

pub fn kron_with_limit(a: &ComplexMatrix, b: &ComplexMatrix, limit: usize) -> Result<ComplexMatrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows.max(cols) > limit {
        return Err(Error::CapacityExceeded {
            requested: rows.max(cols),
            limit,
        });
    }
    Ok(ComplexMatrix {
        inner: a.inner.kronecker(&b.inner),
    })
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| invalid("kron_all needs at least one factor"))?;
    rest.iter().try_fold(first.clone(), |acc, m| kron(&acc, m))
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.inner[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli and ladder matrices in the `(|↑⟩, |↓⟩)` basis.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    const O: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    fn m2(a: C64, b: C64, c: C64, d: C64) -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, vec![a, b, c, d]).expect("2x2")
    }

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn sigma_x() -> ComplexMatrix {
        m2(O, ONE, ONE, O)
    }

    pub fn sigma_y() -> ComplexMatrix {
        m2(O, -I, I, O)
    }

    /// `diag(1, -1)`: `|↑⟩` is the upper level.
    pub fn sigma_z() -> ComplexMatrix {
        m2(ONE, O, O, -ONE)
    }

    /// `|↑⟩⟨↓|`
    pub fn sigma_plus() -> ComplexMatrix {
        m2(O, ONE, O, O)
    }

    /// `|↓⟩⟨↑|`
    pub fn sigma_minus() -> ComplexMatrix {
        m2(O, O, ONE, O)
    }

    /// Projector onto `|↑⟩`.
    pub fn proj_up() -> ComplexMatrix {
        m2(ONE, O, O, O)
    }

    /// Projector onto `|↓⟩`.
    pub fn proj_down() -> ComplexMatrix {
        m2(O, O, O, ONE)
    }
}

use super::{kron_all, pauli, ComplexMatrix, StateVector, MAX_DIM};
use crate::error::{Error, Result};

/// Population above which a truncated evolution is rejected.
pub const LEAKAGE_ERROR: f64 = 1e-6;
/// Population above which a truncated evolution logs a warning.
pub const LEAKAGE_WARN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Position in the `(|↑⟩, |↓⟩)` basis.
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_index(i: usize) -> Spin {
        if i == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

/// Basis descriptor for `spin_count` two-level systems coupled to one or
/// more truncated oscillator modes.
///
/// Ordering: spins come first in lexicographic order with `|↑⟩` before `|↓⟩`,
/// followed by the Fock indices with the last mode innermost. For two spins
/// and no mode this is `(↑↑, ↑↓, ↓↑, ↓↓)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinFockSpace {
    spin_count: usize,
    fock_cutoffs: Vec<usize>,
}

impl SpinFockSpace {
    pub fn new(spin_count: usize, fock_cutoffs: Vec<usize>) -> Result<Self> {
        if let Some(&c) = fock_cutoffs.iter().find(|&&c| c == 0) {
            return Err(Error::InvalidArgument(format!("Fock cutoff must be positive, got {c}")));
        }
        let dim = fock_cutoffs
            .iter()
            .try_fold(1usize << spin_count.min(63), |acc, &c| acc.checked_mul(c))
            .unwrap_or(usize::MAX);
        if spin_count > 12 || dim > MAX_DIM {
            return Err(Error::CapacityExceeded {
                requested: dim,
                limit: MAX_DIM,
            });
        }
        Ok(Self {
            spin_count,
            fock_cutoffs,
        })
    }

    /// One spin, one mode.
    pub fn single(cutoff: usize) -> Result<Self> {
        Self::new(1, vec![cutoff])
    }

    pub fn spin_count(&self) -> usize {
        self.spin_count
    }

    pub fn fock_cutoffs(&self) -> &[usize] {
        &self.fock_cutoffs
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_cutoffs.iter().product()
    }

    pub fn dim(&self) -> usize {
        (1 << self.spin_count) * self.fock_dim()
    }

    pub fn index(&self, spins: &[Spin], fock: &[usize]) -> Result<usize> {
        if spins.len() != self.spin_count {
            return Err(Error::DimensionMismatch {
                expected: self.spin_count,
                actual: spins.len(),
            });
        }
        if fock.len() != self.fock_cutoffs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.fock_cutoffs.len(),
                actual: fock.len(),
            });
        }
        let mut idx = 0;
        for s in spins {
            idx = idx * 2 + s.index();
        }
        for (&n, &cut) in fock.iter().zip(&self.fock_cutoffs) {
            if n >= cut {
                return Err(Error::OutOfRange {
                    what: "Fock level",
                    index: n,
                    len: cut,
                });
            }
            idx = idx * cut + n;
        }
        Ok(idx)
    }

    /// Inverse of [`SpinFockSpace::index`].
    pub fn decompose(&self, mut index: usize) -> (Vec<Spin>, Vec<usize>) {
        let mut fock = vec![0; self.fock_cutoffs.len()];
        for (slot, &cut) in fock.iter_mut().zip(&self.fock_cutoffs).rev() {
            *slot = index % cut;
            index /= cut;
        }
        let mut spins = vec![Spin::Up; self.spin_count];
        for slot in spins.iter_mut().rev() {
            *slot = Spin::from_index(index % 2);
            index /= 2;
        }
        (spins, fock)
    }

    pub fn basis_state(&self, spins: &[Spin], fock: &[usize]) -> Result<StateVector> {
        Ok(StateVector::basis(self.dim(), self.index(spins, fock)?))
    }

    /// Embeds a 2x2 operator acting on spin `which` into the full space.
    pub fn spin_operator(&self, op: &ComplexMatrix, which: usize) -> Result<ComplexMatrix> {
        if which >= self.spin_count {
            return Err(Error::OutOfRange {
                what: "spin",
                index: which,
                len: self.spin_count,
            });
        }
        let mut factors = Vec::with_capacity(self.spin_count + self.fock_cutoffs.len());
        for k in 0..self.spin_count {
            factors.push(if k == which { op.clone() } else { pauli::identity() });
        }
        for &c in &self.fock_cutoffs {
            factors.push(ComplexMatrix::identity(c));
        }
        kron_all(&factors)
    }

    /// Embeds an operator on mode `which` (size `cutoff x cutoff`) into the full space.
    pub fn mode_operator(&self, op: &ComplexMatrix, which: usize) -> Result<ComplexMatrix> {
        let cut = *self.fock_cutoffs.get(which).ok_or(Error::OutOfRange {
            what: "mode",
            index: which,
            len: self.fock_cutoffs.len(),
        })?;
        if op.rows() != cut || op.cols() != cut {
            return Err(Error::DimensionMismatch {
                expected: cut,
                actual: op.rows(),
            });
        }
        let mut factors = vec![ComplexMatrix::identity(1 << self.spin_count)];
        for (k, &c) in self.fock_cutoffs.iter().enumerate() {
            factors.push(if k == which { op.clone() } else { ComplexMatrix::identity(c) });
        }
        kron_all(&factors)
    }

    fn check_dim(&self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        Ok(())
    }
}

/// Marginal `(P↑, P↓)` of spin `spin_index`, summed over every other factor.
pub fn born_probabilities(psi: &StateVector, space: &SpinFockSpace, spin_index: usize) -> Result<(f64, f64)> {
    space.check_dim(psi)?;
    if spin_index >= space.spin_count() {
        return Err(Error::OutOfRange {
            what: "spin",
            index: spin_index,
            len: space.spin_count(),
        });
    }
    // Block of consecutive indices sharing the value of this spin.
    let stride = space.fock_dim() << (space.spin_count() - 1 - spin_index);
    let (mut up, mut down) = (0.0, 0.0);
    for (i, a) in psi.amplitudes().iter().enumerate() {
        if (i / stride) % 2 == 0 {
            up += a.norm_sqr();
        } else {
            down += a.norm_sqr();
        }
    }
    Ok((up, down))
}

/// Population in the top two Fock levels of any mode.
pub fn leakage(psi: &StateVector, space: &SpinFockSpace) -> Result<f64> {
    space.check_dim(psi)?;
    let cuts = space.fock_cutoffs();
    if cuts.is_empty() {
        return Ok(0.0);
    }
    let fock_dim = space.fock_dim();
    let mut total = 0.0;
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let mut rem = i % fock_dim;
        let mut near_top = false;
        for &cut in cuts.iter().rev() {
            let n = rem % cut;
            rem /= cut;
            if n + 2 >= cut {
                near_top = true;
            }
        }
        if near_top {
            total += a.norm_sqr();
        }
    }
    Ok(total)
}

/// Applies the truncation policy: error above [`LEAKAGE_ERROR`], warning
/// above [`LEAKAGE_WARN`]. Returns the measured leakage.
pub fn check_leakage(psi: &StateVector, space: &SpinFockSpace) -> Result<f64> {
    let l = leakage(psi, space)?;
    if l > LEAKAGE_ERROR {
        return Err(Error::Leakage {
            population: l,
            threshold: LEAKAGE_ERROR,
        });
    }
    if l > LEAKAGE_WARN {
        log::warn!("Fock truncation leakage {l:e} above {LEAKAGE_WARN:e}; consider a larger cutoff");
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{coherent_state, C64};

    #[test]
    fn dimension_and_ordering() {
        let s = SpinFockSpace::new(2, vec![3]).unwrap();
        assert_eq!(s.dim(), 12);
        assert_eq!(s.index(&[Spin::Up, Spin::Up], &[0]).unwrap(), 0);
        assert_eq!(s.index(&[Spin::Up, Spin::Down], &[0]).unwrap(), 3);
        assert_eq!(s.index(&[Spin::Down, Spin::Down], &[2]).unwrap(), 11);
        for i in 0..s.dim() {
            let (sp, f) = s.decompose(i);
            assert_eq!(s.index(&sp, &f).unwrap(), i);
        }
    }

    #[test]
    fn two_modes_last_innermost() {
        let s = SpinFockSpace::new(1, vec![2, 3]).unwrap();
        assert_eq!(s.dim(), 12);
        assert_eq!(s.index(&[Spin::Up], &[0, 1]).unwrap(), 1);
        assert_eq!(s.index(&[Spin::Up], &[1, 0]).unwrap(), 3);
        assert_eq!(s.index(&[Spin::Down], &[0, 0]).unwrap(), 6);
    }

    #[test]
    fn capacity_and_zero_cutoff() {
        assert!(matches!(
            SpinFockSpace::new(2, vec![2000]),
            Err(Error::CapacityExceeded { .. })
        ));
        assert!(SpinFockSpace::new(1, vec![0]).is_err());
    }

    #[test]
    fn born_basis_state() {
        let s = SpinFockSpace::single(5).unwrap();
        let psi = s.basis_state(&[Spin::Up], &[0]).unwrap();
        assert_eq!(born_probabilities(&psi, &s, 0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn born_equal_superposition() {
        let s = SpinFockSpace::single(5).unwrap();
        let up = s.index(&[Spin::Up], &[3]).unwrap();
        let down = s.index(&[Spin::Down], &[3]).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); s.dim()];
        amps[up] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[down] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let (pu, pd) = born_probabilities(&StateVector::new(amps), &s, 0).unwrap();
        assert!((pu - 0.5).abs() < 1e-15 && (pd - 0.5).abs() < 1e-15);
    }

    #[test]
    fn born_second_spin_marginal() {
        let s = SpinFockSpace::new(2, vec![2]).unwrap();
        let psi = s.basis_state(&[Spin::Up, Spin::Down], &[1]).unwrap();
        assert_eq!(born_probabilities(&psi, &s, 0).unwrap(), (1.0, 0.0));
        assert_eq!(born_probabilities(&psi, &s, 1).unwrap(), (0.0, 1.0));
        assert!(born_probabilities(&psi, &s, 2).is_err());
    }

    #[test]
    fn leakage_vacuum_is_zero() {
        let s = SpinFockSpace::single(50).unwrap();
        let psi = s.basis_state(&[Spin::Down], &[0]).unwrap();
        assert_eq!(leakage(&psi, &s).unwrap(), 0.0);
    }

    /// Poisson weight `e^{-m} m^n / n!`, summed over `n = lo..hi` in log space.
    fn poisson_tail(mean: f64, lo: usize, hi: usize) -> f64 {
        (lo..hi)
            .map(|n| {
                let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
                (-mean + n as f64 * mean.ln() - ln_fact).exp()
            })
            .sum()
    }

    #[test]
    fn leakage_coherent_states_match_poisson_tail() {
        let s = SpinFockSpace::new(0, vec![50]).unwrap();
        let psi = coherent_state(C64::new(1.0, 0.0), 50);
        let l = leakage(&psi, &s).unwrap();
        let oracle = poisson_tail(1.0, 48, 50);
        assert!(l < 1e-30);
        assert!((l - oracle).abs() <= 1e-12 * oracle);

        let s = SpinFockSpace::new(0, vec![40]).unwrap();
        let psi = coherent_state(C64::new(6.0, 0.0), 40);
        let l = leakage(&psi, &s).unwrap();
        let oracle = poisson_tail(36.0, 38, 40);
        assert!(l > 1e-3);
        assert!((l - oracle).abs() <= 1e-10 * oracle);
        assert!(matches!(check_leakage(&psi, &s), Err(Error::Leakage { .. })));
    }
}

use super::{ComplexMatrix, StateVector, C64};
use crate::error::{invalid, Result};

/// Generalized Laguerre polynomial `L_n^k(x)` by the upward three-term recurrence
/// `(m+1) L_{m+1} = (2m+1+k-x) L_m - (m+k) L_{m-1}`.
pub fn assoc_laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0 + k - x) * cur - (m + k) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Truncated annihilation and creation operators `(a, a†)` with
/// `a|n⟩ = √n |n-1⟩` on levels `0..cutoff`.
pub fn ladder_operators(cutoff: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if cutoff < 2 {
        return Err(invalid(format!("ladder operators need cutoff >= 2, got {cutoff}")));
    }
    let a = ComplexMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let ad = a.adjoint();
    Ok((a, ad))
}

/// `a†a`
pub fn number_operator(cutoff: usize) -> ComplexMatrix {
    let diag: Vec<C64> = (0..cutoff).map(|n| C64::new(n as f64, 0.0)).collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// Dimensionless position quadrature `a + a†`.
pub fn position_quadrature(cutoff: usize) -> Result<ComplexMatrix> {
    let (a, ad) = ladder_operators(cutoff)?;
    Ok(&a + &ad)
}

/// Coherent-state amplitudes `e^{-|α|²/2} α^n / √n!` for `n < cutoff`.
///
/// The vector is the exact truncation and is not renormalized, so its norm
/// falls short of one by the population above the cutoff.
pub fn coherent_state(alpha: C64, cutoff: usize) -> StateVector {
    let mut amps = Vec::with_capacity(cutoff);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    StateVector::new(amps)
}

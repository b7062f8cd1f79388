//! Single-ion spin-motion physics: qubit rotations, carrier and sideband
//! couplings, and time evolution in the interaction picture and the lab frame.
//!
//! Conventions: ħ = 1, the trap frequency sets the unit of angular frequency
//! and times are in units of 1/ω_m. The spin basis is `|↑⟩, |↓⟩` with `|↑⟩`
//! the upper level, and the equatorial axis at phase φ is
//! `σ₊e^{iφ} + σ₋e^{-iφ}`, which is the operator the carrier Hamiltonian
//! multiplies. The equilibrium phase `k·x_eq` is taken to be part of φ.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::qlinalg::{
    assoc_laguerre, born_probabilities, check_leakage, ComplexMatrix, HermitianEigen, SpinFockSpace,
    Spin, StateVector, C64,
};

const I: C64 = C64::new(0.0, 1.0);

/// How sideband Hamiltonians weight each Fock level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CouplingModel {
    /// Level-dependent `Ω₀ D_{n+s,n}` from the full Debye-Waller factor.
    #[default]
    Exact,
    /// Leading order in η: `Ω₀` on the carrier, `Ω₀ η a` / `Ω₀ η a†` on the
    /// first sidebands, `Ω₀ η^|s| a^|s| / |s|!` beyond.
    Idealized,
}

/// Parameters of a single laser or microwave pulse.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSpec {
    /// Ω₀
    pub rabi: f64,
    /// δ = ω − ω₀
    pub detuning: f64,
    /// φ, radians.
    pub phase: f64,
    /// η
    pub lamb_dicke: f64,
    pub duration: f64,
    /// ω_m, 1 by convention.
    pub trap_frequency: f64,
    /// ω₀, needed only in the lab frame.
    pub qubit_frequency: Option<f64>,
    pub coupling: CouplingModel,
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec {
            rabi: 0.0,
            detuning: 0.0,
            phase: 0.0,
            lamb_dicke: 0.0,
            duration: 0.0,
            trap_frequency: 1.0,
            qubit_frequency: None,
            coupling: CouplingModel::Exact,
        }
    }
}

impl PulseSpec {
    pub fn new(rabi: f64, lamb_dicke: f64) -> Self {
        PulseSpec {
            rabi,
            lamb_dicke,
            ..Default::default()
        }
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn with_qubit_frequency(mut self, omega0: f64) -> Self {
        self.qubit_frequency = Some(omega0);
        self
    }

    pub fn with_coupling(mut self, coupling: CouplingModel) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("rabi", self.rabi),
            ("detuning", self.detuning),
            ("phase", self.phase),
            ("lamb_dicke", self.lamb_dicke),
            ("duration", self.duration),
            ("trap_frequency", self.trap_frequency),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if self.rabi < 0.0 || self.lamb_dicke < 0.0 || self.duration < 0.0 {
            return Err(invalid("rabi, lamb_dicke and duration must be non-negative"));
        }
        if self.trap_frequency <= 0.0 {
            return Err(invalid("trap_frequency must be positive"));
        }
        if let Some(w0) = self.qubit_frequency {
            if !w0.is_finite() {
                return Err(invalid("qubit_frequency must be finite"));
            }
        }
        Ok(())
    }

    /// Advisory Lamb-Dicke regime test, `η²(⟨n⟩ + ½) < 0.1`.
    pub fn in_lamb_dicke_regime(&self, mean_n: f64) -> bool {
        self.lamb_dicke * self.lamb_dicke * (mean_n + 0.5) < 0.1
    }
}

/// Motional change `s` of a transition: 0 carrier, −1 red, +1 blue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sideband(pub i32);

impl Sideband {
    pub const CARRIER: Sideband = Sideband(0);
    pub const RED: Sideband = Sideband(-1);
    pub const BLUE: Sideband = Sideband(1);

    pub fn order(self) -> i32 {
        self.0
    }
}

/// `exp(-i θ n·σ / 2)` with `n = (cosβ cosφ, cosβ sinφ, sinβ)`.
pub fn rotation(beta: f64, phi: f64, theta: f64) -> ComplexMatrix {
    let (nx, ny, nz) = (beta.cos() * phi.cos(), beta.cos() * phi.sin(), beta.sin());
    let (s, c) = (theta / 2.0).sin_cos();
    let entries = vec![
        C64::new(c, -nz * s),
        C64::new(ny * s, -nx * s),
        C64::new(-ny * s, -nx * s),
        C64::new(c, nz * s),
    ];
    ComplexMatrix::from_row_major(2, 2, entries).expect("2x2")
}

/// Rotation by θ about the equatorial axis at phase φ.
pub fn rotation_equatorial(phi: f64, theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, phi);
    let entries = vec![C64::new(c, 0.0), -I * e * s, -I * e.conj() * s, C64::new(c, 0.0)];
    ComplexMatrix::from_row_major(2, 2, entries).expect("2x2")
}

fn target_level(n: usize, s: i32) -> Result<usize> {
    let m = n as i64 + s as i64;
    if m < 0 {
        return Err(invalid(format!("transition n={n} → n{s:+} leaves the oscillator ladder")));
    }
    Ok(m as usize)
}

/// Real signed Debye-Waller factor. `⟨n+s| e^{iη(a+a†)} |n⟩ = i^|s| D`.
pub fn debye_waller_signed(n: usize, s: i32, eta: f64) -> Result<f64> {
    let m = target_level(n, s)?;
    let (lo, hi) = (n.min(m), n.max(m));
    let k = hi - lo;
    let ratio: f64 = (lo + 1..=hi).map(|j| 1.0 / (j as f64).sqrt()).product();
    let x = eta * eta;
    Ok((-x / 2.0).exp() * eta.powi(k as i32) * ratio * assoc_laguerre(lo, k, x))
}

/// Debye-Waller factor `D_{n+s,n} = |⟨n+s| e^{iη(a+a†)} |n⟩|`.
pub fn debye_waller(n: usize, s: i32, eta: f64) -> Result<f64> {
    Ok(debye_waller_signed(n, s, eta)?.abs())
}

/// `⟨m| e^{iη(a+a†)} |n⟩` for the untruncated oscillator.
pub fn displacement_element(m: usize, n: usize, eta: f64) -> C64 {
    let s = m as i64 - n as i64;
    let d = debye_waller_signed(n, s as i32, eta).expect("both levels exist");
    I.powu(s.unsigned_abs() as u32) * d
}

/// `Ω_{n+s,n} = Ω₀ D_{n+s,n}`.
pub fn rabi_frequency(spec: &PulseSpec, n: usize, s: i32) -> Result<f64> {
    Ok(spec.rabi * debye_waller(n, s, spec.lamb_dicke)?)
}

/// Rabi frequency of `|↓,n⟩ ↔ |↑,n+s⟩` under the pulse's coupling model.
pub fn model_rabi_frequency(spec: &PulseSpec, n: usize, s: i32) -> Result<f64> {
    let weight = match spec.coupling {
        CouplingModel::Exact => debye_waller_signed(n, s, spec.lamb_dicke)?,
        CouplingModel::Idealized => idealized_coupling(n, s, spec.lamb_dicke)?,
    };
    Ok(spec.rabi * weight.abs())
}

/// First-order Lamb-Dicke Rabi frequencies for the carrier and first sidebands.
pub fn lamb_dicke_rabi(spec: &PulseSpec, n: usize, s: i32) -> Result<f64> {
    let eta = spec.lamb_dicke;
    let nf = n as f64;
    match s {
        0 => Ok(spec.rabi * (1.0 - (nf + 0.5) * eta * eta)),
        -1 => Ok(spec.rabi * nf.sqrt() * eta),
        1 => Ok(spec.rabi * (nf + 1.0).sqrt() * eta),
        _ => Err(invalid(format!("Lamb-Dicke expressions exist for |s| ≤ 1, got s = {s}"))),
    }
}

fn idealized_coupling(n: usize, s: i32, eta: f64) -> Result<f64> {
    let m = target_level(n, s)?;
    let (lo, hi) = (n.min(m), n.max(m));
    let k = hi - lo;
    let ladder: f64 = (lo + 1..=hi).map(|j| (j as f64).sqrt()).product();
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    Ok(eta.powi(k as i32) * ladder / fact)
}

fn single_mode_cutoff(space: &SpinFockSpace) -> Result<usize> {
    if space.spin_count() != 1 || space.fock_cutoffs().len() != 1 {
        return Err(invalid("expected one spin and one motional mode"));
    }
    Ok(space.fock_cutoffs()[0])
}

/// Resonant carrier (s = 0) or sideband Hamiltonian in the interaction picture:
/// `(Ω_{n+s,n}/2) e^{iφ} |↑, n+s⟩⟨↓, n| + h.c.` summed over the Fock levels
/// kept by the truncation.
pub fn sideband_hamiltonian(spec: &PulseSpec, s: Sideband, space: &SpinFockSpace) -> Result<ComplexMatrix> {
    spec.validate()?;
    let cutoff = single_mode_cutoff(space)?;
    let k = s.order().unsigned_abs() as usize;
    if k >= cutoff {
        return Err(invalid(format!("sideband order {} needs a Fock cutoff above {k}", s.order())));
    }
    let mut h = ComplexMatrix::zeros(2 * cutoff, 2 * cutoff);
    let phase = C64::from_polar(0.5 * spec.rabi, spec.phase);
    for n in 0..cutoff {
        let m = n as i64 + s.order() as i64;
        if m < 0 || m >= cutoff as i64 {
            continue;
        }
        let m = m as usize;
        let weight = match spec.coupling {
            CouplingModel::Exact => debye_waller_signed(n, s.order(), spec.lamb_dicke)?,
            CouplingModel::Idealized => idealized_coupling(n, s.order(), spec.lamb_dicke)?,
        };
        h[(m, cutoff + n)] = phase * weight;
        h[(cutoff + n, m)] = phase.conj() * weight;
    }
    Ok(h)
}

fn up_population(psi: &StateVector, space: &SpinFockSpace) -> Result<f64> {
    Ok(born_probabilities(psi, space, 0)?.0)
}

fn sample_times(duration: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(invalid("at least two samples are required"));
    }
    Ok((0..samples).map(|k| duration * k as f64 / (samples - 1) as f64).collect())
}

/// `P↑(t)` on a uniform grid of `samples` points over `[0, duration]`.
pub fn nutation_curve(
    spec: &PulseSpec,
    s: Sideband,
    space: &SpinFockSpace,
    initial: &StateVector,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    let times = sample_times(spec.duration, samples)?;
    let eig = HermitianEigen::new(&sideband_hamiltonian(spec, s, space)?)?;
    check_leakage(initial, space)?;
    times
        .par_iter()
        .map(|&t| {
            let psi = eig.evolve(initial, t)?;
            Ok((t, up_population(&psi, space)?))
        })
        .collect()
}

/// Thermal occupation probabilities `n̄ⁿ/(n̄+1)ⁿ⁺¹` for `n < cutoff`.
pub fn thermal_populations(mean_n: f64, cutoff: usize) -> Vec<f64> {
    let r = mean_n / (mean_n + 1.0);
    (0..cutoff).map(|n| r.powi(n as i32) / (mean_n + 1.0)).collect()
}

/// Nutation of a classical mixture `Σ p_n |spin, n⟩⟨spin, n|`. The weights
/// are normalized before use.
pub fn thermal_nutation_curve(
    spec: &PulseSpec,
    s: Sideband,
    space: &SpinFockSpace,
    spin: Spin,
    weights: &[f64],
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    let cutoff = single_mode_cutoff(space)?;
    if weights.len() > cutoff {
        return Err(invalid(format!("{} weights for a cutoff of {cutoff}", weights.len())));
    }
    if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(invalid("mixture weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(invalid("mixture weights sum to zero"));
    }
    let times = sample_times(spec.duration, samples)?;
    let eig = HermitianEigen::new(&sideband_hamiltonian(spec, s, space)?)?;
    let mut curve = vec![0.0; times.len()];
    for (n, &w) in weights.iter().enumerate().filter(|(_, &w)| w > 0.0) {
        let psi0 = space.basis_state(&[spin], &[n])?;
        check_leakage(&psi0, space)?;
        let column: Vec<f64> = times
            .par_iter()
            .map(|&t| up_population(&eig.evolve(&psi0, t)?, space))
            .collect::<Result<_>>()?;
        for (acc, p) in curve.iter_mut().zip(column) {
            *acc += w / total * p;
        }
    }
    Ok(times.into_iter().zip(curve).collect())
}

/// Time-independent generator of the full interaction-picture dynamics at
/// detuning `spec.detuning`, written in a frame co-rotating with
/// `ω_m a†a − δσz/2`:
/// `(Ω₀/2)(σ₊ e^{iη(a+a†)} e^{iφ} + h.c.) + ω_m a†a − δσz/2`.
///
/// Every sideband term is kept. The frame change is diagonal in the product
/// basis, so populations equal those of the interaction picture.
pub fn full_interaction_generator(spec: &PulseSpec, space: &SpinFockSpace) -> Result<ComplexMatrix> {
    spec.validate()?;
    let mut h = coupling_block(spec, space)?;
    add_frame_terms(&mut h, spec.trap_frequency, spec.detuning);
    Ok(h)
}

fn coupling_block(spec: &PulseSpec, space: &SpinFockSpace) -> Result<ComplexMatrix> {
    let cutoff = single_mode_cutoff(space)?;
    let mut h = ComplexMatrix::zeros(2 * cutoff, 2 * cutoff);
    let phase = C64::from_polar(0.5 * spec.rabi, spec.phase);
    for m in 0..cutoff {
        for n in 0..cutoff {
            let v = phase * displacement_element(m, n, spec.lamb_dicke);
            h[(m, cutoff + n)] = v;
            h[(cutoff + n, m)] = v.conj();
        }
    }
    Ok(h)
}

fn add_frame_terms(h: &mut ComplexMatrix, trap: f64, detuning: f64) {
    let cutoff = h.rows() / 2;
    for n in 0..cutoff {
        let e = trap * n as f64;
        h[(n, n)] += C64::new(e - detuning / 2.0, 0.0);
        h[(cutoff + n, cutoff + n)] += C64::new(e + detuning / 2.0, 0.0);
    }
}

/// Interaction-picture state after `spec.duration` under the full
/// rotating-wave interaction Hamiltonian, every sideband term kept.
pub fn evolve_interaction_picture(
    spec: &PulseSpec,
    space: &SpinFockSpace,
    initial: &StateVector,
) -> Result<StateVector> {
    let h = full_interaction_generator(spec, space)?;
    let chi = HermitianEigen::new(&h)?.evolve(initial, spec.duration)?;
    check_leakage(&chi, space)?;
    // Undo the co-rotating frame: multiply by e^{iKt}, K = ω_m a†a − δσz/2.
    let cutoff = space.fock_cutoffs()[0];
    let t = spec.duration;
    Ok(StateVector::new(
        chi.amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let (spin, n) = (i / cutoff, i % cutoff);
                let sz = if spin == 0 { 1.0 } else { -1.0 };
                let k = spec.trap_frequency * n as f64 - spec.detuning * sz / 2.0;
                a * C64::from_polar(1.0, k * t)
            })
            .collect(),
    ))
}

/// `P↑` after `spec.duration` for each detuning in `grid`, with all sideband
/// terms retained. Grid points are evaluated in parallel.
pub fn sideband_spectrum(
    spec: &PulseSpec,
    space: &SpinFockSpace,
    initial: &StateVector,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(invalid("detuning grid is empty"));
    }
    if let Some(d) = grid.iter().find(|d| !d.is_finite()) {
        return Err(invalid(format!("detuning {d} is not finite")));
    }
    spec.validate()?;
    check_leakage(initial, space)?;
    let base = coupling_block(spec, space)?;
    grid.par_iter()
        .map(|&delta| {
            let mut h = base.clone();
            add_frame_terms(&mut h, spec.trap_frequency, delta);
            let psi = HermitianEigen::new(&h)?.evolve(initial, spec.duration)?;
            check_leakage(&psi, space)?;
            Ok((delta, up_population(&psi, space)?))
        })
        .collect()
}

/// Smallest step count meeting the lab-frame step-size rule
/// `dt ≤ (2π / 50) / max(ω, ω₀, Ω₀, ω_m)`.
pub fn lab_frame_min_steps(spec: &PulseSpec) -> Result<usize> {
    let omega0 = spec
        .qubit_frequency
        .ok_or_else(|| invalid("the lab frame needs qubit_frequency"))?;
    let fastest = [omega0 + spec.detuning, omega0, spec.rabi, spec.trap_frequency]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);
    let dt_max = std::f64::consts::TAU / 50.0 / fastest;
    Ok(((spec.duration / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize)
}

fn free_energies(omega0: f64, trap: f64, cutoff: usize) -> Vec<f64> {
    let mut e = Vec::with_capacity(2 * cutoff);
    for sign in [0.5, -0.5] {
        e.extend((0..cutoff).map(|n| sign * omega0 + trap * (n as f64 + 0.5)));
    }
    e
}

/// Lab-frame evolution under `H₀ + V(t)` with
/// `H₀ = ω₀σz/2 + ω_m(a†a + ½)` and `V = Ω₀(σ₊ + σ₋) cos(η(a+a†) − ωt + φ)`,
/// `ω = ω₀ + δ`, over `spec.duration` with no rotating-wave approximation.
///
/// Each step is the symmetric product `e^{-iH₀dt/2} e^{-iV(t_mid)dt} e^{-iH₀dt/2}`,
/// which is second order in `dt`. `V(t_mid)` is exponentiated exactly in the
/// eigenbasis of the truncated position quadrature.
pub fn evolve_lab_frame(
    spec: &PulseSpec,
    space: &SpinFockSpace,
    initial: &StateVector,
    steps: usize,
) -> Result<StateVector> {
    spec.validate()?;
    let cutoff = single_mode_cutoff(space)?;
    if initial.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            actual: initial.dim(),
        });
    }
    let required = lab_frame_min_steps(spec)?;
    if steps < required {
        return Err(Error::StepSize { steps, required });
    }
    let omega0 = spec.qubit_frequency.expect("checked by lab_frame_min_steps");
    let omega = omega0 + spec.detuning;
    let dt = spec.duration / steps as f64;

    let x = DMatrix::<f64>::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            (j as f64).sqrt()
        } else if i == j + 1 {
            (i as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = x.symmetric_eigen();
    let xk = &eig.eigenvalues;
    // Millions of basis changes amplify any non-orthogonality of the
    // eigenvectors into norm drift, so polish them first.
    let mut w = eig.eigenvectors.clone();
    for _ in 0..3 {
        let wtw = w.transpose() * &w;
        w = &w * (DMatrix::<f64>::identity(cutoff, cutoff) * 3.0 - wtw) * 0.5;
    }

    let energies = free_energies(omega0, spec.trap_frequency, cutoff);
    let half: Vec<C64> = energies.iter().map(|&e| C64::from_polar(1.0, -e * dt / 2.0)).collect();
    let full: Vec<C64> = half.iter().map(|h| h * h).collect();

    let mut amps: Vec<C64> = initial.amplitudes().to_vec();
    let mut y = vec![C64::new(0.0, 0.0); 2 * cutoff];
    for (a, p) in amps.iter_mut().zip(&half) {
        *a *= p;
    }
    for step in 0..steps {
        let theta = omega * (step as f64 + 0.5) * dt - spec.phase;
        // Into the quadrature eigenbasis, one spin block at a time.
        for blk in 0..2 {
            let (src, dst) = (&amps[blk * cutoff..(blk + 1) * cutoff], blk * cutoff);
            for k in 0..cutoff {
                let mut acc = C64::new(0.0, 0.0);
                for (n, a) in src.iter().enumerate() {
                    acc += a * w[(n, k)];
                }
                y[dst + k] = acc;
            }
        }
        for k in 0..cutoff {
            let angle = dt * spec.rabi * (spec.lamb_dicke * xk[k] - theta).cos();
            let (s, c) = angle.sin_cos();
            let (u, d) = (y[k], y[cutoff + k]);
            y[k] = u * c - I * s * d;
            y[cutoff + k] = d * c - I * s * u;
        }
        for blk in 0..2 {
            for n in 0..cutoff {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..cutoff {
                    acc += y[blk * cutoff + k] * w[(n, k)];
                }
                amps[blk * cutoff + n] = acc;
            }
        }
        let phases = if step + 1 == steps { &half } else { &full };
        for (a, p) in amps.iter_mut().zip(phases) {
            *a *= p;
        }
    }
    let psi = StateVector::new(amps);
    check_leakage(&psi, space)?;
    Ok(psi)
}

/// Interaction-picture state `e^{iH₀t} ψ_lab`.
pub fn lab_to_interaction(
    spec: &PulseSpec,
    space: &SpinFockSpace,
    psi_lab: &StateVector,
    t: f64,
) -> Result<StateVector> {
    let cutoff = single_mode_cutoff(space)?;
    if psi_lab.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            actual: psi_lab.dim(),
        });
    }
    let omega0 = spec
        .qubit_frequency
        .ok_or_else(|| invalid("the lab frame needs qubit_frequency"))?;
    let energies = free_energies(omega0, spec.trap_frequency, cutoff);
    Ok(StateVector::new(
        psi_lab
            .amplitudes()
            .iter()
            .zip(energies)
            .map(|(a, e)| a * C64::from_polar(1.0, e * t))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{fidelity, matexp_aih, pauli, position_quadrature};
    use std::f64::consts::PI;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d <= tol, "deviation {d:e}\n{a:?}\n{b:?}");
    }

    fn m(rows: [[C64; 2]; 2]) -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, rows.concat()).unwrap()
    }

    fn det(u: &ComplexMatrix) -> C64 {
        u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)]
    }

    #[test]
    fn rotation_examples() {
        let o = C64::new(0.0, 0.0);
        close(&rotation(0.0, 0.0, PI), &m([[o, -I], [-I, o]]), 1e-15);
        for phi in [0.0, 0.7, 2.0, 5.5] {
            let e = C64::from_polar(1.0, -0.6);
            close(&rotation(PI / 2.0, phi, 1.2), &m([[e, o], [o, e.conj()]]), 1e-15);
        }
        close(
            &(&rotation(0.0, 0.0, 0.4) * &rotation(0.0, 0.0, 1.1)),
            &rotation(0.0, 0.0, 1.5),
            1e-15,
        );
    }

    #[test]
    fn equatorial_examples() {
        let (o, one) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        close(&rotation_equatorial(0.0, PI), &m([[o, -I], [-I, o]]), 1e-15);
        close(&rotation_equatorial(PI / 2.0, PI), &m([[o, one], [-one, o]]), 1e-15);
        close(&rotation(0.0, PI / 2.0, PI), &m([[o, one], [-one, o]]), 1e-15);
        close(&rotation_equatorial(1.3, 2.0 * PI), &ComplexMatrix::identity(2).scale_real(-1.0), 1e-15);
        for phi in [0.0, 0.3, 1.9, 4.0] {
            for theta in [0.1, 1.0, 3.0] {
                close(&rotation_equatorial(phi, theta), &rotation(0.0, phi, theta), 1e-12);
            }
        }
    }

    #[test]
    fn equatorial_matches_carrier_propagator() {
        let (phi, theta) = (0.83, 1.7);
        let h = (&pauli::sigma_plus().scale(C64::from_polar(0.5, phi))
            + &pauli::sigma_minus().scale(C64::from_polar(0.5, -phi)))
            .clone();
        close(&matexp_aih(&h, theta).unwrap(), &rotation_equatorial(phi, theta), 1e-13);
    }

    #[test]
    fn rotation_is_su2() {
        for &(b, p, t) in &[(0.3, 1.2, 2.2), (-1.2, 5.0, 0.4), (1.5, 0.0, -3.0)] {
            let r = rotation(b, p, t);
            assert!((det(&r) - 1.0).norm() < 1e-12);
            assert!((r.trace() - 2.0 * (t / 2.0).cos()).norm() < 1e-12);
            assert!(r.is_unitary(1e-12));
        }
    }

    #[test]
    fn debye_waller_examples() {
        assert!((debye_waller(0, 0, 0.1).unwrap() - (-0.005f64).exp()).abs() < 1e-15);
        assert!((debye_waller(0, 1, 0.1).unwrap() - 0.1 * (-0.005f64).exp()).abs() < 1e-15);
        assert!((debye_waller(1, 0, 0.1).unwrap() - (-0.005f64).exp() * 0.99).abs() < 1e-15);
        assert!(debye_waller(0, -1, 0.1).is_err());
        assert_eq!(debye_waller(3, 2, 0.2).unwrap(), debye_waller(5, -2, 0.2).unwrap());
    }

    #[test]
    fn debye_waller_matches_matrix_exponential() {
        let cutoff = 80;
        let x = position_quadrature(cutoff).unwrap();
        for eta in [0.1, 0.3] {
            let e = matexp_aih(&x, -eta).unwrap();
            for n in 0..6 {
                for s in -2i32..=2 {
                    if n as i32 + s < 0 {
                        continue;
                    }
                    let mm = (n as i32 + s) as usize;
                    assert!((e[(mm, n)] - displacement_element(mm, n, eta)).norm() < 1e-12);
                    assert!((e[(mm, n)].norm() - debye_waller(n, s, eta).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rabi_frequency_examples() {
        let spec = PulseSpec::new(1.0, 0.1);
        assert!(rabi_frequency(&spec, 0, -1).is_err());
        assert_eq!(rabi_frequency(&PulseSpec::new(1.0, 0.0), 0, 0).unwrap(), 1.0);
        let eta: f64 = 0.05;
        let expected = (-eta * eta / 2.0).exp() * eta / 5f64.sqrt() * assoc_laguerre(4, 1, eta * eta);
        let got = rabi_frequency(&PulseSpec::new(1.0, eta), 4, 1).unwrap();
        assert!((got - expected).abs() < 1e-15);
        // The prefactor √(4!/5!) times L₄¹(0) = 5 reproduces the √5 of the a† matrix element.
        assert!((got - eta * 5f64.sqrt()).abs() < 1e-2 * got);
    }

    #[test]
    fn lamb_dicke_examples() {
        let spec = PulseSpec::new(1.0, 0.1);
        assert!((lamb_dicke_rabi(&spec, 0, 0).unwrap() - 0.995).abs() < 1e-15);
        assert!((lamb_dicke_rabi(&spec, 0, 1).unwrap() - 0.1).abs() < 1e-15);
        assert!(lamb_dicke_rabi(&spec, 0, 2).is_err());
        for n in 0..=3 {
            let exact = rabi_frequency(&spec, n, 0).unwrap();
            let approx = lamb_dicke_rabi(&spec, n, 0).unwrap();
            assert!((exact - approx).abs() < 2.0 * 1e-4 * ((n + 1) as f64).powi(2));
        }
    }

    #[test]
    fn carrier_pi_pulse() {
        let space = SpinFockSpace::single(6).unwrap();
        let spec = PulseSpec::new(0.3, 0.0);
        let h = sideband_hamiltonian(&spec, Sideband::CARRIER, &space).unwrap();
        let psi0 = space.basis_state(&[Spin::Down], &[0]).unwrap();
        let psi = HermitianEigen::new(&h).unwrap().evolve(&psi0, PI / 0.3).unwrap();
        let target = space.basis_state(&[Spin::Up], &[0]).unwrap();
        assert!(fidelity(&psi, &target).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn blue_sideband_pi_pulse() {
        let space = SpinFockSpace::single(10).unwrap();
        let spec = PulseSpec::new(1.0, 0.1);
        let h = sideband_hamiltonian(&spec, Sideband::BLUE, &space).unwrap();
        let t = PI / rabi_frequency(&spec, 0, 1).unwrap();
        let psi0 = space.basis_state(&[Spin::Down], &[0]).unwrap();
        let psi = HermitianEigen::new(&h).unwrap().evolve(&psi0, t).unwrap();
        let target = space.basis_state(&[Spin::Up], &[1]).unwrap();
        assert!(fidelity(&psi, &target).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn red_sideband_leaves_ground_state() {
        let space = SpinFockSpace::single(8).unwrap();
        let h = sideband_hamiltonian(&PulseSpec::new(1.0, 0.2), Sideband::RED, &space).unwrap();
        let psi0 = space.basis_state(&[Spin::Down], &[0]).unwrap();
        let eig = HermitianEigen::new(&h).unwrap();
        for t in [0.0, 1.0, 17.0, 1234.5] {
            assert!(eig.evolve(&psi0, t).unwrap().max_abs_diff(&psi0) < 1e-12);
        }
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let space = SpinFockSpace::single(12).unwrap();
        for model in [CouplingModel::Exact, CouplingModel::Idealized] {
            let spec = PulseSpec::new(0.7, 0.25).with_phase(1.1).with_coupling(model);
            for s in -3..=3 {
                let h = sideband_hamiltonian(&spec, Sideband(s), &space).unwrap();
                assert!(h.hermitian_deviation() < 1e-12);
            }
        }
        let tiny = SpinFockSpace::single(2).unwrap();
        assert!(sideband_hamiltonian(&PulseSpec::new(1.0, 0.1), Sideband(2), &tiny).is_err());
    }

    #[test]
    fn model_rabi_frequency_follows_coupling() {
        let exact = PulseSpec::new(2.0, 0.1);
        let ideal = exact.clone().with_coupling(CouplingModel::Idealized);
        assert_eq!(model_rabi_frequency(&exact, 3, 1).unwrap(), rabi_frequency(&exact, 3, 1).unwrap());
        assert!((model_rabi_frequency(&ideal, 3, 1).unwrap() - 0.4).abs() < 1e-15);
        assert!(model_rabi_frequency(&ideal, 0, -1).is_err());
    }

    #[test]
    fn idealized_first_sidebands_use_ladder_operators() {
        let space = SpinFockSpace::single(5).unwrap();
        let spec = PulseSpec::new(1.0, 0.1).with_coupling(CouplingModel::Idealized);
        let h = sideband_hamiltonian(&spec, Sideband::RED, &space).unwrap();
        // ⟨↑,n−1|H|↓,n⟩ = Ω₀η√n / 2
        assert!((h[(2, 5 + 3)].re - 0.05 * 3f64.sqrt()).abs() < 1e-15);
        let c = sideband_hamiltonian(&spec, Sideband::CARRIER, &space).unwrap();
        assert_eq!(c[(4, 9)].re, 0.5);
    }

    #[test]
    fn nutation_examples() {
        let space = SpinFockSpace::single(6).unwrap();
        let omega = 0.4;
        let spec = PulseSpec::new(omega, 0.0).with_duration(2.0 * PI / omega);
        let psi0 = space.basis_state(&[Spin::Down], &[0]).unwrap();
        let curve = nutation_curve(&spec, Sideband::CARRIER, &space, &psi0, 5).unwrap();
        assert!(curve[2].1 > 1.0 - 1e-9);
        assert!(curve[4].1 < 1e-9);
        assert!(nutation_curve(&spec, Sideband::CARRIER, &space, &psi0, 1).is_err());
    }

    #[test]
    fn nutation_matches_sin_squared() {
        let space = SpinFockSpace::single(10).unwrap();
        let spec = PulseSpec::new(1.0, 0.15).with_duration(20.0);
        for n in [0, 2, 5] {
            let psi0 = space.basis_state(&[Spin::Down], &[n]).unwrap();
            let rabi = rabi_frequency(&spec, n, 0).unwrap();
            for (t, p) in nutation_curve(&spec, Sideband::CARRIER, &space, &psi0, 41).unwrap() {
                assert!((p - (rabi * t / 2.0).sin().powi(2)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn thermal_nutation_matches_weighted_sum() {
        let cutoff = 25;
        let space = SpinFockSpace::single(cutoff).unwrap();
        let spec = PulseSpec::new(1.0, 0.2).with_duration(30.0);
        let p = thermal_populations(0.5, cutoff - 2);
        let norm: f64 = p.iter().sum();
        let curve = thermal_nutation_curve(&spec, Sideband::CARRIER, &space, Spin::Down, &p, 31).unwrap();
        let from_up = thermal_nutation_curve(&spec, Sideband::CARRIER, &space, Spin::Up, &p, 31).unwrap();
        for ((t, got), (_, up)) in curve.into_iter().zip(from_up) {
            assert!((got + up - 1.0).abs() < 1e-12);
            let oracle: f64 = p
                .iter()
                .enumerate()
                .map(|(n, w)| w / norm * (debye_waller(n, 0, 0.2).unwrap() * t / 2.0).sin().powi(2))
                .sum();
            assert!((got - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_without_recoil_is_two_level_rabi() {
        let space = SpinFockSpace::single(4).unwrap();
        let omega: f64 = 0.2;
        let spec = PulseSpec::new(omega, 0.0).with_duration(PI / omega);
        let psi0 = space.basis_state(&[Spin::Down], &[0]).unwrap();
        let grid: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.25).collect();
        for (delta, p) in sideband_spectrum(&spec, &space, &psi0, &grid).unwrap() {
            let w2 = omega * omega + delta * delta;
            let expected = omega * omega / w2 * (w2.sqrt() * spec.duration / 2.0).sin().powi(2);
            assert!((p - expected).abs() < 1e-10, "δ = {delta}");
        }
    }

    #[test]
    fn lab_frame_step_rule() {
        let space = SpinFockSpace::single(4).unwrap();
        let spec = PulseSpec::new(0.1, 0.1).with_qubit_frequency(10.0).with_duration(1.0);
        let psi0 = space.basis_state(&[Spin::Down], &[0]).unwrap();
        let need = lab_frame_min_steps(&spec).unwrap();
        assert_eq!(need, 80);
        assert!(matches!(
            evolve_lab_frame(&spec, &space, &psi0, need - 1),
            Err(Error::StepSize { .. })
        ));
        assert!(evolve_lab_frame(&spec, &space, &psi0, need).is_ok());
        assert!(evolve_lab_frame(&PulseSpec::new(0.1, 0.1), &space, &psi0, 10).is_err());
    }

    #[test]
    fn lab_frame_without_drive_is_free_evolution() {
        let space = SpinFockSpace::single(6).unwrap();
        let spec = PulseSpec::new(0.0, 0.1).with_qubit_frequency(20.0).with_duration(3.0);
        let psi0 = StateVector::new(
            (0..12).map(|k| C64::new((k as f64 * 0.3).cos(), (k as f64).sin()) * f64::from(k < 3 || (6..9).contains(&k))).collect(),
        )
        .normalized();
        let psi = evolve_lab_frame(&spec, &space, &psi0, 1000).unwrap();
        let back = lab_to_interaction(&spec, &space, &psi, 3.0).unwrap();
        assert!(back.max_abs_diff(&psi0) < 1e-12);
    }
}

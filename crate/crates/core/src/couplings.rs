//! Rabi frequencies from the physical drive: magnetic dipole, two-photon
//! Raman with its light shifts, and optical quadrupole.
//!
//! Dipole and quadrupole matrix elements are caller-supplied numbers in
//! normalized units; nothing here computes atomic structure.

use crate::error::{invalid, Result};
use crate::ion_species::ZEEMAN_MHZ_PER_MT;
use crate::qlinalg::{ComplexMatrix, SpinFockSpace, C64};
use crate::spin_motion::{sideband_hamiltonian, PulseSpec, Sideband};

/// Angular Rabi frequency (2π × MHz) of a Zeeman qubit driven by an RF field of
/// amplitude `b0_mt` at `angle` to the quantization axis.
pub fn magnetic_dipole_rabi(b0_mt: f64, angle: f64) -> Result<f64> {
    if !(b0_mt >= 0.0 && b0_mt.is_finite()) {
        return Err(invalid(format!("field amplitude must be non-negative, got {b0_mt} mT")));
    }
    // Only the transverse component couples; its sign is a phase.
    Ok(std::f64::consts::TAU * ZEEMAN_MHZ_PER_MT * b0_mt * angle.sin().abs())
}

/// One laser beam.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamSpec {
    pub amplitude: f64,
    pub polarization: [C64; 3],
    pub wavevector: [f64; 3],
    pub phase: f64,
    pub frequency: f64,
}

impl BeamSpec {
    pub fn new(amplitude: f64, polarization: [C64; 3], wavevector: [f64; 3], phase: f64, frequency: f64) -> Result<Self> {
        let norm: f64 = polarization.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("polarization must have unit norm, got {norm}")));
        }
        Ok(BeamSpec {
            amplitude,
            polarization,
            wavevector,
            phase,
            frequency,
        })
    }
}

/// Dipole couplings of one beam between the qubit levels and an excited level `e_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelCoupling {
    /// `⟨↑|d·ε|e_i⟩`
    pub up: C64,
    /// `⟨↓|d·ε|e_i⟩`
    pub down: C64,
    /// Δ_i, laser detuning from the `e_i` transition.
    pub detuning: f64,
}

/// The red and blue beam couplings through the same excited level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamanPath {
    pub red: LevelCoupling,
    pub blue: LevelCoupling,
}

impl RamanPath {
    pub fn new(red: LevelCoupling, blue: LevelCoupling) -> Self {
        RamanPath { red, blue }
    }
}

/// Complex two-photon Rabi frequency split into magnitude and phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamanRabi {
    pub rabi: f64,
    /// Argument of the effective coupling, to be added to `φ_b − φ_r`.
    pub phase: f64,
}

fn check_paths(paths: &[RamanPath]) -> Result<()> {
    if paths.is_empty() {
        return Err(invalid("at least one excited level is required"));
    }
    for (i, p) in paths.iter().enumerate() {
        for (beam, d) in [("red", p.red.detuning), ("blue", p.blue.detuning)] {
            if d == 0.0 || !d.is_finite() {
                return Err(invalid(format!(
                    "{beam} detuning of level {i} is {d}; resonant excitation is outside the adiabatic model"
                )));
            }
        }
    }
    Ok(())
}

/// `Ω₀ = (E_r E_b / 4) Σ_i ⟨↑|d·ε_r|e_i⟩⟨e_i|d·ε_b|↓⟩ / Δ_i`, with
/// `⟨e_i|d·ε_b|↓⟩` taken as the conjugate of the blue `down` element and
/// Δ_i the red-beam detuning.
pub fn raman_rabi(e_red: f64, e_blue: f64, paths: &[RamanPath]) -> Result<RamanRabi> {
    check_paths(paths)?;
    let sum: C64 = paths
        .iter()
        .map(|p| p.red.up * p.blue.down.conj() / p.red.detuning)
        .sum();
    let omega = sum * (e_red * e_blue / 4.0);
    Ok(RamanRabi {
        rabi: omega.norm(),
        phase: if omega.norm() == 0.0 { 0.0 } else { omega.arg() },
    })
}

/// AC Stark shifts of the two qubit levels from both Raman beams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightShifts {
    pub down: f64,
    pub up: f64,
    /// `up − down`, the shift of the qubit transition frequency.
    pub differential: f64,
}

impl LightShifts {
    /// Coefficient of σz in the carrier Hamiltonian, half the differential shift.
    pub fn sigma_z_coefficient(&self) -> f64 {
        self.differential / 2.0
    }
}

/// `Δ_{↓/↑} = (|E_r|²/4) Σ |⟨·|d·ε_r|e_i⟩|²/Δ_{i,r} + (|E_b|²/4) Σ |⟨·|d·ε_b|e_i⟩|²/Δ_{i,b}`.
pub fn raman_light_shifts(e_red: f64, e_blue: f64, paths: &[RamanPath]) -> Result<LightShifts> {
    check_paths(paths)?;
    let (ir, ib) = (e_red * e_red / 4.0, e_blue * e_blue / 4.0);
    let shift = |pick: fn(&LevelCoupling) -> C64| -> f64 {
        paths
            .iter()
            .map(|p| ir * pick(&p.red).norm_sqr() / p.red.detuning + ib * pick(&p.blue).norm_sqr() / p.blue.detuning)
            .sum()
    };
    let down = shift(|c| c.down);
    let up = shift(|c| c.up);
    Ok(LightShifts {
        down,
        up,
        differential: up - down,
    })
}

/// Raman carrier Hamiltonian on a single spin and mode:
/// `(Ω₀/2) D_{n,n}(σ₊e^{iφ} + σ₋e^{−iφ}) + (Δ↑ − Δ↓)/2 · σz`,
/// where `pulse.rabi` and `pulse.phase` already include the effective
/// coupling's magnitude and argument.
pub fn raman_carrier_hamiltonian(
    pulse: &PulseSpec,
    shifts: &LightShifts,
    space: &SpinFockSpace,
) -> Result<ComplexMatrix> {
    let mut h = sideband_hamiltonian(pulse, Sideband::CARRIER, space)?;
    let cutoff = space.fock_cutoffs()[0];
    let z = shifts.sigma_z_coefficient();
    for n in 0..cutoff {
        h[(n, n)] += C64::new(z, 0.0);
        h[(cutoff + n, cutoff + n)] -= C64::new(z, 0.0);
    }
    Ok(h)
}

/// Effective pulse phase `φ_b − φ_r` plus the argument of the two-photon coupling.
pub fn raman_phase(red: &BeamSpec, blue: &BeamSpec, rabi: &RamanRabi) -> f64 {
    blue.phase - red.phase + rabi.phase
}

/// Optical quadrupole Rabi frequency `(E₀/2)|⟨S|(ε·r)(k·r)|D⟩|`.
pub fn quadrupole_rabi(e0: f64, element: C64) -> f64 {
    e0 / 2.0 * element.norm()
}

/// `η = k √(1/(2 m ω_m))` with ħ = 1.
pub fn lamb_dicke_parameter(k_effective: f64, mass: f64, trap_frequency: f64) -> Result<f64> {
    if !(k_effective >= 0.0 && k_effective.is_finite()) {
        return Err(invalid(format!("wavevector magnitude must be non-negative, got {k_effective}")));
    }
    if !(mass > 0.0 && trap_frequency > 0.0) || !mass.is_finite() || !trap_frequency.is_finite() {
        return Err(invalid("mass and trap frequency must be positive"));
    }
    Ok(k_effective * (1.0 / (2.0 * mass * trap_frequency)).sqrt())
}

/// `|(k_b − k_r)·â|` for a trap axis `axis` of any non-zero length.
pub fn raman_wavevector(red: &BeamSpec, blue: &BeamSpec, axis: [f64; 3]) -> Result<f64> {
    let len = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if len == 0.0 || !len.is_finite() {
        return Err(invalid("trap axis must be a non-zero vector"));
    }
    let proj: f64 = (0..3).map(|i| (blue.wavevector[i] - red.wavevector[i]) * axis[i]).sum();
    Ok((proj / len).abs())
}

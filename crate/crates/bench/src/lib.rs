//! Fixtures shared by the benchmarks.

use iontrap_core::qlinalg::{position_quadrature, ComplexMatrix, Spin, SpinFockSpace, StateVector};
use iontrap_core::spin_motion::PulseSpec;

/// Position quadrature of a `cutoff`-level oscillator: a dense Hermitian
/// test matrix with the spectrum the simulator actually sees.
pub fn quadrature(cutoff: usize) -> ComplexMatrix {
    position_quadrature(cutoff).expect("cutoff within capacity")
}

/// Sideband pulse at `η = 0.1` on `|↓, 0⟩`.
pub fn pulse_setup(cutoff: usize) -> (PulseSpec, SpinFockSpace, StateVector) {
    let space = SpinFockSpace::single(cutoff).expect("small space");
    let psi = space.basis_state(&[Spin::Down], &[0]).expect("in range");
    let spec = PulseSpec::new(0.05, 0.1).with_duration(std::f64::consts::PI / 0.05);
    (spec, space, psi)
}

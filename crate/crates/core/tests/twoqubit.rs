use std::f64::consts::{FRAC_1_SQRT_2, PI};

use iontrap_core::qlinalg::{kron, ladder_operators, matexp_aih, pauli, ComplexMatrix, StateVector, C64};
use iontrap_core::twoqubit::*;
use proptest::prelude::*;

/// Independent two-spin ⊗ mode integration. Each ion `i` with spin `σ`
/// feels `F_σ cos((ω_mode − δ)t)·x_i`, `x_i = s_i (x_mode0/√2)(a + a†)`;
/// in the mode's interaction picture this is
/// `Σ_i s_i F_{σ_i} (x_mode0/2√2)(a†e^{iδt} + a e^{−iδt})`.
fn explicit_gate(
    pattern: &ForcePattern,
    modes: &NormalModes,
    mode: Mode,
    delta: f64,
    cutoff: usize,
    steps: usize,
) -> (ComplexMatrix, [f64; 4]) {
    let signs = modes.signs(mode);
    let up = pauli::proj_up();
    let down = pauli::proj_down();
    let id = ComplexMatrix::identity(2);
    let ion = |i: usize| {
        let f = &up.scale_real(pattern.force_up[i]) + &down.scale_real(pattern.force_down[i]);
        let f = f.scale_real(signs[i]);
        if i == 0 {
            kron(&f, &id).unwrap()
        } else {
            kron(&id, &f).unwrap()
        }
    };
    let spin_force = &ion(0) + &ion(1);
    let (a, ad) = ladder_operators(cutoff).unwrap();
    let w = modes.width(mode) * FRAC_1_SQRT_2 / 2.0;
    let tau = 2.0 * PI / delta.abs();
    let dt = tau / steps as f64;
    let mut u = ComplexMatrix::identity(4 * cutoff);
    for k in 0..steps {
        let t = (k as f64 + 0.5) * dt;
        let e = C64::from_polar(1.0, delta * t);
        let motion = &ad.scale(e * w) + &a.scale(e.conj() * w);
        let h = kron(&spin_force, &motion).unwrap();
        u = &matexp_aih(&h, dt).unwrap() * &u;
    }
    // ⟨s,0|U|s,0⟩ and the ground population it leaves behind.
    let mut spin = ComplexMatrix::zeros(4, 4);
    let mut ground = [0.0; 4];
    for s in 0..4 {
        spin[(s, s)] = u[(s * cutoff, s * cutoff)];
        ground[s] = spin[(s, s)].norm_sqr();
        for r in 0..4 {
            if r != s {
                assert!(u[(r * cutoff, s * cutoff)].norm() < 1e-14);
            }
        }
    }
    (spin, ground)
}

fn max_phase_gap(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| C64::from_polar(1.0, x - y).arg().abs())
        .fold(0.0, f64::max)
}

#[test]
fn analytic_gate_matches_explicit_dynamics() {
    let modes = normal_modes(1.0, 1.0).unwrap();
    for (mode, pattern, delta) in [
        (Mode::St, ForcePattern::uniform(0.0, 0.0), 0.1),
        (Mode::St, ForcePattern::uniform(1.0, -1.0), 0.1),
        (Mode::Cm, ForcePattern::uniform(1.0, -0.4), -0.1),
        (Mode::St, ForcePattern { force_up: [0.9, 1.1], force_down: [-0.2, 0.3], derivation: None }, 0.08),
    ] {
        let f = calibrated_force(&modes, delta, mode);
        let scaled = ForcePattern {
            force_up: pattern.force_up.map(|x| x * f),
            force_down: pattern.force_down.map(|x| x * f),
            derivation: None,
        };
        let analytic = sigma_z_gate(&scaled, &modes, delta, mode).unwrap();
        let (spin, ground) = explicit_gate(&scaled, &modes, mode, delta, 16, 1500);
        let phases = [0, 1, 2, 3].map(|k| spin[(k, k)].arg());
        assert!(max_phase_gap(&phases, &analytic.phases) < 1e-3, "{phases:?} {:?}", analytic.phases);
        assert!(ground.iter().all(|&p| p > 1.0 - 1e-6), "{ground:?}");

        let dynamic = sigma_z_gate_dynamic(&scaled, &modes, delta, mode, 20, 4000).unwrap();
        assert!(max_phase_gap(&dynamic.phases, &analytic.phases) < 1e-3);
        assert!(dynamic.ground_populations.iter().all(|&p| p > 1.0 - 1e-6));
        assert!(dynamic.spin_matrix().max_abs_diff(&spin) < 1e-4);
    }
}

#[test]
fn calibrated_gate_disentangles_spin_and_motion() {
    let modes = normal_modes(1.0, 1.0).unwrap();
    let delta = 0.1;
    let f = calibrated_force(&modes, delta, Mode::St);
    let pattern = ForcePattern::uniform(f, -f);
    let dynamic = sigma_z_gate_dynamic(&pattern, &modes, delta, Mode::St, 20, 4000).unwrap();
    let plus = StateVector::new(vec![C64::new(0.5, 0.0); 4]);
    let out = dynamic.apply(&plus).unwrap();
    let expected = phase_gate_pi_half().apply(&plus).unwrap();
    // Spin part of |out⟩ projected on the motional ground state.
    let reduced: Vec<C64> = (0..4).map(|s| out.amplitude(s * 20)).collect();
    let overlap: C64 = reduced.iter().zip(expected.amplitudes()).map(|(a, b)| b.conj() * a).sum();
    assert!(overlap.norm_sqr() > 1.0 - 1e-6);

    // Bell-type check: (|↑↑⟩+|↓↓⟩)/√2 stays maximally correlated.
    let ghz = StateVector::new(vec![
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(FRAC_1_SQRT_2, 0.0),
    ]);
    let out = dynamic.apply(&ghz).unwrap();
    assert!((bell_fidelity(&out).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn pi_phase_and_cnot_are_related_by_hadamards() {
    let ih = kron(&ComplexMatrix::identity(2), &hadamard_standard()).unwrap();
    let from_cnot = &(&ih * cnot().matrix()) * &ih;
    assert!(from_cnot.max_abs_diff(phase_gate_pi().matrix()) < 1e-15);
    let back = &(&ih * phase_gate_pi().matrix()) * &ih;
    assert!(back.max_abs_diff(cnot().matrix()) < 1e-15);

    let hp = kron(&ComplexMatrix::identity(2), &hadamard_paper()).unwrap();
    let decomposed = &(&hp * cnot().matrix()) * &hp;
    let expect = ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, -1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ]);
    assert!(decomposed.max_abs_diff(&expect) < 1e-15);
}

#[test]
fn diagonal_gates_commute_with_zz() {
    let zz = kron(&pauli::sigma_z(), &pauli::sigma_z()).unwrap();
    let modes = normal_modes(1.0, 1.0).unwrap();
    let g = sigma_z_gate(&ForcePattern::uniform(0.03, -0.01), &modes, 0.07, Mode::Cm).unwrap();
    for m in [phase_gate_pi(), phase_gate_pi_half(), g.gate] {
        assert!(m.matrix().is_unitary(1e-10));
        let c = m.matrix().commutator(&zz);
        assert!(c.max_abs_diff(&ComplexMatrix::zeros(4, 4)) < 1e-15);
    }
}

#[test]
fn calibrated_sigma_phi_is_the_spin_flip_up_to_z_rotations() {
    let modes = normal_modes(1.0, 1.0).unwrap();
    let g = sigma_phi_gate(0.0, 1.0, &modes).unwrap();
    let sm = sm_gate();
    let mut best = f64::INFINITY;
    for a in 0..4 {
        for b in 0..4 {
            let z = kron(&z_phase(a as f64 * PI / 2.0), &z_phase(b as f64 * PI / 2.0)).unwrap();
            let conj = &(&z * g.matrix()) * &z.adjoint();
            best = best.min(conj.global_phase_distance(sm.matrix()).1);
        }
    }
    assert!(best < 1e-12, "{best:e}");
}

#[test]
fn sigma_phi_time_domain_matches_analytic() {
    let modes = normal_modes(1.0, 1.0).unwrap();
    let down_down = StateVector::basis(4, 3);
    for phi in [0.0, 0.9] {
        let analytic = sigma_phi_gate(phi, 1.0, &modes).unwrap();
        let dynamic = sigma_phi_gate_dynamic(phi, 1.0, &modes, 20, 4000).unwrap();
        assert!(dynamic.spin_matrix().max_abs_diff(analytic.matrix()) < 1e-3);
        assert!(dynamic.ground_populations.iter().all(|&p| p > 1.0 - 1e-6));
        let out = dynamic.apply(&down_down).unwrap();
        assert!(bell_fidelity(&out).unwrap() > 1.0 - 1e-3);
        assert!(bell_fidelity(&analytic.apply(&down_down).unwrap()).unwrap() > 1.0 - 1e-12);
    }
}

fn diag_phases(g: &GateMatrix) -> [f64; 4] {
    [0, 1, 2, 3].map(|k| g.matrix()[(k, k)].arg())
}

proptest! {
    #[test]
    fn phases_depend_only_on_drive_parameter(
        up in -0.2f64..0.2, down in -0.2f64..0.2, delta in 0.02f64..0.3, c in 0.1f64..10.0,
    ) {
        let modes = normal_modes(1.0, 1.0).unwrap();
        let a = sigma_z_gate(&ForcePattern::uniform(up, down), &modes, delta, Mode::St).unwrap();
        let b = sigma_z_gate(&ForcePattern::uniform(c * up, c * down), &modes, c * delta, Mode::St).unwrap();
        prop_assert!(max_phase_gap(&a.phases, &b.phases) <= 1e-10);
        prop_assert!(max_phase_gap(&diag_phases(&a.gate), &diag_phases(&b.gate)) <= 1e-10);
    }

    #[test]
    fn sigma_phi_family_is_z_covariant(phi in -PI..PI, g in -1.5f64..1.5) {
        let modes = normal_modes(1.0, 1.0).unwrap();
        let zero = sigma_phi_gate(0.0, g, &modes).unwrap();
        let rotated = sigma_phi_gate(phi, g, &modes).unwrap();
        let z = kron(&z_phase(phi), &z_phase(phi)).unwrap();
        let expect = &(&z * zero.matrix()) * &z.adjoint();
        prop_assert!(rotated.matrix().max_abs_diff(&expect) <= 1e-10);
        prop_assert!(rotated.matrix().is_unitary(1e-10));
    }
}

//! Two-ion gates: normal modes, spin-dependent-force phase gates and the
//! matrix identities relating CNOT, phase gates and the collective spin flip.
//!
//! Two-qubit states are ordered `(↑↑, ↑↓, ↓↑, ↓↓)`, ion 1 outermost.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driven_osc::{analytic_phases, drive_path, integrate_driven, min_displacement_cutoff, DrivePath, DriveSpec};
use crate::error::{invalid, Error, Result};
use crate::qlinalg::{kron, pauli, ComplexMatrix, HermitianEigen, Spin, StateVector, C64, MAX_DIM};
use crate::spin_motion::rotation;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance on the unitarity of every [`GateMatrix`].
pub const GATE_UNITARY_TOL: f64 = 1e-10;

/// Labels of the two-qubit basis, in matrix order.
pub const BASIS_LABELS: [&str; 4] = ["↑↑", "↑↓", "↓↑", "↓↓"];

/// Collective spin states in basis order.
pub const BRANCHES: [[Spin; 2]; 4] = [
    [Spin::Up, Spin::Up],
    [Spin::Up, Spin::Down],
    [Spin::Down, Spin::Up],
    [Spin::Down, Spin::Down],
];

/// Path samples per branch used by [`sigma_z_gate`].
pub const DEFAULT_PATH_SAMPLES: usize = 256;

/// Axial normal mode of a two-ion crystal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Centre of mass: ions move in phase.
    Cm,
    /// Stretch: ions move out of phase.
    St,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalModes {
    pub cm_frequency: f64,
    pub st_frequency: f64,
    pub cm_width: f64,
    pub st_width: f64,
    /// Sign of each ion's displacement in the stretch mode.
    pub stretch_signs: [f64; 2],
}

impl NormalModes {
    pub fn frequency(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Cm => self.cm_frequency,
            Mode::St => self.st_frequency,
        }
    }

    /// Ground-state spread `x_mode0`.
    pub fn width(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Cm => self.cm_width,
            Mode::St => self.st_width,
        }
    }

    /// Per-ion participation signs.
    pub fn signs(&self, mode: Mode) -> [f64; 2] {
        match mode {
            Mode::Cm => [1.0, 1.0],
            Mode::St => self.stretch_signs,
        }
    }

    /// Each ion moves by `±(x_mode0/√2)(a + a†)`.
    pub fn coupling_width(&self, mode: Mode) -> f64 {
        self.width(mode) * FRAC_1_SQRT_2
    }

    /// Force driving `mode` given per-ion forces: sum for cm, difference for st.
    pub fn mode_force(&self, mode: Mode, forces: [f64; 2]) -> f64 {
        let s = self.signs(mode);
        s[0] * forces[0] + s[1] * forces[1]
    }
}

/// Modes of two equal ions in a harmonic well: `ω_cm = ω_m`, `ω_st = √3ω_m`,
/// widths `x₀√(ω_m/ω_mode)`.
pub fn normal_modes(trap_frequency: f64, single_ion_width: f64) -> Result<NormalModes> {
    if !(trap_frequency > 0.0 && trap_frequency.is_finite()) {
        return Err(invalid(format!("trap frequency must be positive, got {trap_frequency}")));
    }
    if !(single_ion_width > 0.0 && single_ion_width.is_finite()) {
        return Err(invalid(format!("ground-state width must be positive, got {single_ion_width}")));
    }
    let st = 3f64.sqrt() * trap_frequency;
    Ok(NormalModes {
        cm_frequency: trap_frequency,
        st_frequency: st,
        cm_width: single_ion_width,
        st_width: single_ion_width * (trap_frequency / st).sqrt(),
        stretch_signs: [1.0, -1.0],
    })
}

/// Light shifts of the two qubit levels from the σ₊ and σ₋ components of
/// a lin⊥lin standing wave.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightShiftInputs {
    pub up_plus: f64,
    pub up_minus: f64,
    pub down_plus: f64,
    pub down_minus: f64,
    /// Wavevector difference along the trap axis.
    pub delta_k: f64,
}

/// Force amplitude on each level of each ion, `ħ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcePattern {
    pub force_up: [f64; 2],
    pub force_down: [f64; 2],
    pub derivation: Option<LightShiftInputs>,
}

impl ForcePattern {
    /// The same pair `(F↑, F↓)` on both ions.
    pub fn uniform(force_up: f64, force_down: f64) -> Self {
        ForcePattern {
            force_up: [force_up; 2],
            force_down: [force_down; 2],
            derivation: None,
        }
    }

    /// Forces from the light potential
    /// `Δ(x) = (Δ₊+Δ₋)/2 + (Δ₊−Δ₋)/2·cos(Δk x − Δω t + Δφ)`.
    ///
    /// `−dΔ/dx` has amplitude `(Δk/2)(Δ₊ − Δ₋)`. The ions are taken to sit
    /// an integer number of standing-wave periods apart, so both see the
    /// same drive phase.
    pub fn from_light_shifts(inputs: LightShiftInputs) -> Result<Self> {
        let v = [inputs.up_plus, inputs.up_minus, inputs.down_plus, inputs.down_minus, inputs.delta_k];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("light-shift inputs must be finite"));
        }
        let up = 0.5 * inputs.delta_k * (inputs.up_plus - inputs.up_minus);
        let down = 0.5 * inputs.delta_k * (inputs.down_plus - inputs.down_minus);
        Ok(ForcePattern {
            derivation: Some(inputs),
            ..Self::uniform(up, down)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.force_up.iter().chain(&self.force_down).any(|f| !f.is_finite()) {
            return Err(invalid("forces must be finite"));
        }
        Ok(())
    }

    pub fn force(&self, spin: Spin, ion: usize) -> f64 {
        match spin {
            Spin::Up => self.force_up[ion],
            Spin::Down => self.force_down[ion],
        }
    }

    /// Per-ion forces for a collective spin state.
    pub fn branch_forces(&self, branch: [Spin; 2]) -> [f64; 2] {
        [self.force(branch[0], 0), self.force(branch[1], 1)]
    }
}

/// A two-qubit unitary in `(↑↑, ↑↓, ↓↑, ↓↓)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix(ComplexMatrix);

#[derive(Serialize, Deserialize)]
struct GateJson {
    basis: Vec<String>,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl GateMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 4 || matrix.cols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                actual: if matrix.rows() != 4 { matrix.rows() } else { matrix.cols() },
            });
        }
        let dev = matrix.unitarity_deviation();
        if dev > GATE_UNITARY_TOL {
            return Err(invalid(format!("gate is not unitary: max |U†U − I| = {dev:e}")));
        }
        Ok(GateMatrix(matrix))
    }

    pub fn from_diagonal_phases(phases: [f64; 4]) -> Self {
        let d: Vec<C64> = phases.iter().map(|&p| C64::from_polar(1.0, p)).collect();
        GateMatrix(ComplexMatrix::from_diagonal(&d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.0.apply(state)
    }

    pub fn compose(&self, after: &GateMatrix) -> GateMatrix {
        GateMatrix(&after.0 * &self.0)
    }

    /// JSON object with a `basis` header and the matrix as rows of `[re, im]`.
    pub fn to_json(&self) -> String {
        let matrix = (0..4)
            .map(|i| (0..4).map(|j| [self.0[(i, j)].re, self.0[(i, j)].im]).collect())
            .collect();
        let doc = GateJson {
            basis: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
            matrix,
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GateJson = serde_json::from_str(text).map_err(|e| invalid(format!("gate JSON: {e}")))?;
        if doc.basis != BASIS_LABELS {
            return Err(invalid(format!("gate JSON basis must be {BASIS_LABELS:?}, got {:?}", doc.basis)));
        }
        if doc.matrix.len() != 4 || doc.matrix.iter().any(|r| r.len() != 4) {
            return Err(invalid("gate JSON matrix must be 4×4"));
        }
        let entries = doc.matrix.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
        Self::new(ComplexMatrix::from_row_major(4, 4, entries)?)
    }
}

fn gate(m: ComplexMatrix) -> GateMatrix {
    GateMatrix::new(m).expect("fixed gate is unitary")
}

fn real4(rows: [[f64; 4]; 4]) -> ComplexMatrix {
    ComplexMatrix::from_fn(4, 4, |i, j| C64::new(rows[i][j], 0.0))
}

/// Flips the second qubit when the first is `↓`: `(α,β,γ,δ) → (α,β,δ,γ)`.
pub fn cnot() -> GateMatrix {
    gate(real4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]))
}

/// Applies `rotation` to the third qubit iff both controls are `↑`.
pub fn toffoli(rotation: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rotation.rows() != 2 || rotation.cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rotation.rows(),
        });
    }
    if !rotation.is_unitary(GATE_UNITARY_TOL) {
        return Err(invalid("toffoli target rotation must be unitary"));
    }
    let mut m = ComplexMatrix::identity(8);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = rotation[(i, j)];
        }
    }
    Ok(m)
}

/// `e^{iπ/2} R(0,0,π) R(0,π/2,π/2) = [[−1, 1], [1, 1]]/√2`.
pub fn hadamard_paper() -> ComplexMatrix {
    let r = &rotation(0.0, 0.0, PI) * &rotation(0.0, PI / 2.0, PI / 2.0);
    r.scale(I)
}

/// `(σx + σz)/√2`.
pub fn hadamard_standard() -> ComplexMatrix {
    (&pauli::sigma_x() + &pauli::sigma_z()).scale_real(FRAC_1_SQRT_2)
}

/// `diag(1, 1, 1, −1)`.
pub fn phase_gate_pi() -> GateMatrix {
    gate(ComplexMatrix::from_diagonal(&[ONE, ONE, ONE, -ONE]))
}

/// `e^{−iπ/2} diag(1, i, i, 1)`.
pub fn phase_gate_pi_half() -> GateMatrix {
    gate(ComplexMatrix::from_diagonal(&[-I, ONE, ONE, -I]))
}

/// `(e^{iπ/4}/√2)(I − iσx⊗σx)`, the collective spin flip.
pub fn sm_gate() -> GateMatrix {
    let pre = C64::from_polar(FRAC_1_SQRT_2, PI / 4.0);
    let xx = kron(&pauli::sigma_x(), &pauli::sigma_x()).expect("4x4");
    let m = &ComplexMatrix::identity(4) - &xx.scale(I);
    gate(m.scale(pre))
}

/// Outcome of [`basis_change_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisChangeReport {
    /// `max |product − sm_gate|` with no phase removed.
    pub sm_max_deviation: f64,
    /// Global phase `χ` with `product ≈ e^{iχ} sm_gate`.
    pub sm_global_phase: f64,
    /// Entrywise deviation left after removing `χ`.
    pub sm_residual: f64,
    /// `[R(π/2,0,π/2)⊗R(π/2,0,π/2)]·diag(1,1,1,−1)` against
    /// `e^{−iπ/2}diag(1,i,i,1)`.
    pub pi_half_max_deviation: f64,
    /// `[I⊗H]·CNOT·[I⊗H]` against `diag(1,1,1,−1)` with the standard Hadamard.
    pub sandwich_standard_deviation: f64,
    /// The same with the decomposed Hadamard.
    pub sandwich_decomposed_deviation: f64,
    /// Diagonal of the decomposed-Hadamard sandwich (real parts).
    pub sandwich_decomposed_diagonal: [f64; 4],
}

/// Re-derives the phase-gate chain by direct matrix products.
pub fn basis_change_check() -> BasisChangeReport {
    let both = |m: ComplexMatrix| kron(&m, &m).expect("4x4");
    let into_x = both(rotation(0.0, PI / 2.0, PI / 2.0));
    let out_of_x = both(rotation(0.0, PI / 2.0, -PI / 2.0));
    let core = GateMatrix::from_diagonal_phases([0.0, PI / 2.0, PI / 2.0, 0.0]);
    let product = &(&into_x * core.matrix()) * &out_of_x;
    let sm = sm_gate();
    let (phase, residual) = product.global_phase_distance(sm.matrix());

    let zr = both(rotation(PI / 2.0, 0.0, PI / 2.0));
    let half = &zr * phase_gate_pi().matrix();

    let sandwich = |h: ComplexMatrix| {
        let ih = kron(&ComplexMatrix::identity(2), &h).expect("4x4");
        &(&ih * cnot().matrix()) * &ih
    };
    let standard = sandwich(hadamard_standard());
    let decomposed = sandwich(hadamard_paper());
    BasisChangeReport {
        sm_max_deviation: product.max_abs_diff(sm.matrix()),
        sm_global_phase: phase,
        sm_residual: residual,
        pi_half_max_deviation: half.max_abs_diff(phase_gate_pi_half().matrix()),
        sandwich_standard_deviation: standard.max_abs_diff(phase_gate_pi().matrix()),
        sandwich_decomposed_deviation: decomposed.max_abs_diff(phase_gate_pi().matrix()),
        sandwich_decomposed_diagonal: [0, 1, 2, 3].map(|k| decomposed[(k, k)].re),
    }
}

/// One line of [`identity_suite`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Tolerance for identities that hold exactly in exact arithmetic; covers
/// the rounding of `1/√2`.
pub const EXACT_TOL: f64 = 1e-15;

/// The universal-gate-set matrix identities, each with its deviation.
pub fn identity_suite() -> Vec<IdentityCheck> {
    let check = |name, deviation: f64, tolerance| IdentityCheck {
        name,
        deviation,
        tolerance,
        passed: deviation <= tolerance,
    };
    let report = basis_change_check();
    let ih = kron(&ComplexMatrix::identity(2), &hadamard_standard()).expect("4x4");
    let back = &(&ih * phase_gate_pi().matrix()) * &ih;
    let cnot_sq = cnot().compose(&cnot());
    let sm = sm_gate();
    let flipped = sm.apply(&StateVector::basis(4, 3)).and_then(|v| sm.apply(&v)).expect("4-dim");
    let decomposed_expect = [1.0, 1.0, -1.0, 1.0];
    let decomposed_dev = report
        .sandwich_decomposed_diagonal
        .iter()
        .zip(decomposed_expect)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    vec![
        check("cnot_squared_is_identity", cnot_sq.matrix().max_abs_diff(&ComplexMatrix::identity(4)), EXACT_TOL),
        check("hadamard_sandwich_of_cnot_is_pi_phase", report.sandwich_standard_deviation, EXACT_TOL),
        check("hadamard_sandwich_of_pi_phase_is_cnot", back.max_abs_diff(cnot().matrix()), EXACT_TOL),
        check("decomposed_hadamard_sandwich_is_diag_1_1_m1_1", decomposed_dev, EXACT_TOL),
        check("z_rotations_turn_pi_phase_into_pi_half_phase", report.pi_half_max_deviation, 1e-12),
        check("x_basis_pi_half_phase_is_spin_flip", report.sm_residual, 1e-12),
        check("x_basis_global_phase", report.sm_global_phase.abs(), 1e-12),
        check("spin_flip_squared_maps_dd_to_uu", flipped.max_abs_diff(&StateVector::basis(4, 0)), EXACT_TOL),
        check("spin_flip_is_unitary", sm.matrix().unitarity_deviation(), 1e-12),
    ]
}

/// A σz gate together with the per-branch loops that produced it.
#[derive(Clone, Debug)]
pub struct SigmaZGate {
    pub gate: GateMatrix,
    /// Acquired phase of each collective spin state.
    pub phases: [f64; 4],
    /// Mode drive parameter `F_mode x_mode0/(√2 δ)` of each branch.
    pub drive_parameters: [f64; 4],
    pub paths: Vec<DrivePath>,
}

fn branch_drive(pattern: &ForcePattern, modes: &NormalModes, detuning: f64, mode: Mode, branch: [Spin; 2]) -> DriveSpec {
    let force = modes.mode_force(mode, pattern.branch_forces(branch));
    DriveSpec {
        trap_frequency: modes.frequency(mode),
        ..DriveSpec::one_loop(force, modes.coupling_width(mode), detuning)
    }
}

fn branch_drives(pattern: &ForcePattern, modes: &NormalModes, detuning: f64, mode: Mode) -> Result<Vec<DriveSpec>> {
    pattern.validate()?;
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(invalid(format!("gate detuning must be finite and non-zero, got {detuning}")));
    }
    let specs: Vec<DriveSpec> = BRANCHES
        .iter()
        .map(|&b| branch_drive(pattern, modes, detuning, mode, b))
        .collect();
    for s in &specs {
        s.validate()?;
        let need = min_displacement_cutoff(C64::new(s.strength(), 0.0));
        if need > MAX_DIM {
            return Err(Error::CapacityExceeded {
                requested: need,
                limit: MAX_DIM,
            });
        }
    }
    Ok(specs)
}

/// Spin-dependent-force phase gate over one loop `τ_g = 2π/|δ|` of `mode`.
pub fn sigma_z_gate(pattern: &ForcePattern, modes: &NormalModes, detuning: f64, mode: Mode) -> Result<SigmaZGate> {
    sigma_z_gate_sampled(pattern, modes, detuning, mode, DEFAULT_PATH_SAMPLES)
}

/// As [`sigma_z_gate`] with `samples` points on each branch path.
pub fn sigma_z_gate_sampled(
    pattern: &ForcePattern,
    modes: &NormalModes,
    detuning: f64,
    mode: Mode,
    samples: usize,
) -> Result<SigmaZGate> {
    let specs = branch_drives(pattern, modes, detuning, mode)?;
    let per_branch: Vec<(f64, DrivePath)> = specs
        .par_iter()
        .map(|s| Ok((analytic_phases(s)?.total, drive_path(s, samples)?)))
        .collect::<Result<_>>()?;
    let mut phases = [0.0; 4];
    let mut drive_parameters = [0.0; 4];
    let mut paths = Vec::with_capacity(4);
    for (k, (phase, path)) in per_branch.into_iter().enumerate() {
        phases[k] = phase;
        drive_parameters[k] = specs[k].strength();
        paths.push(path);
    }
    Ok(SigmaZGate {
        gate: GateMatrix::from_diagonal_phases(phases),
        phases,
        drive_parameters,
        paths,
    })
}

/// Force `F` such that `F↑ = −F↓ = F` on both ions gives the driven branches
/// of `mode` unit drive parameter, hence a π/2 phase between parallel and
/// anti-parallel spins: `F = δ/(√2 x_mode0)`.
pub fn calibrated_force(modes: &NormalModes, detuning: f64, mode: Mode) -> f64 {
    detuning.abs() / (2.0 * modes.coupling_width(mode))
}

/// Per-branch Schrödinger integration of the σz gate.
#[derive(Clone, Debug)]
pub struct DynamicGate {
    /// Motional state of each branch at `τ_g`, starting from `|0⟩`.
    pub branch_states: Vec<StateVector>,
    /// `arg⟨0|ψ_s⟩` per branch.
    pub phases: [f64; 4],
    /// `|⟨0|ψ_s⟩|²` per branch.
    pub ground_populations: [f64; 4],
    pub cutoff: usize,
    /// Columns are the branch spin states in the measurement basis.
    pub basis: ComplexMatrix,
}

impl DynamicGate {
    /// Evolves `spins ⊗ |0⟩` into `Σ_s ⟨s|spins⟩ |s⟩ ⊗ |ψ_s⟩`, where `|s⟩`
    /// runs over the columns of `basis`. Spins are outermost.
    pub fn apply(&self, spins: &StateVector) -> Result<StateVector> {
        if spins.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                actual: spins.dim(),
            });
        }
        let c = self.basis.adjoint().apply(spins)?;
        let k = self.cutoff;
        let mut out = vec![C64::new(0.0, 0.0); 4 * k];
        for (s, psi) in self.branch_states.iter().enumerate() {
            for r in 0..4 {
                let w = self.basis[(r, s)] * c.amplitude(s);
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for (m, a) in psi.amplitudes().iter().enumerate() {
                    out[r * k + m] += w * a;
                }
            }
        }
        Ok(StateVector::new(out))
    }

    /// Spin-space action with motion projected on `|0⟩`,
    /// `basis · diag(⟨0|ψ_s⟩) · basis†`.
    pub fn spin_matrix(&self) -> ComplexMatrix {
        let d: Vec<C64> = self.branch_states.iter().map(|p| p.amplitude(0)).collect();
        &(&self.basis * &ComplexMatrix::from_diagonal(&d)) * &self.basis.adjoint()
    }
}

/// Integrates the four branches of [`sigma_z_gate`] with `steps` steps of
/// the driven-oscillator integrator in a `cutoff`-level mode.
pub fn sigma_z_gate_dynamic(
    pattern: &ForcePattern,
    modes: &NormalModes,
    detuning: f64,
    mode: Mode,
    cutoff: usize,
    steps: usize,
) -> Result<DynamicGate> {
    let specs = branch_drives(pattern, modes, detuning, mode)?;
    let runs: Vec<(StateVector, f64)> = specs
        .par_iter()
        .map(|s| integrate_driven(s, cutoff, steps))
        .collect::<Result<_>>()?;
    let mut phases = [0.0; 4];
    let mut ground_populations = [0.0; 4];
    let mut branch_states = Vec::with_capacity(4);
    for (k, (psi, phase)) in runs.into_iter().enumerate() {
        phases[k] = phase;
        ground_populations[k] = psi.amplitude(0).norm_sqr();
        branch_states.push(psi);
    }
    Ok(DynamicGate {
        branch_states,
        phases,
        ground_populations,
        cutoff,
        basis: ComplexMatrix::identity(4),
    })
}

/// `|±φ⟩ = (|↑⟩ ± e^{iφ}|↓⟩)/√2`, the eigenstates of `cos φ σx + sin φ σy`,
/// as the columns of a unitary.
pub fn equatorial_basis(phi: f64) -> ComplexMatrix {
    let e = C64::from_polar(FRAC_1_SQRT_2, phi);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_row_major(2, 2, vec![h, h, e, -e]).expect("2x2")
}

/// Phase gate in the `|±φ⟩⊗|±φ⟩` basis, returned in the measurement basis.
///
/// Forces `±F` act on `|±φ⟩` and drive the cm mode, so parallel states are
/// displaced with drive parameter `drive_parameter` and anti-parallel ones
/// stay put. A unit drive parameter gives the collective spin flip.
pub fn sigma_phi_gate(phi: f64, drive_parameter: f64, modes: &NormalModes) -> Result<GateMatrix> {
    let (pattern, detuning) = sigma_phi_drive(phi, drive_parameter, modes)?;
    let phases = if drive_parameter == 0.0 {
        [0.0; 4]
    } else {
        sigma_z_gate_sampled(&pattern, modes, detuning, Mode::Cm, 2)?.phases
    };
    let bb = two_qubit_equatorial_basis(phi);
    let diag = GateMatrix::from_diagonal_phases(phases);
    GateMatrix::new(&(&bb * diag.matrix()) * &bb.adjoint())
}

/// Time-domain counterpart of [`sigma_phi_gate`]: the four `|±φ⟩⊗|±φ⟩`
/// branches integrated with the driven-oscillator integrator.
pub fn sigma_phi_gate_dynamic(
    phi: f64,
    drive_parameter: f64,
    modes: &NormalModes,
    cutoff: usize,
    steps: usize,
) -> Result<DynamicGate> {
    let (pattern, detuning) = sigma_phi_drive(phi, drive_parameter, modes)?;
    let mut gate = sigma_z_gate_dynamic(&pattern, modes, detuning, Mode::Cm, cutoff, steps)?;
    gate.basis = two_qubit_equatorial_basis(phi);
    Ok(gate)
}

fn sigma_phi_drive(phi: f64, drive_parameter: f64, modes: &NormalModes) -> Result<(ForcePattern, f64)> {
    if !phi.is_finite() || !drive_parameter.is_finite() {
        return Err(invalid("phi and drive parameter must be finite"));
    }
    // Only F/δ matters; fix δ and solve for F.
    let detuning = 0.1 * modes.cm_frequency;
    let f = drive_parameter * detuning / (2.0 * modes.coupling_width(Mode::Cm));
    Ok((ForcePattern::uniform(f, -f), detuning))
}

fn two_qubit_equatorial_basis(phi: f64) -> ComplexMatrix {
    let b = equatorial_basis(phi);
    kron(&b, &b).expect("4x4")
}

/// Largest overlap with a Bell state, optimized over per-qubit z phases.
///
/// Accepts a bare 4-dim spin state or a spin ⊗ motion state with the spins
/// outermost. In the latter case the spin state must be pure to within
/// `1e−6` once motion is traced out.
pub fn bell_fidelity(state: &StateVector) -> Result<f64> {
    let spins = reduce_to_spins(state)?;
    let p: Vec<f64> = spins.amplitudes().iter().map(|a| a.norm()).collect();
    let norm = spins.norm_sqr();
    let parallel = (p[0] + p[3]).powi(2) / 2.0;
    let antiparallel = (p[1] + p[2]).powi(2) / 2.0;
    Ok(parallel.max(antiparallel) / norm)
}

fn reduce_to_spins(state: &StateVector) -> Result<StateVector> {
    let dim = state.dim();
    if dim == 4 {
        return Ok(state.clone());
    }
    if dim == 0 || dim % 4 != 0 {
        return Err(invalid(format!("two-spin state dimension must be a multiple of 4, got {dim}")));
    }
    let k = dim / 4;
    let amps = state.amplitudes();
    let rho = ComplexMatrix::from_fn(4, 4, |i, j| (0..k).map(|m| amps[i * k + m] * amps[j * k + m].conj()).sum());
    let tr = rho.trace().re;
    let purity = (&rho * &rho).trace().re / (tr * tr);
    if purity < 1.0 - 1e-6 {
        return Err(invalid(format!("spins are entangled with motion: purity {purity}")));
    }
    let eig = HermitianEigen::new(&rho)?;
    let top = eig
        .eigenvalues()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("4 eigenvalues");
    Ok(eig.eigenvector(top))
}

/// `diag(1, e^{iφ})`, the z rotation relating the σφ gates for different φ.
pub fn z_phase(phi: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[ONE, C64::from_polar(1.0, phi)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(k: usize) -> StateVector {
        StateVector::basis(4, k)
    }

    #[test]
    fn stretch_mode_is_root_three_faster() {
        let m = normal_modes(1.0, 1.0).unwrap();
        assert!((m.st_frequency / m.cm_frequency - 3f64.sqrt()).abs() < 1e-12);
        assert!((m.st_frequency - 1.7320508075688772).abs() < 1e-15);
        assert!((m.st_width - 3f64.powf(-0.25)).abs() < 1e-15);
        assert!(normal_modes(0.0, 1.0).is_err());
        assert!(normal_modes(1.0, -1.0).is_err());
    }

    #[test]
    fn mode_forces_add_or_subtract() {
        let m = normal_modes(1.0, 1.0).unwrap();
        assert_eq!(m.mode_force(Mode::Cm, [0.3, 0.5]), 0.8);
        assert_eq!(m.mode_force(Mode::St, [0.3, 0.5]), -0.2);
        assert_eq!(m.mode_force(Mode::St, [0.4, 0.4]), 0.0);
    }

    #[test]
    fn cnot_swaps_last_two_amplitudes() {
        let v = StateVector::new(vec![
            C64::new(0.1, 0.0),
            C64::new(0.2, 0.3),
            C64::new(0.4, 0.0),
            C64::new(0.0, 0.5),
        ]);
        let out = cnot().apply(&v).unwrap();
        assert_eq!(out.amplitudes(), &[v.amplitude(0), v.amplitude(1), v.amplitude(3), v.amplitude(2)]);
        let sq = cnot().compose(&cnot());
        assert_eq!(sq.matrix().max_abs_diff(&ComplexMatrix::identity(4)), 0.0);
    }

    #[test]
    fn toffoli_acts_only_when_both_controls_up() {
        let t = toffoli(&pauli::sigma_x()).unwrap();
        for controls in 0..4 {
            for target in 0..2 {
                let out = t.apply(&StateVector::basis(8, 2 * controls + target)).unwrap();
                let expect = if controls == 0 { 1 - target } else { target };
                assert_eq!(out.amplitude(2 * controls + expect), ONE);
            }
        }
        assert!(toffoli(&ComplexMatrix::identity(3)).is_err());
        assert!(toffoli(&ComplexMatrix::identity(2).scale_real(2.0)).is_err());
    }

    #[test]
    fn hadamard_forms() {
        let r = FRAC_1_SQRT_2;
        let decomposed = ComplexMatrix::from_real_rows(&[&[-r, r], &[r, r]]);
        assert!(hadamard_paper().max_abs_diff(&decomposed) < 1e-15);
        let std = ComplexMatrix::from_real_rows(&[&[r, r], &[r, -r]]);
        assert!(hadamard_standard().max_abs_diff(&std) < 1e-15);
    }

    #[test]
    fn fixed_gates() {
        assert_eq!(phase_gate_pi().apply(&basis(3)).unwrap().amplitude(3), -ONE);
        let half = phase_gate_pi_half();
        assert_eq!(half.matrix()[(1, 1)], ONE);
        assert_eq!(half.matrix()[(0, 0)], -I);
        let sm = sm_gate();
        assert!(sm.matrix().unitarity_deviation() < 1e-12);
        let flipped = sm.apply(&basis(3)).unwrap();
        assert!((flipped.amplitude(0).norm_sqr() - 0.5).abs() < 1e-15);
        let twice = sm.apply(&flipped).unwrap();
        assert!((twice.amplitude(0).norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn basis_change_chain() {
        let r = basis_change_check();
        assert!(r.sm_max_deviation < 1e-12, "{r:?}");
        assert!(r.sm_global_phase.abs() < 1e-12);
        assert!(r.pi_half_max_deviation < 1e-12);
        assert!(r.sandwich_standard_deviation < 1e-15);
        assert!(r.sm_residual < 1e-12);
        assert_eq!(r.sandwich_decomposed_diagonal.map(|x| x.round()), [1.0, 1.0, -1.0, 1.0]);
        assert!((r.sandwich_decomposed_deviation - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_suite_passes() {
        let suite = identity_suite();
        for c in &suite {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(suite.len(), 9);
    }

    #[test]
    fn bell_fidelity_examples() {
        let h = FRAC_1_SQRT_2;
        let s = StateVector::new(vec![C64::new(0.0, h), ZERO_C, ZERO_C, C64::new(h, 0.0)]);
        assert!((bell_fidelity(&s).unwrap() - 1.0).abs() < 1e-15);
        assert!((bell_fidelity(&basis(3)).unwrap() - 0.5).abs() < 1e-15);
        let sm = sm_gate().apply(&basis(3)).unwrap();
        assert!((bell_fidelity(&sm).unwrap() - 1.0).abs() < 1e-12);
        assert!(bell_fidelity(&StateVector::basis(6, 0)).is_err());
    }

    const ZERO_C: C64 = C64::new(0.0, 0.0);

    #[test]
    fn bell_fidelity_rejects_spin_motion_entanglement() {
        // (|↑↑⟩|0⟩ + |↓↓⟩|1⟩)/√2
        let mut amps = vec![ZERO_C; 8];
        amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        amps[7] = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(bell_fidelity(&StateVector::new(amps)).is_err());
        // Bell state times |1⟩ is fine.
        let mut amps = vec![ZERO_C; 8];
        amps[1] = C64::new(FRAC_1_SQRT_2, 0.0);
        amps[7] = C64::new(0.0, FRAC_1_SQRT_2);
        assert!((bell_fidelity(&StateVector::new(amps)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_json_round_trip() {
        let g = sm_gate();
        let text = g.to_json();
        assert!(text.contains("\"basis\""));
        assert!(text.contains("↑↓"));
        let back = GateMatrix::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert!(GateMatrix::from_json(&text.replace("↑↓", "ud")).is_err());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["matrix"][0][3][1].as_f64().unwrap(), g.matrix()[(0, 3)].im);
    }

    #[test]
    fn gate_matrix_rejects_non_unitary() {
        assert!(GateMatrix::new(ComplexMatrix::identity(4).scale_real(1.001)).is_err());
        assert!(GateMatrix::new(ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn opposite_forces_on_stretch_mode() {
        let modes = normal_modes(1.0, 1.0).unwrap();
        let delta = 0.05;
        let f = calibrated_force(&modes, delta, Mode::St);
        assert!((f - delta / (2f64.sqrt() * modes.st_width)).abs() < 1e-15);
        let g = sigma_z_gate(&ForcePattern::uniform(f, -f), &modes, delta, Mode::St).unwrap();
        assert_eq!(g.phases[0], 0.0);
        assert_eq!(g.phases[3], 0.0);
        assert!((g.phases[1] - PI / 2.0).abs() < 1e-12);
        assert!((g.phases[2] - PI / 2.0).abs() < 1e-12);
        assert!((g.drive_parameters[1].abs() - 1.0).abs() < 1e-12);
        let (_, dev) = g.gate.matrix().global_phase_distance(phase_gate_pi_half().matrix());
        assert!(dev < 1e-12);
        assert_eq!(g.paths.len(), 4);
    }

    #[test]
    fn equal_forces_give_global_phase() {
        let modes = normal_modes(1.0, 1.0).unwrap();
        let g = sigma_z_gate(&ForcePattern::uniform(0.03, 0.03), &modes, 0.1, Mode::Cm).unwrap();
        let (_, dev) = g.gate.matrix().global_phase_distance(&ComplexMatrix::identity(4));
        assert!(dev < 1e-12);
        let g = sigma_z_gate(&ForcePattern::uniform(0.03, 0.03), &modes, 0.1, Mode::St).unwrap();
        assert_eq!(g.gate.matrix().max_abs_diff(&ComplexMatrix::identity(4)), 0.0);
    }

    #[test]
    fn light_shift_forces() {
        let p = ForcePattern::from_light_shifts(LightShiftInputs {
            up_plus: 0.2,
            up_minus: -0.1,
            down_plus: -0.1,
            down_minus: 0.2,
            delta_k: 2.0,
        })
        .unwrap();
        assert!((p.force_up[0] - 0.3).abs() < 1e-15);
        assert!((p.force_down[1] + 0.3).abs() < 1e-15);
        assert!(p.derivation.is_some());
    }

    #[test]
    fn sigma_phi_calibrated_flip() {
        let modes = normal_modes(1.0, 1.0).unwrap();
        let g = sigma_phi_gate(0.0, 1.0, &modes).unwrap();
        let once = g.apply(&basis(3)).unwrap();
        assert!((once.amplitude(3).norm_sqr() - 0.5).abs() < 1e-9);
        assert!((once.amplitude(0).norm_sqr() - 0.5).abs() < 1e-9);
        let twice = g.apply(&once).unwrap();
        assert!(twice.amplitude(0).norm_sqr() > 1.0 - 1e-9);
        let zero = sigma_phi_gate(0.7, 0.0, &modes).unwrap();
        assert!(zero.matrix().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn degenerate_gate_inputs() {
        let modes = normal_modes(1.0, 1.0).unwrap();
        let p = ForcePattern::uniform(0.1, -0.1);
        assert!(sigma_z_gate(&p, &modes, 0.0, Mode::St).is_err());
        assert!(sigma_z_gate(&ForcePattern::uniform(f64::NAN, 0.0), &modes, 0.1, Mode::St).is_err());
        assert!(sigma_phi_gate(f64::INFINITY, 1.0, &modes).is_err());
    }
}

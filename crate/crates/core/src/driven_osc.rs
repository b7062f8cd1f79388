//! Off-resonantly driven harmonic oscillator: the classical and quantum
//! phase-space loops, displacement-operator algebra, and the split of the
//! acquired phase into dynamic and geometric parts.
//!
//! With the force `F(t) = F₀ cos ωt`, `ω = ω_m − δ`, coupled as `F(t)x`, the
//! interaction-picture drive is `V_I = (F₀x₀/2)(a†e^{iδt} + a e^{−iδt})` and
//! the oscillator follows `α(t) = (g/2)(1 − e^{iδt})` with `g = F₀x₀/δ`. One
//! loop (`t = 2π/|δ|`) returns it to the start with total phase
//! `φ = sign(δ)·(π/2)g²`, dynamic phase `2φ` and geometric phase `−φ`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::qlinalg::{
    ladder_operators, matexp_aih, ComplexMatrix, StateVector, C64, LEAKAGE_ERROR, LEAKAGE_WARN,
};
use crate::report::fmt_g;

const I: C64 = C64::new(0.0, 1.0);

/// A spatially uniform force `F₀ cos((ω_m − δ)t)` on one oscillator mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSpec {
    /// F₀
    pub force_amplitude: f64,
    /// x₀, the ground-state width.
    pub ground_state_width: f64,
    /// δ = ω_m − ω
    pub detuning: f64,
    pub duration: f64,
    /// ω_m, used only by the classical lab-frame solution.
    pub trap_frequency: f64,
}

impl DriveSpec {
    /// One full loop, `duration = 2π/|δ|`, at unit trap frequency.
    pub fn one_loop(force_amplitude: f64, ground_state_width: f64, detuning: f64) -> Self {
        DriveSpec {
            force_amplitude,
            ground_state_width,
            detuning,
            duration: TAU / detuning.abs(),
            trap_frequency: 1.0,
        }
    }

    /// Drive whose strength `F₀x₀/δ` equals `g` over one loop, with `x₀ = 1`.
    pub fn with_strength(g: f64, detuning: f64) -> Self {
        Self::one_loop(g * detuning, 1.0, detuning)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            ("force_amplitude", self.force_amplitude),
            ("ground_state_width", self.ground_state_width),
            ("detuning", self.detuning),
            ("duration", self.duration),
            ("trap_frequency", self.trap_frequency),
        ];
        for (name, v) in vals {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if self.detuning == 0.0 {
            return Err(invalid("detuning must be non-zero (resonant drive diverges)"));
        }
        if self.duration < 0.0 {
            return Err(invalid("duration must be non-negative"));
        }
        if self.ground_state_width <= 0.0 || self.trap_frequency <= 0.0 {
            return Err(invalid("ground_state_width and trap_frequency must be positive"));
        }
        Ok(())
    }

    /// `g = F₀x₀/δ`, signed like δ.
    pub fn strength(&self) -> f64 {
        self.force_amplitude * self.ground_state_width / self.detuning
    }

    /// Time of one closed loop, `2π/|δ|`.
    pub fn loop_time(&self) -> f64 {
        TAU / self.detuning.abs()
    }

    fn coupling(&self, t: f64) -> C64 {
        C64::from_polar(0.5 * self.force_amplitude * self.ground_state_width, self.detuning * t)
    }
}

/// Lab-frame classical solution `(x, p)` starting at rest.
pub fn classical_trajectory(spec: &DriveSpec, mass: f64, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(invalid("mass must be positive"));
    }
    let wm = spec.trap_frequency;
    let w = wm - spec.detuning;
    let denom = w * w - wm * wm;
    Ok(times
        .iter()
        .map(|&t| {
            let x = spec.force_amplitude / mass / denom * ((w * t).cos() - (wm * t).cos());
            let p = spec.force_amplitude / denom * (wm * (wm * t).sin() - w * (w * t).sin());
            (x, p)
        })
        .collect())
}

/// Classical `(x, p)` mapped to the frame rotating at ω_m:
/// `α = (x/2x₀ + i p x₀) e^{iω_m t}`.
pub fn classical_rotating_frame(spec: &DriveSpec, mass: f64, times: &[f64]) -> Result<Vec<C64>> {
    let x0 = spec.ground_state_width;
    Ok(classical_trajectory(spec, mass, times)?
        .into_iter()
        .zip(times)
        .map(|((x, p), &t)| C64::new(x / (2.0 * x0), p * x0) * C64::from_polar(1.0, spec.trap_frequency * t))
        .collect())
}

/// `α(t) = (F₀x₀/2δ)(1 − e^{iδt})`.
pub fn rotating_frame_path(spec: &DriveSpec, times: &[f64]) -> Result<Vec<C64>> {
    spec.validate()?;
    let r = spec.strength() / 2.0;
    Ok(times
        .iter()
        .map(|&t| r * (C64::new(1.0, 0.0) - C64::from_polar(1.0, spec.detuning * t)))
        .collect())
}

/// Area `S = π(F₀x₀/2δ)²` of the loop.
pub fn phase_space_area(spec: &DriveSpec) -> Result<f64> {
    spec.validate()?;
    let r = spec.strength() / 2.0;
    Ok(PI * r * r)
}

/// Closed-loop phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phases {
    pub total: f64,
    pub dynamic: f64,
    pub geometric: f64,
}

/// `(φ, 2φ, −φ)` with `φ = sign(δ)(π/2)(F₀x₀/δ)² = ±2S`.
pub fn analytic_phases(spec: &DriveSpec) -> Result<Phases> {
    spec.validate()?;
    let closes = (spec.duration - spec.loop_time()).abs() <= 1e-9 * spec.loop_time();
    if !closes {
        return Err(invalid(format!(
            "closed-loop phases need duration 2π/|δ| = {}, got {}",
            spec.loop_time(),
            spec.duration
        )));
    }
    let g = spec.strength();
    let phi = spec.detuning.signum() * PI / 2.0 * g * g;
    Ok(Phases {
        total: phi,
        dynamic: 2.0 * phi,
        geometric: -phi,
    })
}

/// `D(α)D(β) = e^{i Im(αβ̄)} D(α+β)`: returns `(α+β, Im(αβ̄))`.
pub fn compose_displacements(alpha: C64, beta: C64) -> (C64, f64) {
    (alpha + beta, (alpha * beta.conj()).im)
}

/// Minimum cutoff accepted by [`displacement_matrix`].
pub fn min_displacement_cutoff(alpha: C64) -> usize {
    (4.0 * (1.0 + alpha.norm_sqr())).ceil() as usize
}

/// `D(α) = exp(αa† − ᾱa)` on a truncated oscillator.
pub fn displacement_matrix(alpha: C64, cutoff: usize) -> Result<ComplexMatrix> {
    let need = min_displacement_cutoff(alpha);
    if cutoff < need {
        return Err(invalid(format!("cutoff {cutoff} is too small for |α| = {}; need ≥ {need}", alpha.norm())));
    }
    let (a, ad) = ladder_operators(cutoff)?;
    // αa† − ᾱa = −iH with H = i(αa† − ᾱa) Hermitian.
    let h = (&ad.scale(alpha) - &a.scale(alpha.conj())).scale(I);
    matexp_aih(&h, 1.0)
}

/// `⟨α|β⟩ = exp(−(|α|² + |β|²)/2 + ᾱβ)`.
pub fn coherent_overlap(alpha: C64, beta: C64) -> C64 {
    (-(alpha.norm_sqr() + beta.norm_sqr()) / 2.0 + alpha.conj() * beta).exp()
}

/// A sampled oscillator loop with its numerically integrated phases.
#[derive(Clone, Debug, PartialEq)]
pub struct DrivePath {
    pub times: Vec<f64>,
    pub alphas: Vec<C64>,
    /// Running dynamic phase at each sample.
    pub cum_dynamic: Vec<f64>,
    /// Running geometric phase at each sample.
    pub cum_geometric: Vec<f64>,
    pub dynamic_phase: f64,
    pub geometric_phase: f64,
    pub total_phase: f64,
    /// Signed enclosed area, positive for counter-clockwise loops.
    pub enclosed_area: f64,
}

impl DrivePath {
    /// Builds the path from samples of `α(t)`, integrating both phases.
    pub fn from_samples(spec: &DriveSpec, times: Vec<f64>, alphas: Vec<C64>) -> Result<Self> {
        if times.len() != alphas.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                actual: alphas.len(),
            });
        }
        if times.len() < 2 {
            return Err(invalid("a path needs at least two samples"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("sample times must be strictly increasing"));
        }
        let fx = spec.force_amplitude * spec.ground_state_width;
        let energy = |t: f64, a: C64| -> f64 { -fx * (a.conj() * C64::from_polar(1.0, spec.detuning * t)).re };
        let mut cum_dynamic = vec![0.0];
        let mut cum_geometric = vec![0.0];
        let mut twice_area = 0.0;
        for k in 1..times.len() {
            let dt = times[k] - times[k - 1];
            let dyn_step = 0.5 * dt * (energy(times[k - 1], alphas[k - 1]) + energy(times[k], alphas[k]));
            let winding = (alphas[k - 1].conj() * (alphas[k] - alphas[k - 1])).im;
            cum_dynamic.push(cum_dynamic[k - 1] + dyn_step);
            cum_geometric.push(cum_geometric[k - 1] - winding);
            twice_area += winding;
        }
        let dynamic_phase = *cum_dynamic.last().expect("non-empty");
        let geometric_phase = *cum_geometric.last().expect("non-empty");
        Ok(DrivePath {
            times,
            alphas,
            cum_dynamic,
            cum_geometric,
            dynamic_phase,
            geometric_phase,
            total_phase: dynamic_phase + geometric_phase,
            enclosed_area: twice_area / 2.0,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub const CSV_HEADER: &'static str = "time,re_alpha,im_alpha,cum_dynamic,cum_geometric";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for k in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_g(self.times[k]),
                fmt_g(self.alphas[k].re),
                fmt_g(self.alphas[k].im),
                fmt_g(self.cum_dynamic[k]),
                fmt_g(self.cum_geometric[k])
            );
        }
        out
    }
}

/// `samples` uniform points of the analytic loop over `[0, duration]`.
pub fn drive_path(spec: &DriveSpec, samples: usize) -> Result<DrivePath> {
    spec.validate()?;
    if samples < 2 {
        return Err(invalid("at least two samples are required"));
    }
    let times: Vec<f64> = (0..samples)
        .map(|k| spec.duration * k as f64 / (samples - 1) as f64)
        .collect();
    let alphas = rotating_frame_path(spec, &times)?;
    DrivePath::from_samples(spec, times, alphas)
}

/// Numerically integrated `(dynamic, geometric)` phases of a path: the
/// trapezoid rule on `−⟨α|V_I|α⟩`, and `−Σ Im(ᾱ_k Δα_k)`.
pub fn numeric_phases(path: &DrivePath) -> (f64, f64) {
    (path.dynamic_phase, path.geometric_phase)
}

/// Result of a Schrödinger integration of the driven oscillator.
#[derive(Clone, Debug)]
pub struct DrivenRun {
    pub state: StateVector,
    /// `arg⟨0|ψ⟩` at the final time.
    pub total_phase: f64,
    pub times: Vec<f64>,
    /// `⟨a⟩` at each time, in the interaction picture.
    pub mean_a: Vec<C64>,
}

/// Integrates `i dψ/dt = V_I(t) ψ` from `|0⟩` over `spec.duration` and
/// returns the final state and `arg⟨0|ψ⟩`.
pub fn integrate_driven(spec: &DriveSpec, cutoff: usize, steps: usize) -> Result<(StateVector, f64)> {
    let run = integrate_driven_trace(spec, cutoff, steps)?;
    Ok((run.state, run.total_phase))
}

/// As [`integrate_driven`], also recording `⟨a⟩` after every step.
///
/// Each step applies `exp(−iV_I(t_mid)dt)` exactly. Writing
/// `V = |c|(e^{iθ}a† + e^{−iθ}a) = |c| R X R†` with `R = e^{iθa†a}` and
/// `X = a + a†`, the exponential is diagonal in the eigenbasis of `X`,
/// so a step costs O(cutoff²).
pub fn integrate_driven_trace(spec: &DriveSpec, cutoff: usize, steps: usize) -> Result<DrivenRun> {
    spec.validate()?;
    if cutoff < 2 {
        return Err(invalid("cutoff must be at least 2"));
    }
    let loops = spec.duration / spec.loop_time();
    let required = ((100.0 * loops) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    if steps < required {
        return Err(Error::StepSize { steps, required });
    }
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
    let xk = eig.eigenvalues.clone();
    let mut w = eig.eigenvectors;
    for _ in 0..3 {
        let wtw = w.transpose() * &w;
        w = &w * (DMatrix::<f64>::identity(cutoff, cutoff) * 3.0 - wtw) * 0.5;
    }

    let mut psi = vec![C64::new(0.0, 0.0); cutoff];
    psi[0] = C64::new(1.0, 0.0);
    let mut y = vec![C64::new(0.0, 0.0); cutoff];
    let mut times = Vec::with_capacity(steps + 1);
    let mut mean_a = Vec::with_capacity(steps + 1);
    times.push(0.0);
    mean_a.push(C64::new(0.0, 0.0));
    let mut worst_leak: f64 = 0.0;
    for step in 0..steps {
        let c = spec.coupling((step as f64 + 0.5) * dt);
        let (mag, theta) = (c.norm(), c.arg());
        // R† = e^{−iθn}
        for (n, a) in psi.iter_mut().enumerate() {
            *a *= C64::from_polar(1.0, -theta * n as f64);
        }
        for k in 0..cutoff {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..cutoff {
                acc += psi[n] * w[(n, k)];
            }
            y[k] = acc * C64::from_polar(1.0, -mag * xk[k] * dt);
        }
        for n in 0..cutoff {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..cutoff {
                acc += y[k] * w[(n, k)];
            }
            psi[n] = acc * C64::from_polar(1.0, theta * n as f64);
        }
        let leak = psi[cutoff - 1].norm_sqr() + psi[cutoff - 2].norm_sqr();
        worst_leak = worst_leak.max(leak);
        if leak > LEAKAGE_ERROR {
            return Err(Error::Leakage {
                population: leak,
                threshold: LEAKAGE_ERROR,
            });
        }
        times.push((step + 1) as f64 * dt);
        mean_a.push((1..cutoff).map(|n| psi[n - 1].conj() * psi[n] * (n as f64).sqrt()).sum());
    }
    if worst_leak > LEAKAGE_WARN {
        log::warn!("driven oscillator leakage reached {worst_leak:e}; consider a larger cutoff");
    }
    let total_phase = psi[0].arg();
    Ok(DrivenRun {
        state: StateVector::new(psi),
        total_phase,
        times,
        mean_a,
    })
}

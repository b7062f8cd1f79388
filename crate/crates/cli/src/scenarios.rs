//! One runner per scenario, each turning a validated config into an
//! [`Output`].

use iontrap_core::driven_osc::{analytic_phases, drive_path, DrivePath, DriveSpec};
use iontrap_core::ion_species;
use iontrap_core::qlinalg::{Spin, SpinFockSpace, StateVector};
use iontrap_core::spin_motion::{
    model_rabi_frequency, nutation_curve, sideband_spectrum, thermal_nutation_curve, thermal_populations,
    CouplingModel, PulseSpec, Sideband,
};
use iontrap_core::twoqubit::{
    bell_fidelity, calibrated_force, identity_suite, normal_modes, sigma_phi_gate, sigma_phi_gate_dynamic,
    sigma_z_gate_dynamic, sigma_z_gate_sampled, ForcePattern, Mode, NormalModes, BASIS_LABELS,
};
use iontrap_core::{Error, Result};
use serde_json::{json, Value};

use crate::config::{Scenario, ScenarioConfig};
use crate::emit::{Cell, Output};

/// Steps per loop for the time-domain gate checks.
pub const GATE_CHECK_STEPS: usize = 4000;

/// Thermal weights below this are dropped.
const THERMAL_FLOOR: f64 = 1e-12;

pub fn execute(cfg: &ScenarioConfig) -> Result<Output> {
    match cfg.scenario {
        Scenario::Nutation => nutation(cfg),
        Scenario::Spectrum => spectrum(cfg),
        Scenario::DrivenPath => driven_path(cfg),
        Scenario::SigmaZGate => sigma_z(cfg),
        Scenario::SigmaPhiGate => sigma_phi(cfg),
        Scenario::Identities => Ok(identities()),
        Scenario::Species => species(cfg),
    }
}

fn pulse(cfg: &ScenarioConfig) -> PulseSpec {
    let coupling = match cfg.text("coupling", "exact") {
        "idealized" => CouplingModel::Idealized,
        _ => CouplingModel::Exact,
    };
    let mut spec = PulseSpec::new(cfg.number("rabi", 1.0), cfg.number("lamb_dicke", 0.0))
        .with_detuning(cfg.number("detuning", 0.0))
        .with_phase(cfg.number("phase", 0.0))
        .with_coupling(coupling);
    spec.trap_frequency = cfg.number("trap_frequency", 1.0);
    spec
}

fn initial_state(cfg: &ScenarioConfig, space: &SpinFockSpace) -> Result<(Spin, usize, StateVector)> {
    let spin = if cfg.text("initial_spin", "down") == "up" { Spin::Up } else { Spin::Down };
    let n = cfg.integer("initial_fock", 0) as usize;
    if n + 2 >= cfg.fock_cutoff {
        return Err(Error::InvalidArgument(format!(
            "initial_fock {n} needs fockCutoff above {}",
            n + 2
        )));
    }
    Ok((spin, n, space.basis_state(&[spin], &[n])?))
}

fn series(rows: Vec<(f64, f64)>) -> Vec<Vec<Cell>> {
    rows.into_iter().map(|(a, b)| vec![Cell::Num(a), Cell::Num(b)]).collect()
}

fn nutation(cfg: &ScenarioConfig) -> Result<Output> {
    let space = SpinFockSpace::single(cfg.fock_cutoff)?;
    let s = cfg.integer("sideband", 0) as i32;
    let mut spec = pulse(cfg);
    let (spin, n, initial) = initial_state(cfg, &space)?;
    spec.duration = match cfg.number_opt("pulse_area") {
        Some(area) => {
            // |↓,n⟩ couples to |↑,n+s⟩ and |↑,n⟩ to |↓,n−s⟩.
            let order = if spin == Spin::Down { s } else { -s };
            let rate = model_rabi_frequency(&spec, n, order)?;
            if rate == 0.0 {
                return Err(Error::InvalidArgument("pulse_area given but the transition has zero coupling".into()));
            }
            area / rate
        }
        None => cfg.number("duration", 0.0),
    };
    spec.validate()?;
    let curve = match cfg.number_opt("mean_phonons") {
        Some(nbar) => {
            let mut weights = thermal_populations(nbar, cfg.fock_cutoff);
            let keep = cfg.fock_cutoff - 3;
            let tail: f64 = weights[keep..].iter().sum();
            if tail > iontrap_core::qlinalg::LEAKAGE_ERROR {
                return Err(Error::Leakage {
                    population: tail,
                    threshold: iontrap_core::qlinalg::LEAKAGE_ERROR,
                });
            }
            weights.truncate(keep);
            for w in weights.iter_mut().filter(|w| **w < THERMAL_FLOOR) {
                *w = 0.0;
            }
            thermal_nutation_curve(&spec, Sideband(s), &space, spin, &weights, cfg.samples)?
        }
        None => nutation_curve(&spec, Sideband(s), &space, &initial, cfg.samples)?,
    };
    Ok(Output::table("nutation", &["time", "p_up"], series(curve)).with_extra("duration", json!(spec.duration)))
}

fn spectrum(cfg: &ScenarioConfig) -> Result<Output> {
    let space = SpinFockSpace::single(cfg.fock_cutoff)?;
    let mut spec = pulse(cfg);
    spec.duration = cfg.number("duration", 0.0);
    let (_, _, initial) = initial_state(cfg, &space)?;
    let (lo, hi) = (cfg.number("detuning_min", 0.0), cfg.number("detuning_max", 0.0));
    let k = cfg.samples;
    let grid: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let curve = sideband_spectrum(&spec, &space, &initial, &grid)?;
    Ok(Output::table("spectrum", &["detuning", "p_up"], series(curve)))
}

fn path_rows(path: &DrivePath) -> Vec<Vec<Cell>> {
    (0..path.len())
        .map(|k| {
            vec![
                Cell::Num(path.times[k]),
                Cell::Num(path.alphas[k].re),
                Cell::Num(path.alphas[k].im),
                Cell::Num(path.cum_dynamic[k]),
                Cell::Num(path.cum_geometric[k]),
            ]
        })
        .collect()
}

fn driven_path(cfg: &ScenarioConfig) -> Result<Output> {
    let spec = DriveSpec {
        trap_frequency: cfg.number("trap_frequency", 1.0),
        ..DriveSpec::one_loop(
            cfg.number("force_amplitude", 0.0),
            cfg.number("ground_state_width", 1.0),
            cfg.number("detuning", 1.0),
        )
    };
    let path = drive_path(&spec, cfg.samples)?;
    let exact = analytic_phases(&spec)?;
    let columns: Vec<&str> = DrivePath::CSV_HEADER.split(',').collect();
    Ok(Output::table("driven_path", &columns, path_rows(&path))
        .with_extra("drive_parameter", json!(spec.strength()))
        .with_extra(
            "phases",
            json!({
                "total": path.total_phase,
                "dynamic": path.dynamic_phase,
                "geometric": path.geometric_phase,
                "enclosed_area": path.enclosed_area,
                "analytic_total": exact.total,
                "analytic_dynamic": exact.dynamic,
                "analytic_geometric": exact.geometric,
            }),
        ))
}

fn modes(cfg: &ScenarioConfig) -> Result<NormalModes> {
    normal_modes(cfg.number("trap_frequency", 1.0), cfg.number("ground_state_width", 1.0))
}

fn sigma_z(cfg: &ScenarioConfig) -> Result<Output> {
    let modes = modes(cfg)?;
    let mode = if cfg.text("mode", "st") == "cm" { Mode::Cm } else { Mode::St };
    let detuning = cfg.number("detuning", 1.0);
    let pattern = match (cfg.pair("force_up"), cfg.pair("force_down")) {
        (Some(up), Some(down)) => ForcePattern {
            force_up: up,
            force_down: down,
            derivation: None,
        },
        _ => {
            let f = calibrated_force(&modes, detuning, mode);
            ForcePattern::uniform(f, -f)
        }
    };
    let gate = sigma_z_gate_sampled(&pattern, &modes, detuning, mode, cfg.samples)?;
    let check = sigma_z_gate_dynamic(&pattern, &modes, detuning, mode, cfg.fock_cutoff, GATE_CHECK_STEPS)?;
    let paths: Vec<Value> = gate
        .paths
        .iter()
        .zip(BASIS_LABELS)
        .map(|(p, label)| {
            json!({
                "branch": label,
                "total_phase": p.total_phase,
                "enclosed_area": p.enclosed_area,
            })
        })
        .collect();
    Ok(Output::gate("sigma_z_gate", &BASIS_LABELS, gate.gate.matrix())
        .with_extra("force_up", json!(pattern.force_up))
        .with_extra("force_down", json!(pattern.force_down))
        .with_extra("phases", json!(gate.phases))
        .with_extra("drive_parameters", json!(gate.drive_parameters))
        .with_extra("branches", Value::Array(paths))
        .with_extra("time_domain_phases", json!(check.phases))
        .with_extra("ground_populations", json!(check.ground_populations)))
}

fn sigma_phi(cfg: &ScenarioConfig) -> Result<Output> {
    let modes = modes(cfg)?;
    let phi = cfg.number("phi", 0.0);
    let g = cfg.number("drive_parameter", 1.0);
    let gate = sigma_phi_gate(phi, g, &modes)?;
    let check = sigma_phi_gate_dynamic(phi, g, &modes, cfg.fock_cutoff, GATE_CHECK_STEPS)?;
    let dd = StateVector::basis(4, 3);
    let analytic_bell = bell_fidelity(&gate.apply(&dd)?)?;
    let dynamic_bell = bell_fidelity(&check.apply(&dd)?)?;
    Ok(Output::gate("sigma_phi_gate", &BASIS_LABELS, gate.matrix())
        .with_extra("phi", json!(phi))
        .with_extra("drive_parameter", json!(g))
        .with_extra("bell_fidelity_from_dd", json!(analytic_bell))
        .with_extra("time_domain_bell_fidelity_from_dd", json!(dynamic_bell))
        .with_extra("ground_populations", json!(check.ground_populations)))
}

fn identities() -> Output {
    let suite = identity_suite();
    let all = suite.iter().all(|c| c.passed);
    let rows = suite
        .iter()
        .map(|c| vec![Cell::from(c.name), Cell::Num(c.deviation), Cell::Num(c.tolerance), Cell::Bool(c.passed)])
        .collect();
    Output::table("identities", &["identity", "deviation", "tolerance", "pass"], rows).with_extra("all_passed", json!(all))
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<Cell>>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, inner, rows);
            }
        }
        Value::Number(n) => rows.push(vec![Cell::from(prefix), Cell::Num(n.as_f64().unwrap_or(f64::NAN))]),
        Value::String(s) => rows.push(vec![Cell::from(prefix), Cell::from(s.as_str())]),
        Value::Bool(b) => rows.push(vec![Cell::from(prefix), Cell::Bool(*b)]),
        Value::Null => {}
        Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), inner, rows);
            }
        }
    }
}

fn species(cfg: &ScenarioConfig) -> Result<Output> {
    let record = ion_species::lookup(cfg.text("name", ""))?;
    let value = serde_json::to_value(&record).map_err(|e| Error::SpeciesData(e.to_string()))?;
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    Ok(Output::table("species", &["field", "value"], rows).with_extra("record", value))
}

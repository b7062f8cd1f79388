//! Scenario configuration: parsing, defaults and validation.
//!
//! Validation walks the raw JSON so that every problem is reported at once,
//! then [`ScenarioConfig::from_value`] builds the typed config.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{Map, Value};

pub const DEFAULT_FOCK_CUTOFF: usize = 50;
pub const DEFAULT_SAMPLES: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Nutation,
    Spectrum,
    DrivenPath,
    SigmaZGate,
    SigmaPhiGate,
    Identities,
    Species,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Nutation,
        Scenario::Spectrum,
        Scenario::DrivenPath,
        Scenario::SigmaZGate,
        Scenario::SigmaPhiGate,
        Scenario::Identities,
        Scenario::Species,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Nutation => "nutation",
            Scenario::Spectrum => "spectrum",
            Scenario::DrivenPath => "driven_path",
            Scenario::SigmaZGate => "sigma_z_gate",
            Scenario::SigmaPhiGate => "sigma_phi_gate",
            Scenario::Identities => "identities",
            Scenario::Species => "species",
        }
    }

    pub fn parse(name: &str) -> Option<Scenario> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn params(self) -> &'static [Param] {
        match self {
            Scenario::Nutation => NUTATION,
            Scenario::Spectrum => SPECTRUM,
            Scenario::DrivenPath => DRIVEN_PATH,
            Scenario::SigmaZGate => SIGMA_Z,
            Scenario::SigmaPhiGate => SIGMA_PHI,
            Scenario::Identities => &[],
            Scenario::Species => SPECIES,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Value constraint of one scenario parameter.
#[derive(Clone, Copy, Debug)]
pub enum Kind {
    /// Finite real in `[min, max]`; `nonzero` additionally excludes 0.
    Number { min: f64, max: f64, nonzero: bool },
    /// Integer in `[min, max]`.
    Integer { min: i64, max: i64 },
    Choice(&'static [&'static str]),
    /// Two finite reals, one per ion.
    Pair,
    Text,
}

#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub name: &'static str,
    pub kind: Kind,
    pub required: bool,
}

const fn num(name: &'static str, min: f64, max: f64, required: bool) -> Param {
    Param {
        name,
        kind: Kind::Number { min, max, nonzero: false },
        required,
    }
}

const fn nonzero(name: &'static str, required: bool) -> Param {
    Param {
        name,
        kind: Kind::Number {
            min: f64::NEG_INFINITY,
            max: f64::INFINITY,
            nonzero: true,
        },
        required,
    }
}

const fn int(name: &'static str, min: i64, max: i64) -> Param {
    Param {
        name,
        kind: Kind::Integer { min, max },
        required: false,
    }
}

const fn choice(name: &'static str, options: &'static [&'static str]) -> Param {
    Param {
        name,
        kind: Kind::Choice(options),
        required: false,
    }
}

const INF: f64 = f64::INFINITY;
const POS: f64 = f64::MIN_POSITIVE;

const NUTATION: &[Param] = &[
    num("rabi", POS, INF, true),
    num("lamb_dicke", 0.0, INF, true),
    num("duration", 0.0, INF, false),
    num("pulse_area", 0.0, INF, false),
    num("detuning", -INF, INF, false),
    num("phase", -INF, INF, false),
    int("sideband", -3, 3),
    choice("coupling", &["exact", "idealized"]),
    int("initial_fock", 0, i64::MAX),
    choice("initial_spin", &["up", "down"]),
    num("mean_phonons", 0.0, INF, false),
    num("trap_frequency", POS, INF, false),
];

const SPECTRUM: &[Param] = &[
    num("rabi", POS, INF, true),
    num("lamb_dicke", 0.0, INF, true),
    num("duration", 0.0, INF, true),
    num("detuning_min", -INF, INF, true),
    num("detuning_max", -INF, INF, true),
    num("phase", -INF, INF, false),
    choice("coupling", &["exact", "idealized"]),
    int("initial_fock", 0, i64::MAX),
    choice("initial_spin", &["up", "down"]),
    num("trap_frequency", POS, INF, false),
];

const DRIVEN_PATH: &[Param] = &[
    num("force_amplitude", -INF, INF, true),
    nonzero("detuning", true),
    num("ground_state_width", POS, INF, false),
    num("trap_frequency", POS, INF, false),
];

const SIGMA_Z: &[Param] = &[
    nonzero("detuning", true),
    choice("mode", &["cm", "st"]),
    Param {
        name: "force_up",
        kind: Kind::Pair,
        required: false,
    },
    Param {
        name: "force_down",
        kind: Kind::Pair,
        required: false,
    },
    num("trap_frequency", POS, INF, false),
    num("ground_state_width", POS, INF, false),
];

const SIGMA_PHI: &[Param] = &[
    num("phi", -INF, INF, false),
    num("drive_parameter", -INF, INF, false),
    num("trap_frequency", POS, INF, false),
    num("ground_state_width", POS, INF, false),
];

const SPECIES: &[Param] = &[Param {
    name: "name",
    kind: Kind::Text,
    required: true,
}];

const TOP_LEVEL: &[&str] = &["scenario", "parameters", "output", "fockCutoff", "samples"];

/// One problem found in a config.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl Issue {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Overrides from the command line, applied before validation.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub fock_cutoff: Option<i64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut Value) {
        let Some(obj) = config.as_object_mut() else {
            return;
        };
        if self.out.is_some() || self.format.is_some() {
            let output = obj.entry("output").or_insert_with(|| Value::Object(Map::new()));
            if let Some(out) = output.as_object_mut() {
                if let Some(p) = &self.out {
                    out.insert("path".into(), Value::String(p.to_string_lossy().into_owned()));
                }
                if let Some(f) = self.format {
                    let name = match f {
                        Format::Csv => "csv",
                        Format::Json => "json",
                    };
                    out.insert("format".into(), Value::String(name.into()));
                }
            }
        }
        if let Some(n) = self.fock_cutoff {
            obj.insert("fockCutoff".into(), Value::from(n));
        }
    }
}

/// Lists every missing, unknown or out-of-range field. Empty means valid.
pub fn validate(config: &Value) -> Vec<Issue> {
    let mut issues = Vec::new();
    let Some(obj) = config.as_object() else {
        issues.push(Issue::new("", "config must be a JSON object"));
        return issues;
    };
    for key in obj.keys() {
        if !TOP_LEVEL.contains(&key.as_str()) {
            issues.push(Issue::new(key.clone(), "unknown field"));
        }
    }

    let scenario = match obj.get("scenario") {
        None => {
            issues.push(Issue::new("scenario", format!("required; one of {}", scenario_list())));
            None
        }
        Some(Value::String(s)) => {
            let parsed = Scenario::parse(s);
            if parsed.is_none() {
                issues.push(Issue::new("scenario", format!("unknown scenario {s:?}; one of {}", scenario_list())));
            }
            parsed
        }
        Some(_) => {
            issues.push(Issue::new("scenario", "must be a string"));
            None
        }
    };

    match obj.get("output") {
        None => issues.push(Issue::new("output.path", "required (or pass --out)")),
        Some(Value::Object(out)) => {
            for key in out.keys() {
                if key != "path" && key != "format" {
                    issues.push(Issue::new(format!("output.{key}"), "unknown field"));
                }
            }
            match out.get("path") {
                Some(Value::String(p)) if !p.is_empty() => {}
                Some(_) => issues.push(Issue::new("output.path", "must be a non-empty string")),
                None => issues.push(Issue::new("output.path", "required (or pass --out)")),
            }
            if let Some(f) = out.get("format") {
                if f.as_str().and_then(Format::parse).is_none() {
                    issues.push(Issue::new("output.format", "must be \"csv\" or \"json\""));
                }
            }
        }
        Some(_) => issues.push(Issue::new("output", "must be an object with path and format")),
    }

    check_count(obj, "fockCutoff", 2, &mut issues);
    check_count(obj, "samples", 2, &mut issues);

    let params = match obj.get("parameters") {
        None => Map::new(),
        Some(Value::Object(p)) => p.clone(),
        Some(_) => {
            issues.push(Issue::new("parameters", "must be an object"));
            Map::new()
        }
    };
    if let Some(s) = scenario {
        check_params(s, &params, &mut issues);
    }
    issues
}

fn scenario_list() -> String {
    Scenario::ALL.map(|s| s.name()).join(", ")
}

fn check_count(obj: &Map<String, Value>, key: &str, min: i64, issues: &mut Vec<Issue>) {
    let Some(v) = obj.get(key) else {
        return;
    };
    match v.as_i64() {
        Some(n) if n >= min => {}
        Some(n) => issues.push(Issue::new(key, format!("out of range: {n} < {min}"))),
        None => issues.push(Issue::new(key, "must be an integer")),
    }
}

fn check_params(scenario: Scenario, params: &Map<String, Value>, issues: &mut Vec<Issue>) {
    let spec = scenario.params();
    for key in params.keys() {
        if !spec.iter().any(|p| p.name == key) {
            issues.push(Issue::new(format!("parameters.{key}"), format!("unknown parameter for {scenario}")));
        }
    }
    for p in spec {
        let field = format!("parameters.{}", p.name);
        match params.get(p.name) {
            None if p.required => issues.push(Issue::new(field, "required")),
            None => {}
            Some(v) => {
                if let Err(msg) = check_kind(p.kind, v) {
                    issues.push(Issue::new(field, msg));
                }
            }
        }
    }
    match scenario {
        Scenario::Nutation => {
            let d = params.contains_key("duration");
            let a = params.contains_key("pulse_area");
            if d == a {
                issues.push(Issue::new("parameters.duration", "give exactly one of duration or pulse_area"));
            }
            if params.contains_key("mean_phonons") && params.contains_key("initial_fock") {
                issues.push(Issue::new("parameters.mean_phonons", "conflicts with initial_fock"));
            }
        }
        Scenario::Spectrum => {
            let lo = params.get("detuning_min").and_then(Value::as_f64);
            let hi = params.get("detuning_max").and_then(Value::as_f64);
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if lo > hi {
                    issues.push(Issue::new("parameters.detuning_min", "must not exceed detuning_max"));
                }
            }
        }
        Scenario::SigmaZGate => {
            if params.contains_key("force_up") != params.contains_key("force_down") {
                issues.push(Issue::new(
                    "parameters.force_up",
                    "give both force_up and force_down, or neither for the calibrated gate",
                ));
            }
        }
        _ => {}
    }
}

fn check_kind(kind: Kind, v: &Value) -> std::result::Result<(), String> {
    match kind {
        Kind::Number { min, max, nonzero } => {
            let x = v.as_f64().ok_or("must be a number")?;
            if !x.is_finite() {
                return Err("must be finite".into());
            }
            if x < min || x > max {
                return Err(format!("out of range: {x} not in [{min}, {max}]"));
            }
            if nonzero && x == 0.0 {
                return Err("must be non-zero".into());
            }
            Ok(())
        }
        Kind::Integer { min, max } => {
            let n = v.as_i64().ok_or("must be an integer")?;
            if n < min || n > max {
                return Err(format!("out of range: {n} not in [{min}, {max}]"));
            }
            Ok(())
        }
        Kind::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Ok(()),
            _ => Err(format!("must be one of {options:?}")),
        },
        Kind::Pair => {
            let arr = v.as_array().filter(|a| a.len() == 2).ok_or("must be an array of two numbers")?;
            if arr.iter().all(|x| x.as_f64().is_some_and(f64::is_finite)) {
                Ok(())
            } else {
                Err("must be an array of two finite numbers".into())
            }
        }
        Kind::Text => match v.as_str() {
            Some(s) if !s.is_empty() => Ok(()),
            _ => Err("must be a non-empty string".into()),
        },
    }
}

/// A validated scenario description.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub parameters: Map<String, Value>,
    pub format: Format,
    pub path: PathBuf,
    pub fock_cutoff: usize,
    pub samples: usize,
}

impl ScenarioConfig {
    /// Validates `config` and builds the typed form.
    pub fn from_value(config: &Value) -> std::result::Result<Self, Vec<Issue>> {
        let issues = validate(config);
        if !issues.is_empty() {
            return Err(issues);
        }
        let obj = config.as_object().expect("validated");
        let out = obj["output"].as_object().expect("validated");
        let count = |key: &str, default: usize| obj.get(key).and_then(Value::as_u64).map_or(default, |n| n as usize);
        Ok(ScenarioConfig {
            scenario: Scenario::parse(obj["scenario"].as_str().expect("validated")).expect("validated"),
            parameters: obj.get("parameters").and_then(Value::as_object).cloned().unwrap_or_default(),
            format: out.get("format").and_then(Value::as_str).and_then(Format::parse).unwrap_or(Format::Csv),
            path: PathBuf::from(out["path"].as_str().expect("validated")),
            fock_cutoff: count("fockCutoff", DEFAULT_FOCK_CUTOFF),
            samples: count("samples", DEFAULT_SAMPLES),
        })
    }

    pub fn number(&self, key: &str, default: f64) -> f64 {
        self.parameters.get(key).and_then(Value::as_f64).unwrap_or(default)
    }

    pub fn number_opt(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).and_then(Value::as_f64)
    }

    pub fn integer(&self, key: &str, default: i64) -> i64 {
        self.parameters.get(key).and_then(Value::as_i64).unwrap_or(default)
    }

    pub fn text<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.parameters.get(key).and_then(Value::as_str).unwrap_or(default)
    }

    pub fn pair(&self, key: &str) -> Option<[f64; 2]> {
        let a = self.parameters.get(key)?.as_array()?;
        Some([a[0].as_f64()?, a[1].as_f64()?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn fields(issues: &[Issue]) -> Vec<&str> {
        issues.iter().map(|i| i.field.as_str()).collect()
    }

    #[test]
    fn empty_config_lists_required_fields() {
        let issues = validate(&json!({}));
        assert_eq!(fields(&issues), ["scenario", "output.path"]);
    }

    #[test]
    fn negative_cutoff_is_a_range_error() {
        let issues = validate(&json!({
            "scenario": "identities",
            "output": {"path": "x.json"},
            "fockCutoff": -5
        }));
        assert_eq!(fields(&issues), ["fockCutoff"]);
        assert!(issues[0].message.contains("out of range"));
    }

    #[test]
    fn valid_driven_path_has_no_issues() {
        let cfg = json!({
            "scenario": "driven_path",
            "parameters": {"force_amplitude": 0.1, "detuning": 0.1},
            "output": {"format": "csv", "path": "path.csv"},
            "samples": 500
        });
        assert!(validate(&cfg).is_empty());
        let c = ScenarioConfig::from_value(&cfg).unwrap();
        assert_eq!(c.scenario, Scenario::DrivenPath);
        assert_eq!(c.fock_cutoff, DEFAULT_FOCK_CUTOFF);
        assert_eq!(c.samples, 500);
    }

    #[test]
    fn all_problems_reported_together() {
        let issues = validate(&json!({
            "scenario": "nutation",
            "parameters": {"rabi": -1.0, "sideband": 7, "colour": "red"},
            "output": {"path": "", "format": "xml"},
            "extra": 1
        }));
        let f = fields(&issues);
        for want in [
            "extra",
            "output.path",
            "output.format",
            "parameters.colour",
            "parameters.rabi",
            "parameters.lamb_dicke",
            "parameters.sideband",
            "parameters.duration",
        ] {
            assert!(f.contains(&want), "{want} missing from {f:?}");
        }
    }

    #[test]
    fn unknown_scenario() {
        let issues = validate(&json!({"scenario": "teleport", "output": {"path": "a"}}));
        assert_eq!(fields(&issues), ["scenario"]);
    }

    #[test]
    fn overrides_fill_in_output() {
        let mut cfg = json!({"scenario": "identities"});
        Overrides {
            out: Some("r.json".into()),
            format: Some(Format::Json),
            fock_cutoff: Some(12),
        }
        .apply(&mut cfg);
        let c = ScenarioConfig::from_value(&cfg).unwrap();
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.fock_cutoff, 12);
    }

    #[test]
    fn detuning_must_be_nonzero() {
        let issues = validate(&json!({
            "scenario": "sigma_z_gate",
            "parameters": {"detuning": 0.0, "force_up": [1.0, 1.0]},
            "output": {"path": "g.json"}
        }));
        assert_eq!(fields(&issues), ["parameters.detuning", "parameters.force_up"]);
    }
}

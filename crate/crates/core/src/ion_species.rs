//! Atomic constants of common ion qubits and low-field level-structure helpers.
//!
//! The hyperfine rows carry nuclear spin, P1/2 linewidth, ground-state
//! hyperfine splitting and the two S→P wavelengths. The optical rows carry the
//! S1/2→D5/2 wavelength, the D5/2 lifetime and the P→S / P→D branching
//! ratio. The same values ship in `data/species.json`.
//!
//! Magnetic-moment conversions use μ_B/h = 14.0 MHz/mT exactly, so that the
//! free-electron Zeeman splitting is the round 28 MHz/mT. This is about 0.1%
//! off the CODATA value.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Bohr magneton over Planck's constant, MHz/mT.
pub const BOHR_MHZ_PER_MT: f64 = 14.0;
/// Free-electron Zeeman qubit splitting, MHz/mT.
pub const ZEEMAN_MHZ_PER_MT: f64 = 28.0;

const SHIPPED_JSON: &str = include_str!("../data/species.json");

/// Integer or half-integer quantum number, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub fn new(value: f64) -> Result<Self> {
        let twice = value * 2.0;
        if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > i32::MAX as f64 {
            return Err(Error::InvalidArgument(format!("{value} is not a multiple of 1/2")));
        }
        Ok(HalfInt(twice as i32))
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        HalfInt::new(v).map_err(serde::de::Error::custom)
    }
}

/// S1/2 → D5/2 data for optical qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalData {
    pub lambda_d52_nm: f64,
    pub d52_lifetime_s: f64,
    /// P→S / P→D branching ratio.
    pub branching_ratio: f64,
}

/// One ion species. Fields absent from the source table are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonSpecies {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nuclear_spin: Option<HalfInt>,
    /// Natural width γ/2π of the P1/2 level, MHz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p12_linewidth_mhz: Option<f64>,
    /// Ground-state hyperfine splitting Δ_hf, GHz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperfine_splitting_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda12_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda32_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optical: Option<OpticalData>,
}

impl IonSpecies {
    /// A user-defined Zeeman-qubit species (I = 0, no hyperfine structure).
    pub fn zeeman(name: impl Into<String>) -> Self {
        IonSpecies {
            name: name.into(),
            nuclear_spin: Some(HalfInt::from_twice(0)),
            p12_linewidth_mhz: None,
            hyperfine_splitting_ghz: None,
            lambda12_nm: None,
            lambda32_nm: None,
            optical: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::SpeciesData(format!("{}: {what}", self.name)));
        if self.name.is_empty() {
            return Err(Error::SpeciesData("empty species name".into()));
        }
        if let Some(i) = self.nuclear_spin {
            if i.twice() < 0 {
                return bad("nuclear spin must be non-negative");
            }
            if i.twice() == 0 && self.hyperfine_splitting_ghz.is_some() {
                return bad("I = 0 species cannot carry a hyperfine splitting");
            }
        }
        let positive = [
            ("P1/2 linewidth", self.p12_linewidth_mhz),
            ("hyperfine splitting", self.hyperfine_splitting_ghz),
            ("lambda 1/2", self.lambda12_nm),
            ("lambda 3/2", self.lambda32_nm),
        ];
        for (what, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(&format!("{what} must be positive, got {v}"));
                }
            }
        }
        if let Some(o) = &self.optical {
            if !(o.lambda_d52_nm > 0.0 && o.d52_lifetime_s > 0.0) {
                return bad("optical wavelength and lifetime must be positive");
            }
            if !(o.branching_ratio > 0.0 && o.branching_ratio < 1.0) {
                return bad("branching ratio must lie in (0, 1)");
            }
        }
        Ok(())
    }
}

type Row = (&'static str, i32, f64, f64, f64, f64);

// name, 2I, γ/2π (MHz), Δ_hf (GHz), λ1/2 (nm), λ3/2 (nm)
const HYPERFINE_ROWS: [Row; 9] = [
    ("9Be+", 3, 19.6, 1.25, 313.1, 313.0),
    ("25Mg+", 5, 41.3, 1.79, 280.3, 279.6),
    ("43Ca+", 7, 22.5, 3.23, 396.8, 393.4),
    ("67Zn+", 5, 62.2, 7.2, 206.2, 202.5),
    ("87Sr+", 9, 21.5, 5.00, 421.6, 407.8),
    ("111Cd+", 1, 50.5, 14.53, 226.5, 214.4),
    ("137Ba+", 3, 20.1, 8.04, 493.4, 455.4),
    ("171Yb+", 1, 19.7, 12.64, 369.4, 328.9),
    ("199Hg+", 1, 54.7, 40.51, 194.2, 165.0),
];

// name, λ D5/2 (nm), D5/2 lifetime (s), branching ratio
const OPTICAL_ROWS: [(&str, f64, f64, f64); 5] = [
    ("Ca+", 729.1, 1.17, 1.0 / 17.0),
    ("Sr+", 674.0, 0.36, 1.0 / 14.0),
    ("Ba+", 1761.7, 30.0, 1.0 / 3.0),
    ("Yb+", 411.0, 0.007, 1.0 / 290.0),
    ("Hg+", 281.6, 0.1, 1.0 / 700.0),
];

/// Read-only collection of species records.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesDb {
    records: Vec<IonSpecies>,
}

impl SpeciesDb {
    /// The tables compiled into the library.
    pub fn embedded() -> Self {
        let mut records: Vec<IonSpecies> = HYPERFINE_ROWS
            .iter()
            .map(|&(name, twice_i, gamma, hf, l12, l32)| IonSpecies {
                name: name.to_string(),
                nuclear_spin: Some(HalfInt::from_twice(twice_i)),
                p12_linewidth_mhz: Some(gamma),
                hyperfine_splitting_ghz: Some(hf),
                lambda12_nm: Some(l12),
                lambda32_nm: Some(l32),
                optical: None,
            })
            .collect();
        records.extend(OPTICAL_ROWS.iter().map(|&(name, lambda, life, f)| IonSpecies {
            name: name.to_string(),
            nuclear_spin: None,
            p12_linewidth_mhz: None,
            hyperfine_splitting_ghz: None,
            lambda12_nm: None,
            lambda32_nm: None,
            optical: Some(OpticalData {
                lambda_d52_nm: lambda,
                d52_lifetime_s: life,
                branching_ratio: f,
            }),
        }));
        SpeciesDb { records }
    }

    /// The `species.json` bundled with the crate.
    pub fn shipped() -> Result<Self> {
        Self::from_json(SHIPPED_JSON)
    }

    pub fn shipped_json() -> &'static str {
        SHIPPED_JSON
    }

    /// Parses a JSON array of species records, validating each.
    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<IonSpecies> =
            serde_json::from_str(text).map_err(|e| Error::SpeciesData(e.to_string()))?;
        Self::from_records(records)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::SpeciesData(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn from_records(records: Vec<IonSpecies>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            r.validate()?;
            if records[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::SpeciesData(format!("duplicate species `{}`", r.name)));
            }
        }
        Ok(SpeciesDb { records })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records).expect("species records serialize")
    }

    pub fn records(&self) -> &[IonSpecies] {
        &self.records
    }

    pub fn names(&self) -> Vec<String> {
        self.records.iter().map(|r| r.name.clone()).collect()
    }

    pub fn lookup(&self, name: &str) -> Result<&IonSpecies> {
        self.records
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownSpecies {
                name: name.to_string(),
                available: self.names(),
            })
    }
}

/// Looks up a species in the embedded tables.
pub fn lookup(name: &str) -> Result<IonSpecies> {
    SpeciesDb::embedded().lookup(name).cloned()
}

/// Zeeman-qubit splitting in MHz for a field `b_mt` in mT.
pub fn zeeman_splitting(b_mt: f64) -> Result<f64> {
    if b_mt < 0.0 || !b_mt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "magnetic field must be a non-negative magnitude, got {b_mt} mT"
        )));
    }
    Ok(ZEEMAN_MHZ_PER_MT * b_mt)
}

/// Ground-state hyperfine constant `A_hf = Δ_hf / (I + 1/2)`, GHz.
pub fn hyperfine_constant(species: &IonSpecies) -> Result<f64> {
    let i = species.nuclear_spin.ok_or_else(|| {
        Error::InvalidArgument(format!("{} has no tabulated nuclear spin", species.name))
    })?;
    if i.twice() == 0 {
        return Err(Error::InvalidArgument(format!(
            "{} has I = 0 and no hyperfine structure",
            species.name
        )));
    }
    let split = species.hyperfine_splitting_ghz.ok_or_else(|| {
        Error::InvalidArgument(format!("{} has no tabulated hyperfine splitting", species.name))
    })?;
    Ok(split / (i.value() + 0.5))
}

/// Low-field Zeeman shift `g_F μ_B B m_F` in MHz.
pub fn zeeman_shift_low_field(g_f: f64, b_mt: f64, m_f: HalfInt) -> f64 {
    g_f * BOHR_MHZ_PER_MT * b_mt * m_f.value()
}

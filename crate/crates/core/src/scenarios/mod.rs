//! Named, config-driven experiments with embedded checks and truncation gates.
//!
//! Every scenario returns a [`Report`]: echoed parameters, a JSON result
//! block, pass/fail checks, N versus N+5 convergence gates and plain-text
//! data files. Nothing here touches the filesystem.

use serde::{Deserialize, Serialize};

use crate::dynamics::{EvolveOptions, Tolerances};
use crate::error::{Error, Result};

mod cat;
mod correlations;
mod device;
mod drift;
mod fock;
mod lamb_dicke;
mod rates;
mod spectrum;

pub use cat::{CatConfig, EnsembleConfig, TrajectoryConfig};
pub use correlations::{CorrelationConfig, Regime};
pub use device::{DeviceConfig, Expectation};
pub use drift::DriftConfig;
pub use fock::FockConfig;
pub use lamb_dicke::LambDickeConfig;
pub use rates::RatesConfig;
pub use spectrum::SpectrumConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest accepted N versus N+5 change of a gated quantity.
pub const GATE_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioConfig {
    Rates(RatesConfig),
    Spectrum(SpectrumConfig),
    Fock(FockConfig),
    Cat(CatConfig),
    Correlations(CorrelationConfig),
    LambDicke(LambDickeConfig),
    Drift(DriftConfig),
    Device(DeviceConfig),
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rates(_) => "rates",
            Self::Spectrum(_) => "spectrum",
            Self::Fock(_) => "fock",
            Self::Cat(_) => "cat",
            Self::Correlations(_) => "correlations",
            Self::LambDicke(_) => "lamb-dicke",
            Self::Drift(_) => "drift",
            Self::Device(_) => "device",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Rates(c) => c.validate(),
            Self::Spectrum(c) => c.validate(),
            Self::Fock(c) => c.validate(),
            Self::Cat(c) => c.validate(),
            Self::Correlations(c) => c.validate(),
            Self::LambDicke(c) => c.validate(),
            Self::Drift(c) => c.validate(),
            Self::Device(c) => c.validate(),
        }
    }
}

/// Validate and run one scenario.
pub fn run(config: &ScenarioConfig) -> Result<Report> {
    config.validate()?;
    let mut report = match config {
        ScenarioConfig::Rates(c) => rates::run(c),
        ScenarioConfig::Spectrum(c) => spectrum::run(c),
        ScenarioConfig::Fock(c) => fock::run(c),
        ScenarioConfig::Cat(c) => cat::run(c),
        ScenarioConfig::Correlations(c) => correlations::run(c),
        ScenarioConfig::LambDicke(c) => lamb_dicke::run(c),
        ScenarioConfig::Drift(c) => drift::run(c),
        ScenarioConfig::Device(c) => device::run(c),
    }?;
    report.scenario = config.name().to_string();
    report.parameters = to_json(config)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. ">= 0.95".
    pub condition: String,
}

impl Check {
    pub fn at_least(name: impl Into<String>, value: f64, min: f64) -> Self {
        Self { name: name.into(), passed: value >= min, value, condition: format!(">= {min}") }
    }

    pub fn above(name: impl Into<String>, value: f64, min: f64) -> Self {
        Self { name: name.into(), passed: value > min, value, condition: format!("> {min}") }
    }

    pub fn below(name: impl Into<String>, value: f64, max: f64) -> Self {
        Self { name: name.into(), passed: value < max, value, condition: format!("< {max}") }
    }

    /// |value - expected| <= rel |expected|.
    pub fn within_rel(name: impl Into<String>, value: f64, expected: f64, rel: f64) -> Self {
        Self {
            name: name.into(),
            passed: (value - expected).abs() <= rel * expected.abs(),
            value,
            condition: format!("{expected} within relative {rel:e}"),
        }
    }

    pub fn within_abs(name: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: (value - expected).abs() <= tol,
            value,
            condition: format!("{expected} within {tol:e}"),
        }
    }
}

/// The same quantity at cutoffs N and N+5.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gate {
    pub quantity: String,
    pub cutoff: usize,
    pub value: f64,
    pub value_plus_5: f64,
    /// |value - value_plus_5| / max(1, |value_plus_5|).
    pub change: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Gate {
    pub fn new(quantity: impl Into<String>, cutoff: usize, value: f64, value_plus_5: f64) -> Self {
        let change = (value - value_plus_5).abs() / value_plus_5.abs().max(1.0);
        Self {
            quantity: quantity.into(),
            cutoff,
            value,
            value_plus_5,
            change,
            tolerance: GATE_TOLERANCE,
            passed: change < GATE_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataFile {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub parameters: serde_json::Value,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
    pub gates: Vec<Gate>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub files: Vec<DataFile>,
}

impl Report {
    fn new(results: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: String::new(),
            parameters: serde_json::Value::Null,
            results,
            checks: Vec::new(),
            gates: Vec::new(),
            warnings: Vec::new(),
            files: Vec::new(),
        }
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push(DataFile { name: name.to_string(), contents });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.gates.iter().all(|g| g.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        let checks = self.checks.iter().filter(|c| !c.passed).map(|c| {
            format!("check {}: {} (want {})", c.name, c.value, c.condition)
        });
        let gates = self.gates.iter().filter(|g| !g.passed).map(|g| {
            format!("gate {} at N={}: change {:e}", g.quantity, g.cutoff, g.change)
        });
        checks.chain(gates).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArgument(format!("serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

/// Integrator tolerances as they appear in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self { rtol: t.rtol, atol: t.atol }
    }
}

impl IntegratorConfig {
    pub fn evolve(&self) -> EvolveOptions {
        EvolveOptions {
            tolerances: Tolerances { rtol: self.rtol, atol: self.atol, ..Tolerances::default() },
            ..EvolveOptions::default()
        }
    }

    fn validate(&self) -> Result<()> {
        positive("integrator.rtol", self.rtol)?;
        positive("integrator.atol", self.atol)
    }
}

fn to_json<T: Serialize>(x: &T) -> Result<serde_json::Value> {
    serde_json::to_value(x).map_err(|e| Error::InvalidArgument(format!("serialization: {e}")))
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidConfig { field: field.to_string(), message: message.into() }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be >= 0, got {v}")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(invalid(field, format!("must be >= {min}, got {v}")))
    }
}

/// Columns of equal length as CSV with a fixed float format.
fn csv(header: &[&str], columns: &[&[f64]]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| format!("{:.10e}", c[i])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

use serde::{Deserialize, Serialize};

use super::{invalid, positive, to_json, Check, Report};
use crate::device::DeviceParams;
use crate::error::Result;

/// An expected value of one report field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    /// Field of the feasibility report, e.g. "omega_r_hz".
    pub quantity: String,
    pub value: f64,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
}

/// Feasibility numbers for one cantilever.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub params: DeviceParams,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self { params: DeviceParams::silicon(), expect: Vec::new() }
    }
}

const QUANTITIES: [&str; 8] =
    ["omega_r", "omega_r_hz", "m_eff", "a0", "lambda", "lambda_hz", "n_th", "omega_r_over_lambda"];

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| invalid("params", e.to_string()))?;
        for e in &self.expect {
            if !QUANTITIES.contains(&e.quantity.as_str()) {
                return Err(invalid("quantity", format!("unknown quantity `{}`", e.quantity)));
            }
            match (e.rel_tol, e.abs_tol) {
                (Some(t), None) => positive("rel_tol", t)?,
                (None, Some(t)) => positive("abs_tol", t)?,
                _ => return Err(invalid("quantity", "give exactly one of rel_tol, abs_tol")),
            }
        }
        Ok(())
    }
}

pub(super) fn run(c: &DeviceConfig) -> Result<Report> {
    let r = c.params.report()?;
    let json = to_json(&r)?;
    let mut report = Report::new(json.clone());
    for e in &c.expect {
        let value = json[e.quantity.as_str()].as_f64().unwrap_or(f64::NAN);
        let name = e.quantity.clone();
        report.checks.push(match (e.rel_tol, e.abs_tol) {
            (Some(t), _) => Check::within_rel(name, value, e.value, t),
            (_, Some(t)) => Check::within_abs(name, value, e.value, t),
            _ => unreachable!("validated"),
        });
    }
    let mut text = serde_json::to_string_pretty(&json).unwrap_or_default();
    text.push('\n');
    report.file("feasibility.json", text);
    Ok(report)
}

use serde::{Deserialize, Serialize};

use super::{at_least, csv, invalid, positive, to_json, Check, Report};
use crate::error::Result;
use crate::perturbation::{mollow_rate, resolvent_rate};

/// Closed-form n-phonon rates against the resolvent sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub lambda: f64,
    pub orders: Vec<usize>,
    pub omegas: Vec<f64>,
    /// Largest accepted relative difference between the two methods.
    pub cross_tolerance: f64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self { lambda: 1.0, orders: vec![1, 2, 3, 4], omegas: vec![5.0, 6.0, 7.5], cross_tolerance: 1e-9 }
    }
}

impl RatesConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("cross_tolerance", self.cross_tolerance)?;
        if self.orders.is_empty() || self.omegas.is_empty() {
            return Err(invalid("orders", "need at least one order and one Omega"));
        }
        for &n in &self.orders {
            at_least("orders", n, 1)?;
        }
        for &w in &self.omegas {
            positive("omegas", w)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
struct Row {
    n: usize,
    omega: f64,
    closed_form: f64,
    resolvent: f64,
    relative_difference: f64,
    shift: Option<f64>,
}

/// Values printed alongside the Fock-state figures, (n, Omega, rate, tolerance).
const QUOTED: [(usize, f64, f64, f64); 4] =
    [(1, 5.0, 0.5, 1e-12), (2, 5.0, -0.1, 1e-12), (3, 7.5, 0.01125, 1e-12), (4, 6.0, -0.004, 5e-4)];

pub(super) fn run(c: &RatesConfig) -> Result<Report> {
    let mut rows = Vec::new();
    for &n in &c.orders {
        for &omega in &c.omegas {
            let closed = mollow_rate(n, c.lambda, omega)?;
            let res = resolvent_rate(n, c.lambda, omega, None)?;
            let rel = (res.rate - closed.rate).abs() / closed.rate.abs();
            rows.push(Row {
                n,
                omega,
                closed_form: closed.rate,
                resolvent: res.rate,
                relative_difference: rel,
                shift: res.shift,
            });
        }
    }

    let mut report = Report::new(to_json(&rows)?);
    for r in &rows {
        report.checks.push(Check::below(
            format!("resolvent agrees n={} Omega={}", r.n, r.omega),
            r.relative_difference,
            c.cross_tolerance,
        ));
    }
    if c.lambda == 1.0 {
        for (n, omega, quoted, tol) in QUOTED {
            if let Some(r) = rows.iter().find(|r| r.n == n && r.omega == omega) {
                let name = format!("quoted rate n={n} Omega={omega}");
                report.checks.push(if tol < 1e-6 {
                    Check::within_rel(name, r.closed_form, quoted, tol)
                } else {
                    Check::within_abs(name, r.closed_form, quoted, tol)
                });
            }
        }
    }

    let col = |f: fn(&Row) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    report.file(
        "rates.csv",
        csv(
            &["n", "Omega", "closed_form", "resolvent", "relative_difference"],
            &[
                &col(|r| r.n as f64),
                &col(|r| r.omega),
                &col(|r| r.closed_form),
                &col(|r| r.resolvent),
                &col(|r| r.relative_difference),
            ],
        ),
    );
    Ok(report)
}

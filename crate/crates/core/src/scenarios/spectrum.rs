use serde::{Deserialize, Serialize};

use super::{at_least, invalid, positive, to_json, Check, Gate, Report};
use crate::error::Result;
use crate::hilbert::HilbertSpace;
use crate::model::{build_dressed_mollow, MollowParams};
use crate::perturbation::mollow_rate;
use crate::spectra::{find_mollow_crossing, sweep, CrossingReport};

/// Dressed-basis eigenvalue sweep over Omega and the n-phonon avoided crossings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub lambda: f64,
    pub delta_a: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    /// Levels written to the CSV: `take` levels above the lowest `skip`.
    pub skip: usize,
    pub take: usize,
    pub orders: Vec<usize>,
    /// Defaults to 4 n_max + 5.
    pub cutoff: Option<usize>,
    pub crossing_resolution: usize,
    /// Delta_a at which the one-phonon gap is compared with lambda.
    pub jc_delta_a: Option<f64>,
    pub position_tolerance: f64,
    pub gap_tolerance: f64,
    pub jc_tolerance: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            delta_a: 5.0,
            omega_min: 0.0,
            omega_max: 20.0,
            points: 401,
            skip: 1,
            take: 8,
            orders: vec![1, 2, 3],
            cutoff: None,
            crossing_resolution: 41,
            jc_delta_a: Some(10.0),
            position_tolerance: 0.05,
            gap_tolerance: 0.15,
            jc_tolerance: 0.05,
        }
    }
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("delta_a", self.delta_a)?;
        if !(self.omega_max > self.omega_min) {
            return Err(invalid("omega_max", "must exceed omega_min"));
        }
        at_least("points", self.points, 3)?;
        at_least("take", self.take, 1)?;
        at_least("crossing_resolution", self.crossing_resolution, 3)?;
        for &n in &self.orders {
            at_least("orders", n, 1)?;
        }
        if let Some(n) = self.cutoff {
            at_least("cutoff", n, self.orders.iter().max().map_or(2, |m| m + 1))?;
        }
        if let Some(d) = self.jc_delta_a {
            positive("jc_delta_a", d)?;
        }
        Ok(())
    }

    fn cutoff(&self) -> usize {
        self.cutoff.unwrap_or(4 * self.orders.iter().max().copied().unwrap_or(1) + 5)
    }
}

#[derive(Clone, Debug, Serialize)]
struct Crossing {
    #[serde(flatten)]
    report: CrossingReport,
    delta_a: f64,
    /// 2 sqrt(n!) |lambda^(n)(Omega_star)|.
    predicted_gap: f64,
    gap_plus_5: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn crossing(n: usize, c: &SpectrumConfig, delta_a: f64, cutoff: usize) -> Result<Crossing> {
    let report = find_mollow_crossing(n, c.lambda, delta_a, cutoff, c.crossing_resolution)?;
    let finer = find_mollow_crossing(n, c.lambda, delta_a, cutoff + 5, c.crossing_resolution)?;
    let rate = mollow_rate(n, c.lambda, report.omega_star)?.rate;
    Ok(Crossing {
        predicted_gap: 2.0 * factorial(n).sqrt() * rate.abs(),
        gap_plus_5: finer.gap,
        delta_a,
        report,
    })
}

pub(super) fn run(c: &SpectrumConfig) -> Result<Report> {
    let cutoff = c.cutoff();
    let space = HilbertSpace::qubit(cutoff)?;
    let (lambda, delta_a) = (c.lambda, c.delta_a);
    let table = sweep(
        "dressed_mollow",
        move |omega| build_dressed_mollow(&MollowParams::new(lambda, omega, delta_a), space),
        (c.omega_min, c.omega_max),
        c.points,
        c.skip,
        Some(c.take),
    )?;

    let mut crossings = Vec::new();
    for &n in &c.orders {
        crossings.push(crossing(n, c, c.delta_a, cutoff)?);
    }
    let jc = match c.jc_delta_a {
        Some(d) => Some(crossing(1, c, d, cutoff)?),
        None => None,
    };

    let mut report = Report::new(serde_json::json!({
        "cutoff": cutoff,
        "crossings": to_json(&crossings)?,
        "jc_crossing": to_json(&jc)?,
    }));
    for x in &crossings {
        let n = x.report.n;
        report.checks.push(Check::within_rel(
            format!("Omega_star n={n}"),
            x.report.omega_star,
            x.report.predicted_omega,
            c.position_tolerance,
        ));
        if n >= 2 {
            report.checks.push(Check::within_rel(
                format!("gap n={n}"),
                x.report.gap,
                x.predicted_gap,
                c.gap_tolerance,
            ));
        }
        report.gates.push(Gate::new(format!("gap n={n}"), cutoff, x.report.gap, x.gap_plus_5));
    }
    if let Some(x) = &jc {
        report.checks.push(Check::within_rel(
            format!("gap n=1 Delta_a={}", x.delta_a),
            x.report.gap,
            c.lambda,
            c.jc_tolerance,
        ));
        report.gates.push(Gate::new("gap n=1 (JC limit)", cutoff, x.report.gap, x.gap_plus_5));
    }

    let all: Vec<&Crossing> = crossings.iter().chain(jc.iter()).collect();
    report.file("spectrum.csv", table.to_csv());
    let mut json = serde_json::to_string_pretty(&to_json(&all)?).unwrap_or_default();
    json.push('\n');
    report.file("crossings.json", json);
    Ok(report)
}

use serde::{Deserialize, Serialize};

use super::{at_least, csv, non_negative, positive, Check, Gate, IntegratorConfig, Report};
use crate::dynamics::{lindblad_evolve, make_model, DissipationParams, Variant};
use crate::error::Result;
use crate::hilbert::{HilbertSpace, QuantumState};
use crate::model::{build_effective_mollow, MollowParams};
use crate::observables::number_populations;
use crate::perturbation::mollow_rate;
use crate::spectra::linspace;

/// Rabi flopping |+,0> -> |-,n> on the effective n-phonon resonance with a thermal bath.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FockConfig {
    pub n: usize,
    pub lambda: f64,
    pub delta_a: f64,
    pub omega: f64,
    pub gamma_s: f64,
    pub gamma_m: f64,
    pub n_th: f64,
    /// Defaults to 4n + 5.
    pub cutoff: Option<usize>,
    /// Length of the run in units of the Rabi period pi / (sqrt(n!) |lambda^(n)|).
    pub periods: f64,
    pub points: usize,
    /// Required peak of P_n, if any.
    pub min_peak: Option<f64>,
    pub integrator: IntegratorConfig,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            n: 1,
            lambda: 1.0,
            delta_a: 10.0,
            omega: 5.0,
            gamma_s: 1e-3,
            gamma_m: 5e-5,
            n_th: 40.0,
            cutoff: None,
            periods: 1.0,
            points: 401,
            min_peak: None,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl FockConfig {
    pub fn validate(&self) -> Result<()> {
        at_least("n", self.n, 1)?;
        positive("lambda", self.lambda)?;
        positive("delta_a", self.delta_a)?;
        positive("omega", self.omega)?;
        non_negative("gamma_s", self.gamma_s)?;
        non_negative("gamma_m", self.gamma_m)?;
        non_negative("n_th", self.n_th)?;
        positive("periods", self.periods)?;
        at_least("points", self.points, 2)?;
        if let Some(n) = self.cutoff {
            at_least("cutoff", n, 4 * self.n + 1)?;
        }
        self.integrator.validate()
    }

    fn cutoff(&self) -> usize {
        self.cutoff.unwrap_or(4 * self.n + 5)
    }
}

struct Run {
    times: Vec<f64>,
    /// populations[k][i]: P_k at times[i] for k = 0 ..= n + 1.
    populations: Vec<Vec<f64>>,
    peak: f64,
    peak_time: f64,
}

fn simulate(c: &FockConfig, cutoff: usize, t_end: f64) -> Result<Run> {
    let space = HilbertSpace::qubit(cutoff)?;
    let p = MollowParams::new(c.lambda, c.omega, c.delta_a);
    let h = build_effective_mollow(c.n, &p, None, space)?;
    let d = DissipationParams { gamma_s: c.gamma_s, gamma_m: c.gamma_m, n_th: c.n_th, gamma_0: 0.0 };
    let model = make_model(h, &d, Variant::Fock)?;
    let rho0 = QuantumState::basis(space, 0, 0)?.to_density();
    let times = linspace(0.0, t_end, c.points);
    let ev = lindblad_evolve(&model, &rho0, &times, &c.integrator.evolve())?;
    let kmax = (c.n + 1).min(cutoff - 1);
    let mut populations = vec![Vec::with_capacity(times.len()); kmax + 1];
    for s in &ev.states {
        let pops = number_populations(s);
        for (k, col) in populations.iter_mut().enumerate() {
            col.push(pops[k]);
        }
    }
    let (peak_idx, peak) = populations[c.n]
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(Run { peak_time: times[peak_idx], times, populations, peak })
}

pub(super) fn run(c: &FockConfig) -> Result<Report> {
    let rate = mollow_rate(c.n, c.lambda, c.omega)?.rate;
    let nf: f64 = (1..=c.n).map(|k| k as f64).product();
    let coupling = rate.abs() * nf.sqrt();
    let period = std::f64::consts::PI / coupling;
    let t_end = c.periods * period;

    let cutoff = c.cutoff();
    let base = simulate(c, cutoff, t_end)?;
    let finer = simulate(c, cutoff + 5, t_end)?;

    let mut report = Report::new(serde_json::json!({
        "cutoff": cutoff,
        "rate": rate,
        "rabi_period": period,
        "peak_population": base.peak,
        "peak_time": base.peak_time,
        "peak_population_plus_5": finer.peak,
    }));
    report.warnings.extend(MollowParams::new(c.lambda, c.omega, c.delta_a).warnings());
    if let Some(min) = c.min_peak {
        report.checks.push(Check::at_least(format!("peak P_{}", c.n), base.peak, min));
    }
    report.gates.push(Gate::new(format!("peak P_{}", c.n), cutoff, base.peak, finer.peak));

    let header: Vec<String> =
        std::iter::once("t".to_string()).chain((0..base.populations.len()).map(|k| format!("P{k}"))).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut cols: Vec<&[f64]> = vec![&base.times];
    cols.extend(base.populations.iter().map(Vec::as_slice));
    report.file("populations.csv", csv(&header, &cols));
    Ok(report)
}

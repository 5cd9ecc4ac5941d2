use serde::{Deserialize, Serialize};

use super::{at_least, csv, invalid, non_negative, positive, Check, Gate, IntegratorConfig, Report};
use crate::dynamics::{lindblad_evolve, make_model, DissipationParams, Variant};
use crate::error::Result;
use crate::hilbert::{HilbertSpace, QuantumState};
use crate::model::{build_dressed_mollow, dressed_bare_sigma_z, drift_shift, MollowParams};
use crate::observables::number_populations;
use crate::spectra::linspace;

/// Two-phonon Rabi peak under a static drift of the spin transition.
///
/// A drift delta_n shifts the bright-dark splitting by delta_omega_bd, which
/// enters the dressed model as (delta_omega_bd / 2) times the bare sigma_z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftConfig {
    pub lambda: f64,
    pub delta: f64,
    pub omega_x: f64,
    pub delta_a: f64,
    pub omega: f64,
    pub gamma_s: f64,
    pub gamma_m: f64,
    pub n_th: f64,
    pub cutoff: usize,
    pub t_final: f64,
    pub points: usize,
    pub drifts: Vec<f64>,
    /// Drifts up to this size must degrade the peak by less than `max_degradation`.
    pub tolerated_drift: f64,
    pub max_degradation: f64,
    /// This drift must change the peak by more than `min_change`.
    pub detectable_drift: f64,
    pub min_change: f64,
    /// Larger detuning at which the detectable drift must degrade the peak less.
    pub compare_delta: Option<f64>,
    pub integrator: IntegratorConfig,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            delta: 2500.0,
            omega_x: 250.0,
            delta_a: 8.0,
            omega: 7.94,
            gamma_s: 1e-3,
            gamma_m: 5e-5,
            n_th: 40.0,
            cutoff: 13,
            t_final: 60.0,
            points: 1201,
            drifts: vec![0.0, 1.0, 3.0, 5.0, 8.0],
            tolerated_drift: 5.0,
            max_degradation: 0.1,
            detectable_drift: 8.0,
            min_change: 0.2,
            compare_delta: Some(5000.0),
            integrator: IntegratorConfig::default(),
        }
    }
}

impl DriftConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("delta", self.delta)?;
        positive("omega_x", self.omega_x)?;
        positive("delta_a", self.delta_a)?;
        positive("omega", self.omega)?;
        non_negative("gamma_s", self.gamma_s)?;
        non_negative("gamma_m", self.gamma_m)?;
        non_negative("n_th", self.n_th)?;
        at_least("cutoff", self.cutoff, 3)?;
        positive("t_final", self.t_final)?;
        at_least("points", self.points, 2)?;
        if self.drifts.is_empty() {
            return Err(invalid("drifts", "need at least one drift value"));
        }
        if let Some(d) = self.compare_delta {
            positive("compare_delta", d)?;
        }
        self.integrator.validate()
    }
}

#[derive(Clone, Debug, Serialize)]
struct Point {
    delta: f64,
    omega_x: f64,
    delta_n: f64,
    delta_omega_bd: f64,
    peak: f64,
    peak_time: f64,
    degradation: f64,
}

struct Trace {
    peak: f64,
    peak_time: f64,
    p2: Vec<f64>,
}

fn peak_p2(c: &DriftConfig, delta_omega_bd: f64, cutoff: usize, times: &[f64]) -> Result<Trace> {
    let space = HilbertSpace::qubit(cutoff)?;
    let p = MollowParams::new(c.lambda, c.omega, c.delta_a);
    let h = build_dressed_mollow(&p, space)?.add(&dressed_bare_sigma_z(space)?.scale_re(0.5 * delta_omega_bd))?;
    let d = DissipationParams { gamma_s: c.gamma_s, gamma_m: c.gamma_m, n_th: c.n_th, gamma_0: 0.0 };
    let model = make_model(h, &d, Variant::Fock)?;
    let rho0 = QuantumState::basis(space, 0, 0)?.to_density();
    let ev = lindblad_evolve(&model, &rho0, times, &c.integrator.evolve())?;
    let p2: Vec<f64> = ev.states.iter().map(|s| number_populations(s)[2]).collect();
    let (k, peak) = p2
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(Trace { peak, peak_time: times[k], p2 })
}

fn scan(
    c: &DriftConfig,
    base: &Trace,
    delta: f64,
    omega_x: f64,
    drifts: &[f64],
    times: &[f64],
) -> Result<(Vec<Point>, Vec<Vec<f64>>)> {
    let mut points = Vec::new();
    let mut traces = Vec::new();
    for &dn in drifts {
        let shift = if dn == 0.0 { 0.0 } else { drift_shift(delta, omega_x, dn)?.delta_omega_bd };
        let tr = peak_p2(c, shift, c.cutoff, times)?;
        points.push(Point {
            delta,
            omega_x,
            delta_n: dn,
            delta_omega_bd: shift,
            peak: tr.peak,
            peak_time: tr.peak_time,
            degradation: 1.0 - tr.peak / base.peak,
        });
        traces.push(tr.p2);
    }
    Ok((points, traces))
}

pub(super) fn run(c: &DriftConfig) -> Result<Report> {
    let times = linspace(0.0, c.t_final, c.points);
    let base = peak_p2(c, 0.0, c.cutoff, &times)?;
    let (points, traces) = scan(c, &base, c.delta, c.omega_x, &c.drifts, &times)?;
    let finer = peak_p2(c, 0.0, c.cutoff + 5, &times)?;

    let mut report = Report::new(serde_json::Value::Null);
    report.warnings.extend(
        MollowParams { omega_x: c.omega_x, delta: c.delta, ..MollowParams::new(c.lambda, c.omega, c.delta_a) }
            .warnings(),
    );
    for p in points.iter().filter(|p| p.delta_n != 0.0 && p.delta_n.abs() <= c.tolerated_drift) {
        report.checks.push(Check::below(
            format!("degradation at delta_n={}", p.delta_n),
            p.degradation,
            c.max_degradation,
        ));
    }
    let detect_change = match points.iter().find(|p| p.delta_n == c.detectable_drift) {
        Some(p) => p.degradation,
        None => {
            let shift = drift_shift(c.delta, c.omega_x, c.detectable_drift)?.delta_omega_bd;
            1.0 - peak_p2(c, shift, c.cutoff, &times)?.peak / base.peak
        }
    };
    report.checks.push(Check::above(
        format!("change at delta_n={}", c.detectable_drift),
        detect_change.abs(),
        c.min_change,
    ));

    let mut comparison = Vec::new();
    if let Some(big) = c.compare_delta {
        let (cmp, _) = scan(c, &base, big, c.omega_x, &[c.detectable_drift], &times)?;
        report.checks.push(Check::below(
            format!("degradation at delta_n={} with Delta={big} minus Delta={}", c.detectable_drift, c.delta),
            cmp[0].degradation - detect_change,
            0.0,
        ));
        // Same bright-dark splitting at the larger detuning, for reference.
        let scaled = c.omega_x * (big / c.delta).sqrt();
        let (same_split, _) = scan(c, &base, big, scaled, &[c.detectable_drift], &times)?;
        comparison.extend(cmp);
        comparison.extend(same_split);
    }
    report.gates.push(Gate::new("peak P2 without drift", c.cutoff, base.peak, finer.peak));

    report.results = serde_json::json!({
        "baseline_peak": base.peak,
        "baseline_peak_time": base.peak_time,
        "detectable_change": detect_change,
        "points": super::to_json(&points)?,
        "detuning_comparison": super::to_json(&comparison)?,
    });

    let mut header = vec!["t".to_string()];
    header.extend(points.iter().map(|p| format!("P2_dn{}", p.delta_n)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut cols: Vec<&[f64]> = vec![&times];
    cols.extend(traces.iter().map(Vec::as_slice));
    report.file("drift.csv", csv(&header, &cols));
    Ok(report)
}

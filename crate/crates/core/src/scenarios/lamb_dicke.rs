use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::{at_least, csv, invalid, positive, Check, Gate, Report};
use crate::error::Result;
use crate::hilbert::{HilbertSpace, Operator};
use crate::linalg;
use crate::model::{build_ld_effective, build_ld_polaron, build_ld_rotating, LDParams};
use crate::perturbation::ld_rate;
use crate::spectra::{find_crossing, linspace};
use crate::C64;

/// Full Lamb-Dicke model against its polaron form and the two-phonon effective model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LambDickeConfig {
    pub lambda: f64,
    pub omega: f64,
    pub omega_r: f64,
    pub cutoff: usize,
    /// Half width of the delta window searched around 2 omega_r.
    pub window: f64,
    pub resolution: usize,
    pub points: usize,
    /// Number of low-lying levels compared between the rotating and polaron frames.
    pub levels: usize,
    pub spectrum_tolerance: f64,
    pub dynamics_tolerance: f64,
}

impl Default for LambDickeConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            omega: 1.0,
            omega_r: 20.0,
            cutoff: 30,
            window: 0.5,
            resolution: 41,
            points: 301,
            levels: 20,
            spectrum_tolerance: 1e-8,
            dynamics_tolerance: 0.1,
        }
    }
}

impl LambDickeConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("omega", self.omega)?;
        positive("omega_r", self.omega_r)?;
        if 2.0 * self.lambda >= self.omega_r {
            return Err(invalid("omega_r", "Lamb-Dicke parameter 2 lambda / omega_r must be < 1"));
        }
        at_least("cutoff", self.cutoff, 5)?;
        positive("window", self.window)?;
        at_least("resolution", self.resolution, 3)?;
        at_least("points", self.points, 2)?;
        at_least("levels", self.levels, 1)?;
        if self.levels > 2 * self.cutoff {
            return Err(invalid("levels", "exceeds the space dimension"));
        }
        Ok(())
    }

    fn params(&self, delta: f64) -> LDParams {
        LDParams::new(self.lambda, self.omega, delta, self.omega_r)
    }
}

/// sum_s |<s,2|psi(t)>|^2 under exp(-i H t) from |down,0>.
fn two_phonon_population(h: &Operator, times: &[f64]) -> Result<Vec<f64>> {
    let space = h.space();
    let (e, v) = linalg::eigh(h.matrix())?;
    let start = space.index(1, 0);
    let c: Array1<C64> = v.row(start).mapv(|z| z.conj());
    let targets = [space.index(0, 2), space.index(1, 2)];
    Ok(times
        .iter()
        .map(|&t| {
            let phased: Array1<C64> =
                c.iter().zip(e.iter()).map(|(ck, ek)| ck * C64::from_polar(1.0, -ek * t)).collect();
            targets.iter().map(|&i| v.row(i).dot(&phased).norm_sqr()).sum()
        })
        .collect())
}

struct Run {
    delta_star: f64,
    gap: f64,
    spectrum_difference: f64,
    full: Vec<f64>,
    effective: Vec<f64>,
    max_difference: f64,
}

fn simulate(c: &LambDickeConfig, cutoff: usize, times: &[f64]) -> Result<Run> {
    let space = HilbertSpace::qubit(cutoff)?;
    let centre = 2.0 * c.omega_r;
    let cross = find_crossing(
        |delta| build_ld_rotating(&c.params(delta), space),
        2,
        space.index(1, 0),
        space.index(0, 2),
        (centre - c.window, centre + c.window),
        c.resolution,
        centre,
    )?;
    let p = c.params(cross.omega_star);
    let rot = build_ld_rotating(&p, space)?;
    let pol = build_ld_polaron(&p, space)?;
    let er = rot.eigenvalues()?;
    let ep = pol.eigenvalues()?;
    let spectrum_difference = er
        .iter()
        .zip(ep.iter())
        .take(c.levels)
        .map(|(a, b)| (a - b - p.polaron_shift()).abs())
        .fold(0.0, f64::max);
    let full = two_phonon_population(&rot, times)?;
    let eff = build_ld_effective(2, &c.params(centre), space)?;
    let effective = two_phonon_population(&eff, times)?;
    let max_difference = full.iter().zip(&effective).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Run { delta_star: cross.omega_star, gap: cross.gap, spectrum_difference, full, effective, max_difference })
}

pub(super) fn run(c: &LambDickeConfig) -> Result<Report> {
    let rate = ld_rate(2, c.lambda, c.omega, c.omega_r)?.rate;
    let coupling = rate.abs() * 2f64.sqrt();
    let period = std::f64::consts::PI / coupling;
    let times = linspace(0.0, period, c.points);
    let base = simulate(c, c.cutoff, &times)?;
    let finer = simulate(c, c.cutoff + 5, &times)?;

    let peak = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
    let mut report = Report::new(serde_json::json!({
        "eta": c.params(0.0).eta(),
        "lambda2": rate,
        "rabi_period": period,
        "delta_star": base.delta_star,
        "delta_star_offset": base.delta_star - 2.0 * c.omega_r,
        "gap": base.gap,
        "predicted_gap": 2.0 * coupling,
        "spectrum_difference": base.spectrum_difference,
        "max_population_difference": base.max_difference,
        "peak_full": peak(&base.full),
        "peak_effective": peak(&base.effective),
    }));
    report.checks.push(Check::below(
        "rotating vs polaron spectrum",
        base.spectrum_difference,
        c.spectrum_tolerance,
    ));
    report.checks.push(Check::below(
        "two-phonon population full vs effective",
        base.max_difference,
        c.dynamics_tolerance,
    ));
    report.gates.push(Gate::new("max population difference", c.cutoff, base.max_difference, finer.max_difference));
    report.file("ld_dynamics.csv", csv(&["t", "P2_full", "P2_effective"], &[&times, &base.full, &base.effective]));
    Ok(report)
}

use serde::{Deserialize, Serialize};

use super::{at_least, invalid, non_negative, positive, Check, Gate, IntegratorConfig, Report};
use crate::dynamics::{make_model, steady_state, DissipationParams, LindbladModel, SteadyOptions, Variant};
use crate::error::Result;
use crate::hilbert::HilbertSpace;
use crate::model::{build_ld_effective, LDParams};
use crate::observables::{correlation_from_steady, CorrelationSeries};
use crate::perturbation::ld_rate;
use crate::spectra::linspace;

/// Expected photon statistics, selecting which checks apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// g_1(0) > 1 and g_2(0) > 1.
    Bunched,
    /// g_2(0) < 1 and g_2(tau) > g_2(0) at the small delays.
    Antibunched,
}

/// n-phonon correlations on the two-phonon blue sideband with engineered spin decay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationConfig {
    pub lambda: f64,
    /// Drive of the Lamb-Dicke model; sets lambda^(2) = omega eta^2 / 2.
    pub omega: f64,
    pub omega_r: f64,
    pub gamma_s: f64,
    /// (n_th + 1) gamma_m of the cooled resonator.
    pub damping: f64,
    pub gamma_0: f64,
    pub cutoff: usize,
    pub orders: Vec<usize>,
    pub tau_max: f64,
    pub points: usize,
    /// Delays probed by the antibunching check.
    pub small_taus: Vec<f64>,
    pub expect: Option<Regime>,
    pub integrator: IntegratorConfig,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            omega: 2.0,
            omega_r: 20.0,
            gamma_s: 1.0,
            damping: 0.1,
            gamma_0: 0.1,
            cutoff: 15,
            orders: vec![1, 2],
            tau_max: 300.0,
            points: 61,
            small_taus: vec![1.0, 5.0, 10.0],
            expect: None,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl CorrelationConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("omega", self.omega)?;
        positive("omega_r", self.omega_r)?;
        if 2.0 * self.lambda >= self.omega_r {
            return Err(invalid("omega_r", "Lamb-Dicke parameter 2 lambda / omega_r must be < 1"));
        }
        non_negative("gamma_s", self.gamma_s)?;
        non_negative("damping", self.damping)?;
        non_negative("gamma_0", self.gamma_0)?;
        at_least("cutoff", self.cutoff, 5)?;
        if self.orders.is_empty() {
            return Err(invalid("orders", "need at least one order"));
        }
        for &n in &self.orders {
            at_least("orders", n, 1)?;
        }
        positive("tau_max", self.tau_max)?;
        at_least("points", self.points, 2)?;
        for &t in &self.small_taus {
            positive("small_taus", t)?;
        }
        self.integrator.validate()
    }

    fn params(&self) -> LDParams {
        LDParams::new(self.lambda, self.omega, 2.0 * self.omega_r, self.omega_r)
    }

    fn model(&self, cutoff: usize) -> Result<LindbladModel> {
        let space = HilbertSpace::qubit(cutoff)?;
        let h = build_ld_effective(2, &self.params(), space)?;
        let d = DissipationParams { gamma_s: self.gamma_s, gamma_m: self.damping, n_th: 0.0, gamma_0: self.gamma_0 };
        make_model(h, &d, Variant::Correlation)
    }

    fn taus(&self) -> Vec<f64> {
        let mut taus = linspace(0.0, self.tau_max, self.points);
        taus.extend(self.small_taus.iter().copied());
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        taus
    }
}

fn series(c: &CorrelationConfig, cutoff: usize) -> Result<(Vec<CorrelationSeries>, f64)> {
    let model = c.model(cutoff)?;
    let ss = steady_state(&model, &SteadyOptions::default())?;
    let rho = ss.state.density_matrix();
    let taus = c.taus();
    let out = c
        .orders
        .iter()
        .map(|&n| correlation_from_steady(&model, &rho, n, &taus, &c.integrator.evolve()))
        .collect::<Result<Vec<_>>>()?;
    Ok((out, ss.residual))
}

pub(super) fn run(c: &CorrelationConfig) -> Result<Report> {
    let lambda2 = ld_rate(2, c.lambda, c.omega, c.omega_r)?.rate;
    let (base, residual) = series(c, c.cutoff)?;
    let (finer, _) = series(c, c.cutoff + 5)?;

    let g0 = |n: usize| base.iter().find(|s| s.n == n).map(|s| s.g0);
    let mut report = Report::new(serde_json::json!({
        "lambda2": lambda2,
        "gamma_s_over_lambda2": c.gamma_s / lambda2,
        "damping_over_lambda2": c.damping / lambda2,
        "gamma_0_over_lambda2": c.gamma_0 / lambda2,
        "steady_residual": residual,
        "series": super::to_json(&base)?,
    }));

    for (s, f) in base.iter().zip(&finer) {
        report.gates.push(Gate::new(format!("g_{}(0)", s.n), c.cutoff, s.g0, f.g0));
    }
    match c.expect {
        Some(Regime::Bunched) => {
            for n in [1, 2] {
                if let Some(g) = g0(n) {
                    report.checks.push(Check::above(format!("g_{n}(0)"), g, 1.0));
                }
            }
        }
        Some(Regime::Antibunched) => {
            if let Some(s) = base.iter().find(|s| s.n == 2) {
                let first = s.taus.iter().zip(&s.values).find(|(t, g)| **t > 0.0 && **g > s.g0).map(|(t, _)| *t);
                report.results["g2_first_tau_above_g0"] = super::to_json(&first)?;
                report.checks.push(Check::below("g_2(0)", s.g0, 1.0));
                for &tau in &c.small_taus {
                    let k = s.taus.iter().position(|t| *t == tau).expect("tau grid contains small_taus");
                    report.checks.push(Check::above(
                        format!("g_2({tau}) - g_2(0)"),
                        s.values[k] - s.g0,
                        0.0,
                    ));
                }
            }
        }
        None => {}
    }

    let taus = c.taus();
    let mut header = vec!["tau".to_string()];
    header.extend(base.iter().map(|s| format!("g{}", s.n)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut cols: Vec<&[f64]> = vec![&taus];
    cols.extend(base.iter().map(|s| s.values.as_slice()));
    report.file("correlations.csv", super::csv(&header, &cols));
    Ok(report)
}

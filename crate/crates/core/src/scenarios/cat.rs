use serde::{Deserialize, Serialize};

use super::{at_least, csv, invalid, non_negative, positive, Check, Gate, IntegratorConfig, Report};
use crate::dynamics::{
    lindblad_evolve, make_model, mcwf_trajectory, steady_state, trajectory_ensemble, DissipationParams,
    LindbladModel, SteadyOptions, TrajectoryOptions, Variant,
};
use crate::error::{Error, Result};
use crate::hilbert::{cat_state, fock_op, FockKind, HilbertSpace, Parity, QuantumState};
use crate::model::{build_cat_interaction, qubit_level};
use crate::observables::{dark_state_residual, fringe_contrast, mean_phonon_number, parity_expectation, wigner, WignerSpec};
use crate::spectra::linspace;
use crate::C64;

/// A single photon-counting trajectory from |+,0>.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryConfig {
    pub t_final: f64,
    pub points: usize,
    pub seed: u64,
    /// Jumps before this time are ignored when picking the post-jump state.
    pub settle_time: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self { t_final: 1500.0, points: 301, seed: 7, settle_time: 500.0 }
    }
}

/// Ensemble average compared with the master equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub seed0: u64,
    pub t_final: f64,
    pub points: usize,
    /// Accepted deviation in standard errors.
    pub max_sigma: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { n_traj: 500, seed0: 1000, t_final: 1000.0, points: 21, max_sigma: 3.0 }
    }
}

/// Two-phonon cat-state stabilization under the red-sideband interaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CatConfig {
    /// Signed two-phonon coupling; beta^2 = -omega0 / lambda2 must be positive.
    pub lambda2: f64,
    pub omega0: f64,
    pub gamma_s: f64,
    /// (n_th + 1) gamma_m of the cooled resonator.
    pub damping: f64,
    pub cutoff: usize,
    /// Cutoff for the dark-state residuals.
    pub dark_cutoff: usize,
    pub wigner_half_width: f64,
    pub wigner_points: usize,
    pub n_tolerance: f64,
    pub dark_tolerance: f64,
    pub max_steady_contrast: f64,
    pub min_trajectory_contrast: f64,
    pub trajectory: Option<TrajectoryConfig>,
    pub ensemble: Option<EnsembleConfig>,
    pub integrator: IntegratorConfig,
}

impl Default for CatConfig {
    fn default() -> Self {
        Self {
            lambda2: -0.02,
            omega0: 0.2,
            gamma_s: 0.001,
            damping: 0.01,
            cutoff: 30,
            dark_cutoff: 45,
            wigner_half_width: 6.0,
            wigner_points: 71,
            n_tolerance: 0.1,
            dark_tolerance: 1e-6,
            max_steady_contrast: 0.1,
            min_trajectory_contrast: 0.5,
            trajectory: Some(TrajectoryConfig::default()),
            ensemble: None,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl CatConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-self.omega0 / self.lambda2 > 0.0) {
            return Err(invalid("lambda2", "need -omega0 / lambda2 > 0"));
        }
        non_negative("gamma_s", self.gamma_s)?;
        non_negative("damping", self.damping)?;
        at_least("cutoff", self.cutoff, 3)?;
        at_least("dark_cutoff", self.dark_cutoff, 3)?;
        positive("wigner_half_width", self.wigner_half_width)?;
        at_least("wigner_points", self.wigner_points, 2)?;
        if let Some(t) = &self.trajectory {
            positive("trajectory.t_final", t.t_final)?;
            at_least("trajectory.points", t.points, 2)?;
            non_negative("trajectory.settle_time", t.settle_time)?;
        }
        if let Some(e) = &self.ensemble {
            at_least("ensemble.n_traj", e.n_traj, 1)?;
            positive("ensemble.t_final", e.t_final)?;
            at_least("ensemble.points", e.points, 2)?;
            positive("ensemble.max_sigma", e.max_sigma)?;
        }
        self.integrator.validate()
    }

    pub fn beta(&self) -> f64 {
        (-self.omega0 / self.lambda2).sqrt()
    }

    fn model(&self, cutoff: usize) -> Result<LindbladModel> {
        let space = HilbertSpace::qubit(cutoff)?;
        let h = build_cat_interaction(self.lambda2, self.omega0, space)?;
        let d = DissipationParams { gamma_s: self.gamma_s, gamma_m: self.damping, n_th: 0.0, gamma_0: 0.0 };
        make_model(h, &d, Variant::Cat)
    }
}

#[derive(Clone, Debug, Serialize)]
struct JumpSummary {
    time: f64,
    parity_before: f64,
    parity_after: f64,
}

pub(super) fn run(c: &CatConfig) -> Result<Report> {
    let beta = c.beta();
    let mut checks = Vec::new();
    let mut gates = Vec::new();
    let mut files = Vec::new();
    let mut results = serde_json::Map::new();
    results.insert("beta_squared".into(), (beta * beta).into());

    // Dark states.
    let dark_space = HilbertSpace::qubit(c.dark_cutoff)?;
    let h_dark = build_cat_interaction(c.lambda2, c.omega0, dark_space)?;
    for parity in [Parity::Even, Parity::Odd] {
        let mech = cat_state(C64::new(beta, 0.0), parity, HilbertSpace::oscillator(c.dark_cutoff)?)?;
        let psi = QuantumState::product(dark_space, &qubit_level(1), mech.vector().expect("pure"))?;
        let r = dark_state_residual(&h_dark, &psi)?;
        let label = format!("{parity:?}").to_lowercase();
        results.insert(format!("dark_residual_{label}"), r.into());
        checks.push(Check::below(format!("dark residual {label} cat"), r, c.dark_tolerance));
    }

    // Steady state.
    let model = c.model(c.cutoff)?;
    let steady_opts = SteadyOptions::default();
    let ss = steady_state(&model, &steady_opts)?;
    let n_ss = mean_phonon_number(&ss.state);
    let ss_finer = steady_state(&c.model(c.cutoff + 5)?, &steady_opts)?;
    let n_finer = mean_phonon_number(&ss_finer.state);
    let contrast_ss = fringe_contrast(&ss.state)?;
    results.insert("steady_mean_phonons".into(), n_ss.into());
    results.insert("steady_parity".into(), parity_expectation(&ss.state).into());
    results.insert("steady_residual".into(), ss.residual.into());
    results.insert("steady_fringe_contrast".into(), contrast_ss.into());
    checks.push(Check::within_rel("steady <n>", n_ss, beta * beta, c.n_tolerance));
    checks.push(Check::below("steady fringe contrast", contrast_ss, c.max_steady_contrast));
    gates.push(Gate::new("steady <n>", c.cutoff, n_ss, n_finer));

    let spec = WignerSpec::square(c.wigner_half_width, c.wigner_points);
    let w = wigner(&ss.state, &spec)?;
    let mut warnings = w.warnings.clone();
    files.push(("wigner_steady.csv", w.to_csv()));

    let space = model.space();
    let number = fock_op(FockKind::Number, space);
    let parity = fock_op(FockKind::Parity, space);
    let psi0 = QuantumState::basis(space, 0, 0)?;

    if let Some(t) = &c.trajectory {
        let times = linspace(0.0, t.t_final, t.points);
        let me = lindblad_evolve(&model, &psi0.to_density(), &times, &c.integrator.evolve())?;
        let n_me = me.expect(&number)?;
        let opts = TrajectoryOptions { record_jump_states: true, ..TrajectoryOptions::default() };
        let rec = mcwf_trajectory(&model, &psi0, &times, t.seed, &[number.clone(), parity.clone()], &opts)?;
        files.push((
            "mean_phonons.csv",
            csv(&["t", "n_master", "n_trajectory", "parity_trajectory"], &[
                &times,
                &n_me,
                &rec.expectations[0],
                &rec.expectations[1],
            ]),
        ));

        let mut jumps = Vec::new();
        for j in rec.jumps.iter().filter(|j| j.label == "damping") {
            let before = QuantumState::pure_normalized(space, j.before.clone().expect("recorded"))?;
            let after = QuantumState::pure_normalized(space, j.after.clone().expect("recorded"))?;
            jumps.push((j.time, before, after));
        }
        let summary: Vec<JumpSummary> = jumps
            .iter()
            .map(|(time, b, a)| JumpSummary {
                time: *time,
                parity_before: parity_expectation(b),
                parity_after: parity_expectation(a),
            })
            .collect();
        let flips = summary.iter().filter(|s| s.parity_before * s.parity_after < 0.0).count();
        results.insert("phonon_jumps".into(), summary.len().into());
        results.insert("parity_flips".into(), flips.into());
        results.insert("jumps".into(), super::to_json(&summary)?);
        checks.push(Check::above("phonon jumps recorded", summary.len() as f64, 0.0));
        checks.push(Check::within_abs(
            "parity flips per phonon jump",
            if summary.is_empty() { 0.0 } else { flips as f64 / summary.len() as f64 },
            1.0,
            0.0,
        ));

        match jumps.iter().rev().find(|(time, _, _)| *time >= t.settle_time) {
            Some((time, before, after)) => {
                let contrast = fringe_contrast(after)?;
                results.insert("post_jump_time".into(), (*time).into());
                results.insert("post_jump_fringe_contrast".into(), contrast.into());
                results.insert("pre_jump_fringe_contrast".into(), fringe_contrast(before)?.into());
                checks.push(Check::above("post-jump fringe contrast", contrast, c.min_trajectory_contrast));
                let wb = wigner(before, &spec)?;
                let wa = wigner(after, &spec)?;
                warnings.extend(wa.warnings.iter().cloned());
                files.push(("wigner_before_jump.csv", wb.to_csv()));
                files.push(("wigner_after_jump.csv", wa.to_csv()));
            }
            None => {
                checks.push(Check::above("post-jump fringe contrast", 0.0, c.min_trajectory_contrast));
                warnings.push(format!("no phonon jump after t = {}", t.settle_time));
            }
        }
    }

    if let Some(e) = &c.ensemble {
        let times = linspace(0.0, e.t_final, e.points);
        let me = lindblad_evolve(&model, &psi0.to_density(), &times, &c.integrator.evolve())?;
        let n_me = me.expect(&number)?;
        let ens = trajectory_ensemble(&model, &psi0, &times, e.n_traj, e.seed0, &[number.clone()], &TrajectoryOptions::default())?;
        let (mean, se) = (&ens.mean[0], &ens.stderr[0]);
        let z: Vec<f64> =
            (0..times.len()).map(|i| (mean[i] - n_me[i]).abs() / (se[i] + 1e-9)).collect();
        let within = (0..times.len()).filter(|&i| (mean[i] - n_me[i]).abs() <= e.max_sigma * se[i] + 1e-9).count();
        let worst = z.iter().copied().fold(0.0, f64::max);
        results.insert("ensemble_worst_z".into(), worst.into());
        results.insert("ensemble_points_within".into(), within.into());
        checks.push(Check::within_abs(
            format!("ensemble within {} standard errors", e.max_sigma),
            (times.len() - within) as f64,
            0.0,
            0.0,
        ));
        files.push(("ensemble.csv", csv(&["t", "n_master", "n_ensemble", "stderr"], &[&times, &n_me, mean, se])));
    }

    warnings.dedup();
    let mut report = Report::new(serde_json::Value::Object(results));
    report.checks = checks;
    report.gates = gates;
    report.warnings = warnings;
    for (name, contents) in files {
        report.file(name, contents);
    }
    if report.checks.is_empty() {
        return Err(Error::InvalidArgument("cat scenario produced no checks".into()));
    }
    Ok(report)
}

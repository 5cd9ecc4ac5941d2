//! Python bindings: rates, crossings, master-equation models, states and scenario runs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use sidebands::device::DeviceParams;
use sidebands::dynamics::{self, DissipationParams, EvolveOptions, LindbladModel, SteadyOptions, Variant};
use sidebands::hilbert::{self, FockKind, HilbertSpace, Parity, QuantumState};
use sidebands::model::{self, LDParams, MollowParams};
use sidebands::observables::{self, WignerSpec};
use sidebands::{perturbation, spectra, Error};
use sidebands_cli::RunConfig;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::InvalidConfig { .. } | Error::CutoffTooSmall { .. } | Error::DimensionMismatch(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, x: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

fn variant(name: &str) -> PyResult<Variant> {
    match name {
        "cat" => Ok(Variant::Cat),
        "fock" => Ok(Variant::Fock),
        "correlation" => Ok(Variant::Correlation),
        _ => Err(PyValueError::new_err(format!("unknown variant `{name}` (cat, fock, correlation)"))),
    }
}

/// Closed-form n-phonon rate lambda^(n) at 2 Omega = n Delta_a.
#[pyfunction]
fn mollow_rate(n: usize, lambda_: f64, omega: f64) -> PyResult<f64> {
    Ok(perturbation::mollow_rate(n, lambda_, omega).map_err(err)?.rate)
}

/// Rate from the resolvent sum over virtual states.
#[pyfunction]
#[pyo3(signature = (n, lambda_, omega, delta_a=None))]
fn resolvent_rate(n: usize, lambda_: f64, omega: f64, delta_a: Option<f64>) -> PyResult<f64> {
    Ok(perturbation::resolvent_rate(n, lambda_, omega, delta_a).map_err(err)?.rate)
}

/// Lamb-Dicke n-phonon sideband rate.
#[pyfunction]
fn ld_rate(n: usize, lambda_: f64, omega: f64, omega_r: f64) -> PyResult<f64> {
    Ok(perturbation::ld_rate(n, lambda_, omega, omega_r).map_err(err)?.rate)
}

/// Avoided crossing of |+,0> and |-,n>; returns a dict with omega_star and gap.
#[pyfunction]
#[pyo3(signature = (n, lambda_, delta_a, cutoff, resolution=41))]
fn find_mollow_crossing(
    py: Python<'_>,
    n: usize,
    lambda_: f64,
    delta_a: f64,
    cutoff: usize,
    resolution: usize,
) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| spectra::find_mollow_crossing(n, lambda_, delta_a, cutoff, resolution)).map_err(err)?;
    to_py(py, &r)
}

#[pyclass(name = "State", frozen)]
struct PyState {
    inner: QuantumState,
}

#[pymethods]
impl PyState {
    /// |spin, fock> in a qubit-oscillator space.
    #[staticmethod]
    fn basis(cutoff: usize, spin: usize, fock: usize) -> PyResult<Self> {
        let space = HilbertSpace::qubit(cutoff).map_err(err)?;
        Ok(Self { inner: QuantumState::basis(space, spin, fock).map_err(err)? })
    }

    /// Oscillator cat state (|beta> + s|-beta>) / N with s = +1 for even.
    #[staticmethod]
    #[pyo3(signature = (beta, cutoff, even=true))]
    fn cat(beta: f64, cutoff: usize, even: bool) -> PyResult<Self> {
        let space = HilbertSpace::oscillator(cutoff).map_err(err)?;
        let parity = if even { Parity::Even } else { Parity::Odd };
        Ok(Self { inner: hilbert::cat_state(Complex64::new(beta, 0.0), parity, space).map_err(err)? })
    }

    #[staticmethod]
    fn coherent(beta: f64, cutoff: usize) -> PyResult<Self> {
        let space = HilbertSpace::oscillator(cutoff).map_err(err)?;
        Ok(Self { inner: hilbert::coherent_state(Complex64::new(beta, 0.0), space).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.space().dim()
    }

    #[getter]
    fn is_pure(&self) -> bool {
        self.inner.is_pure()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn mean_phonon_number(&self) -> f64 {
        observables::mean_phonon_number(&self.inner)
    }

    fn parity(&self) -> f64 {
        observables::parity_expectation(&self.inner)
    }

    fn number_populations(&self) -> Vec<f64> {
        observables::number_populations(&self.inner)
    }

    /// Interference-fringe contrast of the reduced oscillator state.
    fn fringe_contrast(&self) -> PyResult<f64> {
        observables::fringe_contrast(&self.inner).map_err(err)
    }

    /// Wigner function on a square grid; returns (axis, rows) with rows[i][j] at (x_i, p_j).
    fn wigner(&self, py: Python<'_>, half_width: f64, points: usize) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let spec = WignerSpec::square(half_width, points);
        let g = py.detach(|| observables::wigner(&self.inner, &spec)).map_err(err)?;
        Ok((g.x, g.values))
    }

    fn __repr__(&self) -> String {
        format!("State(dim={}, pure={})", self.inner.space().dim(), self.inner.is_pure())
    }
}

/// Hamiltonian plus dissipative channels.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: LindbladModel,
}

fn dissipation(gamma_s: f64, gamma_m: f64, n_th: f64, gamma_0: f64) -> DissipationParams {
    DissipationParams { gamma_s, gamma_m, n_th, gamma_0 }
}

#[pymethods]
impl PyModel {
    /// Effective n-phonon Mollow model with the thermal ("fock") channel set by default.
    #[staticmethod]
    #[pyo3(signature = (n, lambda_, omega, delta_a, cutoff, gamma_s=0.0, gamma_m=0.0, n_th=0.0, gamma_0=0.0, variant="fock"))]
    #[allow(clippy::too_many_arguments)]
    fn effective_mollow(
        n: usize,
        lambda_: f64,
        omega: f64,
        delta_a: f64,
        cutoff: usize,
        gamma_s: f64,
        gamma_m: f64,
        n_th: f64,
        gamma_0: f64,
        variant: &str,
    ) -> PyResult<Self> {
        let space = HilbertSpace::qubit(cutoff).map_err(err)?;
        let h = model::build_effective_mollow(n, &MollowParams::new(lambda_, omega, delta_a), None, space).map_err(err)?;
        let d = dissipation(gamma_s, gamma_m, n_th, gamma_0);
        Ok(Self { inner: dynamics::make_model(h, &d, self::variant(variant)?).map_err(err)? })
    }

    /// Full dressed Mollow model in the dressed spin basis.
    #[staticmethod]
    #[pyo3(signature = (lambda_, omega, delta_a, cutoff, gamma_s=0.0, gamma_m=0.0, n_th=0.0))]
    fn dressed_mollow(
        lambda_: f64,
        omega: f64,
        delta_a: f64,
        cutoff: usize,
        gamma_s: f64,
        gamma_m: f64,
        n_th: f64,
    ) -> PyResult<Self> {
        let space = HilbertSpace::qubit(cutoff).map_err(err)?;
        let h = model::build_dressed_mollow(&MollowParams::new(lambda_, omega, delta_a), space).map_err(err)?;
        let d = dissipation(gamma_s, gamma_m, n_th, 0.0);
        Ok(Self { inner: dynamics::make_model(h, &d, Variant::Fock).map_err(err)? })
    }

    /// Two-phonon cat interaction with cold damping.
    #[staticmethod]
    #[pyo3(signature = (lambda2, omega0, cutoff, gamma_s=0.0, damping=0.0))]
    fn cat(lambda2: f64, omega0: f64, cutoff: usize, gamma_s: f64, damping: f64) -> PyResult<Self> {
        let space = HilbertSpace::qubit(cutoff).map_err(err)?;
        let h = model::build_cat_interaction(lambda2, omega0, space).map_err(err)?;
        let d = dissipation(gamma_s, damping, 0.0, 0.0);
        Ok(Self { inner: dynamics::make_model(h, &d, Variant::Cat).map_err(err)? })
    }

    /// Effective Lamb-Dicke n-phonon sideband model with engineered spin decay.
    #[staticmethod]
    #[pyo3(signature = (n, lambda_, omega, omega_r, cutoff, gamma_s=0.0, damping=0.0, gamma_0=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn ld_effective(
        n: usize,
        lambda_: f64,
        omega: f64,
        omega_r: f64,
        cutoff: usize,
        gamma_s: f64,
        damping: f64,
        gamma_0: f64,
    ) -> PyResult<Self> {
        let space = HilbertSpace::qubit(cutoff).map_err(err)?;
        let p = LDParams::new(lambda_, omega, n as f64 * omega_r, omega_r);
        let h = model::build_ld_effective(n, &p, space).map_err(err)?;
        let d = dissipation(gamma_s, damping, 0.0, gamma_0);
        Ok(Self { inner: dynamics::make_model(h, &d, Variant::Correlation).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.space().dim()
    }

    #[getter]
    fn cutoff(&self) -> usize {
        self.inner.space().fock_cutoff()
    }

    /// Hamiltonian eigenvalues in ascending order.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(self.inner.hamiltonian().eigenvalues().map_err(err)?.to_vec())
    }

    /// Master-equation evolution; returns the states at `times`.
    fn evolve(&self, py: Python<'_>, initial: &PyState, times: Vec<f64>) -> PyResult<Vec<PyState>> {
        let rho0 = initial.inner.to_density();
        let ev = py
            .detach(|| dynamics::lindblad_evolve(&self.inner, &rho0, &times, &EvolveOptions::default()))
            .map_err(err)?;
        Ok(ev.states.into_iter().map(|inner| PyState { inner }).collect())
    }

    fn steady_state(&self, py: Python<'_>) -> PyResult<PyState> {
        let ss = py.detach(|| dynamics::steady_state(&self.inner, &SteadyOptions::default())).map_err(err)?;
        Ok(PyState { inner: ss.state })
    }

    /// Steady-state g_n(tau) for a sorted, non-negative tau grid.
    fn correlation(&self, py: Python<'_>, n: usize, taus: Vec<f64>) -> PyResult<Vec<f64>> {
        let s = py
            .detach(|| {
                observables::g2_generalized(&self.inner, n, &taus, &SteadyOptions::default(), &EvolveOptions::default())
            })
            .map_err(err)?;
        Ok(s.values)
    }

    /// Mean phonon number of one quantum-jump trajectory at `times`.
    fn trajectory_mean_phonons(&self, py: Python<'_>, initial: &PyState, times: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
        let number = hilbert::fock_op(FockKind::Number, self.inner.space());
        let rec = py
            .detach(|| {
                dynamics::mcwf_trajectory(&self.inner, &initial.inner, &times, seed, &[number], &Default::default())
            })
            .map_err(err)?;
        Ok(rec.expectations.into_iter().next().unwrap_or_default())
    }
}

/// Feasibility numbers (SI) for a silicon or diamond cantilever, as a dict.
#[pyfunction]
#[pyo3(signature = (material="silicon"))]
fn device_report(py: Python<'_>, material: &str) -> PyResult<Py<PyAny>> {
    let params = match material {
        "silicon" => DeviceParams::silicon(),
        "diamond" => DeviceParams::diamond(),
        _ => return Err(PyValueError::new_err(format!("unknown material `{material}` (silicon, diamond)"))),
    };
    to_py(py, &params.report().map_err(err)?)
}

/// Names of the bundled run configs.
#[pyfunction]
fn bundled_configs() -> Vec<&'static str> {
    sidebands_cli::bundled_names()
}

/// Run a bundled config name or TOML text; returns (summary dict, {file name: contents}).
#[pyfunction]
fn run_scenario(py: Python<'_>, config: &str) -> PyResult<(Py<PyAny>, BTreeMap<String, String>)> {
    let parsed = match sidebands_cli::bundled(config) {
        Some(src) => RunConfig::parse(src, config),
        None => RunConfig::parse(config, "<string>"),
    }
    .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py.detach(|| parsed.run()).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let files = report.files.iter().map(|f| (f.name.clone(), f.contents.clone())).collect();
    Ok((to_py(py, &report)?, files))
}

#[pymodule]
fn sidebands_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(mollow_rate, m)?)?;
    m.add_function(wrap_pyfunction!(resolvent_rate, m)?)?;
    m.add_function(wrap_pyfunction!(ld_rate, m)?)?;
    m.add_function(wrap_pyfunction!(find_mollow_crossing, m)?)?;
    m.add_function(wrap_pyfunction!(device_report, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_configs, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}

//! Master-equation propagation.
//!
//! The state is integrated in the interaction picture of the diagonal part
//! of H: rho_I = U0^dag rho U0 with U0 = exp(-i diag(H) t). This is an exact
//! change of variables that removes the fast bare phases from the ODE.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::integrate::{integrate, Tolerances};
use super::model::LindbladModel;
use super::ops::Op;
use crate::error::{Error, Result};
use crate::hilbert::{Operator, QuantumState};
use crate::linalg::{self, I, ZERO};

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub tolerances: Tolerances,
    pub interaction_picture: bool,
    /// Compute the smallest eigenvalue of every stored state.
    pub check_positivity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), interaction_picture: true, check_positivity: true }
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    /// Smallest density eigenvalue seen over the stored states.
    pub min_eigenvalue: f64,
    /// Largest |Tr rho(t) - Tr rho(0)|.
    pub max_trace_error: f64,
    pub steps: usize,
}

impl Evolution {
    pub fn expect(&self, op: &Operator) -> Result<Vec<f64>> {
        self.states.iter().map(|s| Ok(op.expectation(s)?.re)).collect()
    }

    pub fn last(&self) -> &QuantumState {
        self.states.last().expect("at least one output time")
    }
}

/// Generator kernel shared by the density and operator propagators.
pub(crate) struct Generator {
    energies: Array1<f64>,
    heff: Op,
    collapse: Vec<Op>,
    interaction: bool,
}

impl Generator {
    pub fn new(model: &LindbladModel, interaction: bool) -> Self {
        let d = model.space().dim();
        let mut heff = model.effective_hamiltonian();
        let energies = if interaction {
            let e = Array1::from_shape_fn(d, |i| model.hamiltonian().matrix()[[i, i]].re);
            for i in 0..d {
                heff[[i, i]] -= C64::new(e[i], 0.0);
            }
            e
        } else {
            Array1::zeros(d)
        };
        let collapse = model.scaled_collapse().iter().map(Op::new).collect();
        Self { energies, heff: Op::new(&heff), collapse, interaction }
    }

    fn phases(&self, t: f64) -> Array1<C64> {
        self.energies.mapv(|e| C64::from_polar(1.0, -e * t))
    }

    /// Schrodinger-picture matrix from the integration variable, and back.
    pub fn to_lab(&self, t: f64, x: &Array2<C64>) -> Array2<C64> {
        if !self.interaction {
            return x.clone();
        }
        let u = self.phases(t);
        Array2::from_shape_fn(x.raw_dim(), |(i, j)| u[i] * x[[i, j]] * u[j].conj())
    }

    pub fn from_lab(&self, t: f64, x: &Array2<C64>) -> Array2<C64> {
        if !self.interaction {
            return x.clone();
        }
        let u = self.phases(t);
        Array2::from_shape_fn(x.raw_dim(), |(i, j)| u[i].conj() * x[[i, j]] * u[j])
    }

    pub fn rhs(&self, t: f64, y: &Array2<C64>, dy: &mut Array2<C64>, scratch: &mut Array2<C64>) {
        let u = if self.interaction { Some(self.phases(t)) } else { None };
        let lab;
        let x = match &u {
            Some(u) => {
                lab = Array2::from_shape_fn(y.raw_dim(), |(i, j)| u[i] * y[[i, j]] * u[j].conj());
                &lab
            }
            None => y,
        };
        dy.fill(ZERO);
        self.heff.left(-I, x, dy);
        self.heff.right_dagger(I, x, dy);
        for c in &self.collapse {
            c.sandwich(x, scratch, dy);
        }
        if let Some(u) = &u {
            let d = dy.nrows();
            for i in 0..d {
                for j in 0..d {
                    dy[[i, j]] *= u[i].conj() * u[j];
                }
            }
        }
    }
}

pub fn lindblad_evolve(
    model: &LindbladModel,
    rho0: &QuantumState,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Evolution> {
    let space = model.space();
    if rho0.space() != space {
        return Err(Error::DimensionMismatch("initial state lives on a different space".into()));
    }
    if times.is_empty() {
        return Err(Error::InvalidArgument("no output times".into()));
    }
    let gen = Generator::new(model, opts.interaction_picture);
    let t0 = times[0];
    let y0 = gen.from_lab(t0, &rho0.density_matrix());
    let tr0 = linalg::trace(&y0).re;
    let d = space.dim();
    let mut scratch = Array2::zeros((d, d));
    let mut states = Vec::with_capacity(times.len());
    let mut min_eig = f64::INFINITY;
    let mut max_trace_error = 0.0_f64;
    let stats = integrate(
        |t, y, dy| gen.rhs(t, y, dy, &mut scratch),
        y0,
        times,
        &opts.tolerances,
        linalg::symmetrize,
        |k, y| {
            let rho = gen.to_lab(times[k], y);
            let tr = linalg::trace(&rho).re;
            let drift = (tr - tr0).abs();
            max_trace_error = max_trace_error.max(drift);
            if drift > 1e-8 {
                return Err(Error::Integration {
                    time: times[k],
                    reason: format!("trace drifted by {drift:e}"),
                });
            }
            if opts.check_positivity {
                let m = linalg::eigvalsh(&rho)?[0];
                if m < -1e-7 {
                    log::warn!("density eigenvalue {m:e} at t = {}", times[k]);
                }
                min_eig = min_eig.min(m);
            }
            states.push(QuantumState::density_unchecked(space, rho));
            Ok(())
        },
    )?;
    Ok(Evolution {
        times: times.to_vec(),
        states,
        min_eigenvalue: if opts.check_positivity { min_eig } else { f64::NAN },
        max_trace_error,
        steps: stats.accepted,
    })
}

/// Propagate an arbitrary operator X under the Liouvillian (no symmetrization).
pub fn evolve_operator(
    model: &LindbladModel,
    x0: &Array2<C64>,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<Array2<C64>>> {
    let d = model.space().dim();
    if x0.dim() != (d, d) {
        return Err(Error::DimensionMismatch(format!("operator {:?} vs dimension {d}", x0.dim())));
    }
    if times.is_empty() {
        return Err(Error::InvalidArgument("no output times".into()));
    }
    let gen = Generator::new(model, opts.interaction_picture);
    let y0 = gen.from_lab(times[0], x0);
    let mut scratch = Array2::zeros((d, d));
    let mut out = Vec::with_capacity(times.len());
    integrate(
        |t, y, dy| gen.rhs(t, y, dy, &mut scratch),
        y0,
        times,
        &opts.tolerances,
        |_| {},
        |k, y| {
            out.push(gen.to_lab(times[k], y));
            Ok(())
        },
    )?;
    Ok(out)
}

/// Tr[O X] for Hermitian O.
pub(crate) fn trace_product(o: &Array2<C64>, x: &Array2<C64>) -> C64 {
    let d = o.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += o[[i, j]] * x[[j, i]];
        }
    }
    acc
}

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::integrate::Tolerances;
use super::lindblad::{lindblad_evolve, EvolveOptions};
use super::model::LindbladModel;
use crate::error::{Error, Result};
use crate::hilbert::QuantumState;
use crate::linalg::{self, ONE, ZERO};

#[derive(Clone, Copy, Debug)]
pub struct SteadyOptions {
    /// Largest Hilbert-space dimension handled by the dense direct solve.
    pub max_direct_dim: usize,
    pub residual_tol: f64,
    /// Give up on propagation after this many multiples of the slowest rate's lifetime.
    pub max_lifetimes: f64,
    pub evolve: EvolveOptions,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            max_direct_dim: 72,
            residual_tol: 1e-9,
            max_lifetimes: 1e5,
            evolve: EvolveOptions {
                tolerances: Tolerances { rtol: 1e-11, atol: 1e-13, ..Tolerances::default() },
                check_positivity: false,
                ..EvolveOptions::default()
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    Direct,
    Propagation,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: QuantumState,
    /// Frobenius norm of L(rho_ss).
    pub residual: f64,
    pub method: SteadyMethod,
}

fn direct(model: &LindbladModel) -> Result<Array2<C64>> {
    let d = model.space().dim();
    let mut l = model.liouvillian();
    // Replace the first equation by Tr rho = 1.
    l.row_mut(0).fill(ZERO);
    for k in 0..d {
        l[[0, k * d + k]] = ONE;
    }
    let mut rhs = Array1::from_elem(d * d, ZERO);
    rhs[0] = ONE;
    let x = l.solve_into(rhs)?;
    // Column stacking: rho[i, j] = x[j d + i].
    Ok(Array2::from_shape_fn((d, d), |(i, j)| x[j * d + i]))
}

fn validate(model: &LindbladModel, rho: &mut Array2<C64>, tol: f64) -> Option<f64> {
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    if linalg::hermitian_deviation(rho) > 1e-6 {
        return None;
    }
    linalg::symmetrize(rho);
    let tr = linalg::trace(rho).re;
    rho.mapv_inplace(|z| z / tr);
    let min = linalg::eigvalsh(rho).ok()?[0];
    if min < -1e-8 {
        return None;
    }
    let res = linalg::frobenius(&model.apply(rho));
    (res < tol).then_some(res)
}

/// Steady state of the master equation.
///
/// Solves the vectorized Liouvillian with the trace condition. If that
/// fails validation (singular system, several stationary states, residual
/// above tolerance) the state is found by long-time propagation instead.
pub fn steady_state(model: &LindbladModel, opts: &SteadyOptions) -> Result<SteadyState> {
    let space = model.space();
    if space.dim() <= opts.max_direct_dim {
        match direct(model) {
            Ok(mut rho) => {
                if let Some(residual) = validate(model, &mut rho, opts.residual_tol) {
                    return Ok(SteadyState {
                        state: QuantumState::density_unchecked(space, rho),
                        residual,
                        method: SteadyMethod::Direct,
                    });
                }
                log::warn!("direct steady-state solve failed validation; propagating instead");
            }
            Err(e) => log::warn!("direct steady-state solve failed ({e}); propagating instead"),
        }
    } else {
        log::warn!("dimension {} above direct-solve limit; propagating", space.dim());
    }

    let slow = model.min_nonzero_rate().unwrap_or(1.0);
    let mut rho = QuantumState::maximally_mixed(space);
    let mut horizon = 10.0 / slow;
    let mut elapsed = 0.0;
    loop {
        let mut m = rho.density_matrix();
        linalg::symmetrize(&mut m);
        let res = linalg::frobenius(&model.apply(&m));
        if res < opts.residual_tol {
            return Ok(SteadyState { state: rho, residual: res, method: SteadyMethod::Propagation });
        }
        if elapsed * slow > opts.max_lifetimes {
            return Err(Error::NoConvergence(format!(
                "steady-state residual {res:e} after t = {elapsed}"
            )));
        }
        let ev = lindblad_evolve(model, &rho, &[0.0, horizon], &opts.evolve)?;
        rho = ev.last().clone();
        elapsed += horizon;
        horizon *= 2.0;
    }
}

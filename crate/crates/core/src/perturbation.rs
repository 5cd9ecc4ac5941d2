//! n-phonon coupling rates from the closed form and from the resolvent expansion.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::HilbertSpace;
use crate::linalg::{factorial, ZERO};
use crate::model::{build_dressed_mollow, MollowParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    ClosedForm,
    Resolvent,
    LambDicke,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub n: usize,
    pub rate: f64,
    pub method: RateMethod,
    pub subspace_dim: Option<usize>,
    /// Second-order energy shift of |+,0>, reported but not folded into the rate.
    pub shift: Option<f64>,
}

/// (-1)^(n-1) lambda^n / (2 ((n-1)!)^2) (n^2 / (4 Omega))^(n-1).
pub fn mollow_rate(n: usize, lambda: f64, omega: f64) -> Result<RateResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("phonon order must be >= 1".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("Omega must be > 0, got {omega}")));
    }
    let k = (n - 1) as i32;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let fact = factorial(n - 1);
    let nn = (n * n) as f64;
    let rate = sign * lambda.powi(n as i32) / (2.0 * fact * fact) * (nn / (4.0 * omega)).powi(k);
    Ok(RateResult { n, rate, method: RateMethod::ClosedForm, subspace_dim: None, shift: None })
}

fn ket_name(spin: usize, m: usize) -> String {
    format!("|{},{}>", if spin == 0 { '+' } else { '-' }, m)
}

/// Leading-order n-phonon rate between |+,0> and |-,n> by repeated resolvent insertions.
///
/// Unperturbed energies are m Delta_a ± Omega with Delta_a = 2 Omega / n unless
/// `delta_a` is given; a vanishing denominator is reported with the offending state.
pub fn resolvent_rate(n: usize, lambda: f64, omega: f64, delta_a: Option<f64>) -> Result<RateResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("phonon order must be >= 1".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("Omega must be > 0, got {omega}")));
    }
    let delta_a = delta_a.unwrap_or(2.0 * omega / n as f64);
    let space = HilbertSpace::qubit(n + 1)?;
    let coupling = MollowParams { lambda, omega: 0.0, delta_a: 0.0, ..MollowParams::default() };
    let v = build_dressed_mollow(&coupling, space)?.into_matrix();
    let dim = space.dim();
    let energy = |idx: usize| -> f64 {
        let (spin, m) = (idx / (n + 1), idx % (n + 1));
        m as f64 * delta_a + if spin == 0 { omega } else { -omega }
    };
    let start = space.index(1, n);
    let target = space.index(0, 0);
    let e_i = energy(start);
    let scale = omega.abs().max(delta_a.abs()).max(1.0);

    let resolve = |y: &Array1<C64>| -> Result<Array1<C64>> {
        let mut out = Array1::from_elem(dim, ZERO);
        for q in 0..dim {
            if q == start || q == target {
                continue;
            }
            if y[q] == ZERO {
                continue;
            }
            let denom = e_i - energy(q);
            if denom.abs() < 1e-12 * scale {
                return Err(Error::DegenerateState(ket_name(q / (n + 1), q % (n + 1))));
            }
            out[q] = y[q] / denom;
        }
        Ok(out)
    };

    let mut y = Array1::from_elem(dim, ZERO);
    y[start] = C64::new(1.0, 0.0);
    for _ in 1..n {
        y = resolve(&v.dot(&y))?;
    }
    let amp = v.dot(&y)[target];
    let rate = amp.re / factorial(n).sqrt();

    let mut e0 = Array1::from_elem(dim, ZERO);
    e0[target] = C64::new(1.0, 0.0);
    let v0 = v.dot(&e0);
    let mut shift = 0.0;
    for q in 0..dim {
        if q == target || q == start || v0[q] == ZERO {
            continue;
        }
        let denom = energy(target) - energy(q);
        if denom.abs() >= 1e-12 * scale {
            shift += v0[q].norm_sqr() / denom;
        }
    }

    Ok(RateResult {
        n,
        rate,
        method: RateMethod::Resolvent,
        subspace_dim: Some(dim),
        shift: Some(shift),
    })
}

/// (Omega / n!) (2 lambda / omega_r)^n.
pub fn ld_rate(n: usize, lambda: f64, omega: f64, omega_r: f64) -> Result<RateResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("phonon order must be >= 1".into()));
    }
    let eta = 2.0 * lambda / omega_r;
    if !(eta.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("2 lambda / omega_r = {eta} must be < 1")));
    }
    let rate = omega / factorial(n) * eta.powi(n as i32);
    Ok(RateResult { n, rate, method: RateMethod::LambDicke, subspace_dim: None, shift: None })
}

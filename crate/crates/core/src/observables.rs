//! Populations, parity, Wigner maps, cat fidelity, dark-state residuals and
//! generalized n-phonon correlation functions.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_operator, steady_state, trace_product, EvolveOptions, LindbladModel, SteadyOptions};
use crate::error::{Error, Result};
use crate::hilbert::{cat_amplitudes, fock_op, FockKind, Operator, Parity, QuantumState};
use crate::linalg::{self, ZERO};

/// P(n) = <n| Tr_spin rho |n>.
pub fn number_populations(state: &QuantumState) -> Vec<f64> {
    state.reduced_fock().diag().iter().map(|z| z.re).collect()
}

/// <(-1)^n> of the mechanical mode.
pub fn parity_expectation(state: &QuantumState) -> f64 {
    number_populations(state)
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum()
}

pub fn mean_phonon_number(state: &QuantumState) -> f64 {
    number_populations(state).iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

/// Quadrature grid; alpha = (x + i p) / sqrt(2).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WignerSpec {
    pub x: Axis,
    pub p: Axis,
    /// Fock dimension used for the displacement operators; chosen from the grid if absent.
    pub padded_dim: Option<usize>,
}

impl WignerSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        let ax = Axis::new(-half_width, half_width, points);
        Self { x: ax, p: ax, padded_dim: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// values[i][j] = W(x[i], p[j]).
    pub values: Vec<Vec<f64>>,
    pub padded_dim: usize,
    pub warnings: Vec<String>,
}

impl WignerGrid {
    /// sum W dx dp / 2, equal to 1 for a normalized state on a wide enough grid.
    pub fn normalization(&self) -> f64 {
        let dx = if self.x.len() > 1 { self.x[1] - self.x[0] } else { 0.0 };
        let dp = if self.p.len() > 1 { self.p[1] - self.p[0] } else { 0.0 };
        self.values.iter().flatten().sum::<f64>() * dx * dp / 2.0
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Bilinear interpolation at (x, p); None outside the grid.
    pub fn interpolate(&self, x: f64, p: f64) -> Option<f64> {
        let locate = |axis: &[f64], v: f64| -> Option<(usize, f64)> {
            if axis.len() < 2 || v < axis[0] || v > axis[axis.len() - 1] {
                return None;
            }
            let h = axis[1] - axis[0];
            let i = (((v - axis[0]) / h).floor() as usize).min(axis.len() - 2);
            Some((i, (v - axis[i]) / h))
        };
        let (i, fx) = locate(&self.x, x)?;
        let (j, fp) = locate(&self.p, p)?;
        let v = &self.values;
        Some(
            v[i][j] * (1.0 - fx) * (1.0 - fp)
                + v[i + 1][j] * fx * (1.0 - fp)
                + v[i][j + 1] * (1.0 - fx) * fp
                + v[i + 1][j + 1] * fx * fp,
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p,W\n");
        for (i, x) in self.x.iter().enumerate() {
            for (j, p) in self.p.iter().enumerate() {
                out.push_str(&format!("{x:.8e},{p:.8e},{:.12e}\n", self.values[i][j]));
            }
        }
        out
    }
}

/// Wigner function of the mechanical mode, W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag].
///
/// D(alpha) = R(phi) exp(-i |alpha| K) R(phi)^dag with K = i(a^dag - a) and
/// R(phi) = exp(i phi n); K is diagonalized once on a padded Fock space.
pub fn wigner(state: &QuantumState, spec: &WignerSpec) -> Result<WignerGrid> {
    let rho = state.reduced_fock();
    let n = rho.nrows();
    let xs = spec.x.values();
    let ps = spec.p.values();
    let r_max = xs
        .iter()
        .flat_map(|x| ps.iter().map(move |p| ((x * x + p * p) / 2.0).sqrt()))
        .fold(0.0, f64::max);

    let mut warnings = Vec::new();
    if r_max * r_max + 6.0 * r_max > n as f64 {
        let msg = format!(
            "grid reaches |alpha| = {r_max:.3}, beyond the region supported by cutoff {n} (|alpha|^2 + 6|alpha| > N)"
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let auto = (r_max + (n as f64).sqrt() + 4.0).powi(2).ceil() as usize;
    let m = spec.padded_dim.unwrap_or(auto).max(n);

    let a = crate::hilbert::fock_factor(FockKind::Annihilate, m);
    let k = (&crate::hilbert::fock_factor(FockKind::Create, m) - &a).mapv(|z| z * C64::new(0.0, 1.0));
    let (w, v) = linalg::eigh(&k)?;
    let v_top = v.slice(s![0..n, ..]).to_owned();
    let v_dag = linalg::dagger(&v);

    let point = |x: f64, p: f64| -> f64 {
        let alpha = C64::new(x, p) / 2f64.sqrt();
        let r = alpha.norm();
        let phi = alpha.arg();
        // Rows 0..n of exp(-i r K).
        let mut left = v_top.clone();
        for (col, wq) in left.columns_mut().into_iter().zip(w.iter()) {
            let ph = C64::from_polar(1.0, -r * wq);
            let mut col = col;
            col.mapv_inplace(|z| z * ph);
        }
        let dr = left.dot(&v_dag);
        // D_jm = e^{i phi (j - m)} (D_r)_jm for j < n.
        let b = Array2::from_shape_fn((n, m), |(j, mm)| {
            dr[[j, mm]] * C64::from_polar(1.0, phi * (j as f64 - mm as f64))
        });
        let rb = rho.dot(&b);
        let mut acc = 0.0;
        for mm in 0..m {
            let mut s = ZERO;
            for j in 0..n {
                s += b[[j, mm]].conj() * rb[[j, mm]];
            }
            acc += if mm % 2 == 0 { s.re } else { -s.re };
        }
        2.0 / std::f64::consts::PI * acc
    };

    let values: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ps.iter().map(|&p| point(x, p)).collect())
        .collect();
    Ok(WignerGrid { x: xs, p: ps, values, padded_dim: m, warnings })
}

/// |W(0)| / (W(beta) + W(-beta)) with beta = sqrt(<a^2>): 1 for an ideal cat,
/// 0 for a coherent state or an incoherent mixture of the two lobes.
pub fn fringe_contrast(state: &QuantumState) -> Result<f64> {
    let rho = state.reduced_fock();
    let n = rho.nrows();
    let a = crate::hilbert::fock_factor(FockKind::Annihilate, n);
    let a2 = a.dot(&a);
    let m2 = trace_product(&a2, &rho);
    let beta = m2.sqrt();
    let origin = WignerSpec {
        x: Axis::new(0.0, 0.0, 1),
        p: Axis::new(0.0, 0.0, 1),
        padded_dim: None,
    };
    let w0 = wigner(state, &origin)?.values[0][0];
    let lobe_spec = |b: C64| WignerSpec {
        x: Axis::new(b.re * 2f64.sqrt(), b.re * 2f64.sqrt(), 1),
        p: Axis::new(b.im * 2f64.sqrt(), b.im * 2f64.sqrt(), 1),
        padded_dim: None,
    };
    let l1 = wigner(state, &lobe_spec(beta))?.values[0][0];
    let l2 = wigner(state, &lobe_spec(-beta))?.values[0][0];
    let lobe = l1 + l2;
    if !(lobe > 0.0) {
        return Err(Error::InvalidArgument("no positive lobe at ±beta".into()));
    }
    Ok(w0.abs() / lobe)
}

/// Overlap of the mechanical state with the normalized cat of given parity.
pub fn cat_fidelity(state: &QuantumState, beta: C64, parity: Parity) -> Result<f64> {
    let rho = state.reduced_fock();
    let c = cat_amplitudes(beta, parity, rho.nrows())?;
    let rc = rho.dot(&c);
    let f: C64 = c.iter().zip(rc.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(f.re.clamp(0.0, 1.0))
}

/// ||H psi|| / max |H_ij|.
pub fn dark_state_residual(h: &Operator, state: &QuantumState) -> Result<f64> {
    let psi = state
        .vector()
        .ok_or_else(|| Error::InvalidArgument("dark-state residual needs a pure state".into()))?;
    if h.space() != state.space() {
        return Err(Error::DimensionMismatch("state and operator on different spaces".into()));
    }
    let hpsi = h.apply(psi);
    let scale = linalg::max_abs(h.matrix());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(crate::hilbert::vec_norm(&hpsi) / scale)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub n: usize,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub g0: f64,
    /// <a^dag^n a^n> in the steady state.
    pub moment: f64,
}

impl CorrelationSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,g\n");
        for (t, g) in self.taus.iter().zip(&self.values) {
            out.push_str(&format!("{t:.8e},{g:.12e}\n"));
        }
        out
    }
}

/// g_n(tau) = Tr[a^dag^n a^n B(tau)] / <a^dag^n a^n>^2 with B(0) = a^n rho_ss a^dag^n
/// propagated by the model's Liouvillian (quantum regression).
pub fn g2_generalized(
    model: &LindbladModel,
    n: usize,
    taus: &[f64],
    steady: &SteadyOptions,
    evolve: &EvolveOptions,
) -> Result<CorrelationSeries> {
    if n == 0 {
        return Err(Error::InvalidArgument("correlation order must be >= 1".into()));
    }
    if taus.iter().any(|t| *t < 0.0) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("tau grid must be non-negative and sorted".into()));
    }
    let ss = steady_state(model, steady)?;
    let rho = ss.state.density_matrix();
    correlation_from_steady(model, &rho, n, taus, evolve)
}

pub(crate) fn correlation_from_steady(
    model: &LindbladModel,
    rho: &Array2<C64>,
    n: usize,
    taus: &[f64],
    evolve: &EvolveOptions,
) -> Result<CorrelationSeries> {
    let space = model.space();
    let a = fock_op(FockKind::Annihilate, space).power(n as u32);
    let am = a.matrix();
    let amd = linalg::dagger(am);
    let o = amd.dot(am);
    let moment = trace_product(&o, rho).re;
    if moment < 1e-12 {
        return Err(Error::UndefinedCorrelation(moment));
    }
    let b0 = am.dot(rho).dot(&amd);
    let mut grid = vec![0.0];
    grid.extend(taus.iter().copied().filter(|t| *t > 0.0));
    let evolved = evolve_operator(model, &b0, &grid, evolve)?;
    let denom = moment * moment;
    let g_of = |b: &Array2<C64>| trace_product(&o, b).re / denom;
    let g0 = g_of(&evolved[0]);
    let mut values = Vec::with_capacity(taus.len());
    let mut next = 1;
    for t in taus {
        if *t == 0.0 {
            values.push(g0);
        } else {
            values.push(g_of(&evolved[next]));
            next += 1;
        }
    }
    Ok(CorrelationSeries { n, taus: taus.to_vec(), values, g0, moment })
}

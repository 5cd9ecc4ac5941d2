//! Truncated spin ⊗ Fock operator algebra.
//!
//! The spin factor always comes first: basis index `s * N + m` holds spin
//! level `s` and Fock number `m`. For the qubit, index 0 is the upper level
//! and index 1 the lower one, so `sigma_minus = |1><0|`.

use ndarray::{Array1, Array2, ArrayRef2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    spin_dim: usize,
    fock_cutoff: usize,
}

impl HilbertSpace {
    pub fn new(spin_dim: usize, fock_cutoff: usize) -> Result<Self> {
        if !(1..=3).contains(&spin_dim) {
            return Err(Error::InvalidArgument(format!(
                "spin_dim must be 1, 2 or 3, got {spin_dim}"
            )));
        }
        if fock_cutoff < 2 {
            return Err(Error::InvalidArgument(format!(
                "fock_cutoff must be at least 2, got {fock_cutoff}"
            )));
        }
        Ok(Self { spin_dim, fock_cutoff })
    }

    pub fn qubit(fock_cutoff: usize) -> Result<Self> {
        Self::new(2, fock_cutoff)
    }

    pub fn oscillator(fock_cutoff: usize) -> Result<Self> {
        Self::new(1, fock_cutoff)
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn dim(&self) -> usize {
        self.spin_dim * self.fock_cutoff
    }

    pub fn index(&self, spin: usize, fock: usize) -> usize {
        spin * self.fock_cutoff + fock
    }

    /// Same spin factor, different cutoff.
    pub fn with_cutoff(&self, fock_cutoff: usize) -> Result<Self> {
        Self::new(self.spin_dim, fock_cutoff)
    }

    fn check(&self, other: &HilbertSpace) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch(format!(
                "space {}x{} vs {}x{}",
                self.spin_dim, self.fock_cutoff, other.spin_dim, other.fock_cutoff
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FockKind {
    Annihilate,
    Create,
    Number,
    Parity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinKind {
    Sz,
    Sx,
    SigmaMinus,
    SigmaPlus,
    SigmaZ,
    SigmaX,
    Projector(usize, usize),
}

/// Matrix of a Fock-factor operator on |0>..|N-1>.
pub fn fock_factor(kind: FockKind, cutoff: usize) -> Array2<C64> {
    let mut m = Array2::zeros((cutoff, cutoff));
    match kind {
        FockKind::Annihilate => {
            for n in 1..cutoff {
                m[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
        FockKind::Create => {
            for n in 1..cutoff {
                m[[n, n - 1]] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
        FockKind::Number => {
            for n in 0..cutoff {
                m[[n, n]] = C64::new(n as f64, 0.0);
            }
        }
        FockKind::Parity => {
            for n in 0..cutoff {
                m[[n, n]] = if n % 2 == 0 { ONE } else { -ONE };
            }
        }
    }
    m
}

/// Matrix of a spin-factor operator.
pub fn spin_factor(kind: SpinKind, spin_dim: usize) -> Result<Array2<C64>> {
    let need = |d: usize| -> Result<()> {
        if spin_dim != d {
            return Err(Error::DimensionMismatch(format!(
                "{kind:?} needs spin_dim {d}, space has {spin_dim}"
            )));
        }
        Ok(())
    };
    let mut m = Array2::zeros((spin_dim, spin_dim));
    match kind {
        SpinKind::Sz => {
            need(3)?;
            m[[0, 0]] = ONE;
            m[[2, 2]] = -ONE;
        }
        SpinKind::Sx => {
            need(3)?;
            let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            m[[0, 1]] = r;
            m[[1, 0]] = r;
            m[[1, 2]] = r;
            m[[2, 1]] = r;
        }
        SpinKind::SigmaMinus => {
            need(2)?;
            m[[1, 0]] = ONE;
        }
        SpinKind::SigmaPlus => {
            need(2)?;
            m[[0, 1]] = ONE;
        }
        SpinKind::SigmaZ => {
            need(2)?;
            m[[0, 0]] = ONE;
            m[[1, 1]] = -ONE;
        }
        SpinKind::SigmaX => {
            need(2)?;
            m[[0, 1]] = ONE;
            m[[1, 0]] = ONE;
        }
        SpinKind::Projector(i, j) => {
            if i >= spin_dim || j >= spin_dim {
                return Err(Error::DimensionMismatch(format!(
                    "projector ({i},{j}) outside spin_dim {spin_dim}"
                )));
            }
            m[[i, j]] = ONE;
        }
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct Operator {
    space: HilbertSpace,
    matrix: Array2<C64>,
    hermitian: Option<bool>,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "matrix {:?} on space of dimension {d}",
                matrix.dim()
            )));
        }
        Ok(Self { space, matrix, hermitian: None })
    }

    /// Wraps a matrix that must be Hermitian to 1e-12.
    pub fn hermitian(space: HilbertSpace, matrix: Array2<C64>) -> Result<Self> {
        let mut op = Self::new(space, matrix)?;
        let dev = linalg::hermitian_deviation(&op.matrix);
        if dev >= 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        op.hermitian = Some(true);
        Ok(op)
    }

    pub fn identity(space: HilbertSpace) -> Self {
        Self { space, matrix: linalg::identity(space.dim()), hermitian: Some(true) }
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self { space, matrix: Array2::zeros((d, d)), hermitian: Some(true) }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn hermitian_flag(&self) -> Option<bool> {
        self.hermitian
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() < 1e-12
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space,
            matrix: linalg::dagger(&self.matrix),
            hermitian: self.hermitian,
        }
    }

    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.space.check(&other.space)?;
        Ok(Self { space: self.space, matrix: self.matrix.dot(&other.matrix), hermitian: None })
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.space.check(&other.space)?;
        let hermitian = match (self.hermitian, other.hermitian) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        Ok(Self { space: self.space, matrix: &self.matrix + &other.matrix, hermitian })
    }

    pub fn scale(&self, c: C64) -> Self {
        let hermitian = if c.im == 0.0 { self.hermitian } else { None };
        Self { space: self.space, matrix: &self.matrix * c, hermitian }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn apply(&self, psi: &Array1<C64>) -> Array1<C64> {
        self.matrix.dot(psi)
    }

    pub fn power(&self, k: u32) -> Self {
        let mut m = linalg::identity(self.space.dim());
        for _ in 0..k {
            m = m.dot(&self.matrix);
        }
        Self { space: self.space, matrix: m, hermitian: None }
    }

    /// <O> in the given state.
    pub fn expectation(&self, state: &QuantumState) -> Result<C64> {
        self.space.check(&state.space)?;
        Ok(match &state.data {
            StateData::Pure(psi) => {
                let opsi = self.matrix.dot(psi);
                psi.iter().zip(opsi.iter()).map(|(a, b)| a.conj() * b).sum()
            }
            StateData::Density(rho) => {
                let mut acc = ZERO;
                for i in 0..rho.nrows() {
                    for j in 0..rho.ncols() {
                        acc += self.matrix[[i, j]] * rho[[j, i]];
                    }
                }
                acc
            }
        })
    }

    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        if !self.is_hermitian() {
            return Err(Error::NotHermitian(self.hermitian_deviation()));
        }
        linalg::eigvalsh(&self.matrix)
    }
}

/// Kronecker product with the spin factor first.
pub fn tensor(spin: &ArrayRef2<C64>, fock: &ArrayRef2<C64>, space: HilbertSpace) -> Result<Operator> {
    if spin.dim() != (space.spin_dim, space.spin_dim)
        || fock.dim() != (space.fock_cutoff, space.fock_cutoff)
    {
        return Err(Error::DimensionMismatch(format!(
            "factors {:?} and {:?} on space {}x{}",
            spin.dim(),
            fock.dim(),
            space.spin_dim,
            space.fock_cutoff
        )));
    }
    Operator::new(space, ndarray::linalg::kron(spin, fock))
}

pub fn fock_op(kind: FockKind, space: HilbertSpace) -> Operator {
    let f = fock_factor(kind, space.fock_cutoff);
    let id = linalg::identity(space.spin_dim);
    let mut op = Operator::new(space, ndarray::linalg::kron(&id, &f)).expect("shapes fixed by space");
    if matches!(kind, FockKind::Number | FockKind::Parity) {
        op.hermitian = Some(true);
    }
    op
}

pub fn spin_op(kind: SpinKind, space: HilbertSpace) -> Result<Operator> {
    let s = spin_factor(kind, space.spin_dim)?;
    let id = linalg::identity(space.fock_cutoff);
    let mut op = Operator::new(space, ndarray::linalg::kron(&s, &id))?;
    if matches!(kind, SpinKind::Sz | SpinKind::Sx | SpinKind::SigmaZ | SpinKind::SigmaX) {
        op.hermitian = Some(true);
    }
    Ok(op)
}

#[derive(Clone, Debug)]
pub enum StateData {
    Pure(Array1<C64>),
    Density(Array2<C64>),
}

#[derive(Clone, Debug)]
pub struct QuantumState {
    space: HilbertSpace,
    data: StateData,
}

impl QuantumState {
    /// Pure state; the vector must be normalized to 1e-10.
    pub fn pure(space: HilbertSpace, psi: Array1<C64>) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} on space of dimension {}",
                psi.len(),
                space.dim()
            )));
        }
        let norm = vec_norm(&psi);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { space, data: StateData::Pure(psi) })
    }

    /// Pure state from an arbitrary nonzero vector, normalized here.
    pub fn pure_normalized(space: HilbertSpace, psi: Array1<C64>) -> Result<Self> {
        let norm = vec_norm(&psi);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("null state".into()));
        }
        Self::pure(space, psi.mapv(|z| z / norm))
    }

    /// Density matrix; must be Hermitian, unit trace and positive to 1e-10.
    pub fn density(space: HilbertSpace, rho: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if rho.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "density {:?} on space of dimension {d}",
                rho.dim()
            )));
        }
        let dev = linalg::hermitian_deviation(&rho);
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let tr = linalg::trace(&rho);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("density trace {tr} differs from 1")));
        }
        let min = linalg::eigvalsh(&rho)?[0];
        if min < -1e-10 {
            return Err(Error::InvalidArgument(format!("density has eigenvalue {min:e}")));
        }
        Ok(Self { space, data: StateData::Density(rho) })
    }

    /// Solver output: trusted to integrator tolerance, not re-validated.
    pub(crate) fn density_unchecked(space: HilbertSpace, rho: Array2<C64>) -> Self {
        Self { space, data: StateData::Density(rho) }
    }

    pub(crate) fn pure_unchecked(space: HilbertSpace, psi: Array1<C64>) -> Self {
        Self { space, data: StateData::Pure(psi) }
    }

    /// |spin> ⊗ |fock>.
    pub fn basis(space: HilbertSpace, spin: usize, fock: usize) -> Result<Self> {
        if spin >= space.spin_dim || fock >= space.fock_cutoff {
            return Err(Error::InvalidArgument(format!(
                "basis state ({spin},{fock}) outside space"
            )));
        }
        let mut psi = Array1::zeros(space.dim());
        psi[space.index(spin, fock)] = ONE;
        Ok(Self { space, data: StateData::Pure(psi) })
    }

    /// Product of a spin vector and a Fock vector, normalized.
    pub fn product(space: HilbertSpace, spin: &Array1<C64>, fock: &Array1<C64>) -> Result<Self> {
        if spin.len() != space.spin_dim || fock.len() != space.fock_cutoff {
            return Err(Error::DimensionMismatch(format!(
                "factor lengths {} and {} on space {}x{}",
                spin.len(),
                fock.len(),
                space.spin_dim,
                space.fock_cutoff
            )));
        }
        let mut psi = Array1::zeros(space.dim());
        for s in 0..space.spin_dim {
            for m in 0..space.fock_cutoff {
                psi[space.index(s, m)] = spin[s] * fock[m];
            }
        }
        Self::pure_normalized(space, psi)
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.dim();
        let rho = Array2::from_diag_elem(d, C64::new(1.0 / d as f64, 0.0));
        Self { space, data: StateData::Density(rho) }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn vector(&self) -> Option<&Array1<C64>> {
        match &self.data {
            StateData::Pure(psi) => Some(psi),
            StateData::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Array2<C64> {
        match &self.data {
            StateData::Pure(psi) => outer(psi),
            StateData::Density(rho) => rho.clone(),
        }
    }

    pub fn to_density(&self) -> Self {
        Self { space: self.space, data: StateData::Density(self.density_matrix()) }
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(psi) => vec_norm(psi).powi(2),
            StateData::Density(rho) => linalg::trace(rho).re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(psi) => vec_norm(psi).powi(4),
            StateData::Density(rho) => rho.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// Partial trace over the spin factor.
    pub fn reduced_fock(&self) -> Array2<C64> {
        let n = self.space.fock_cutoff;
        let mut out = Array2::zeros((n, n));
        match &self.data {
            StateData::Pure(psi) => {
                for s in 0..self.space.spin_dim {
                    for i in 0..n {
                        let a = psi[self.space.index(s, i)];
                        if a == ZERO {
                            continue;
                        }
                        for j in 0..n {
                            out[[i, j]] += a * psi[self.space.index(s, j)].conj();
                        }
                    }
                }
            }
            StateData::Density(rho) => {
                for s in 0..self.space.spin_dim {
                    let off = s * n;
                    for i in 0..n {
                        for j in 0..n {
                            out[[i, j]] += rho[[off + i, off + j]];
                        }
                    }
                }
            }
        }
        out
    }

    /// Partial trace over the Fock factor.
    pub fn reduced_spin(&self) -> Array2<C64> {
        let s = self.space.spin_dim;
        let n = self.space.fock_cutoff;
        let rho = self.density_matrix();
        let mut out = Array2::zeros((s, s));
        for a in 0..s {
            for b in 0..s {
                for m in 0..n {
                    out[[a, b]] += rho[[a * n + m, b * n + m]];
                }
            }
        }
        out
    }
}

pub(crate) fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn outer(psi: &Array1<C64>) -> Array2<C64> {
    let d = psi.len();
    Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj())
}

/// Smallest cutoff admitted for a coherent amplitude `beta`.
pub fn required_cutoff(beta: C64) -> usize {
    let b2 = beta.norm_sqr();
    (b2 + 6.0 * (b2 + 1.0).sqrt()).floor() as usize + 1
}

/// Truncated and renormalized coherent-state amplitudes on |0>..|N-1>.
pub fn coherent_amplitudes(beta: C64, cutoff: usize) -> Result<Array1<C64>> {
    let required = required_cutoff(beta);
    if cutoff < required {
        return Err(Error::CutoffTooSmall { cutoff, required });
    }
    Ok(normalize(raw_coherent(beta, cutoff)))
}

fn raw_coherent(beta: C64, cutoff: usize) -> Array1<C64> {
    let mut c = Array1::zeros(cutoff);
    let mut term = C64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            term = term * beta / (n as f64).sqrt();
        }
        c[n] = term;
    }
    c
}

fn normalize(v: Array1<C64>) -> Array1<C64> {
    let norm = vec_norm(&v);
    v.mapv(|z| z / norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Normalized |beta> ± |-beta> amplitudes on the Fock factor.
pub fn cat_amplitudes(beta: C64, parity: Parity, cutoff: usize) -> Result<Array1<C64>> {
    let required = required_cutoff(beta);
    if cutoff < required {
        return Err(Error::CutoffTooSmall { cutoff, required });
    }
    if parity == Parity::Odd && beta.norm() == 0.0 {
        return Err(Error::InvalidArgument("odd cat with beta = 0 is the null state".into()));
    }
    let raw = raw_coherent(beta, cutoff);
    let keep = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let c = Array1::from_shape_fn(cutoff, |n| if n % 2 == keep { raw[n] } else { ZERO });
    let norm = vec_norm(&c);
    if norm < 1e-300 {
        return Err(Error::InvalidArgument("cat amplitude underflow".into()));
    }
    Ok(c.mapv(|z| z / norm))
}

fn oscillator_only(space: HilbertSpace) -> Result<()> {
    if space.spin_dim != 1 {
        return Err(Error::DimensionMismatch(format!(
            "phonon state needs spin_dim 1, space has {}; use QuantumState::product",
            space.spin_dim
        )));
    }
    Ok(())
}

pub fn coherent_state(beta: C64, space: HilbertSpace) -> Result<QuantumState> {
    oscillator_only(space)?;
    Ok(QuantumState::pure_unchecked(space, coherent_amplitudes(beta, space.fock_cutoff)?))
}

pub fn cat_state(beta: C64, parity: Parity, space: HilbertSpace) -> Result<QuantumState> {
    oscillator_only(space)?;
    Ok(QuantumState::pure_unchecked(space, cat_amplitudes(beta, parity, space.fock_cutoff)?))
}

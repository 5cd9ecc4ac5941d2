use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{fock_op, spin_op, FockKind, HilbertSpace, Operator, SpinKind};
use crate::linalg::{self, I};

#[derive(Clone, Debug)]
pub struct Channel {
    pub rate: f64,
    pub op: Operator,
    pub label: String,
}

/// Hamiltonian plus rate-weighted collapse channels, D[O] rho = O rho O^dag - {O^dag O, rho}/2.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    hamiltonian: Operator,
    channels: Vec<Channel>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator, channels: Vec<Channel>) -> Result<Self> {
        let dev = hamiltonian.hermitian_deviation();
        if dev >= 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        for ch in &channels {
            if !(ch.rate >= 0.0) || !ch.rate.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "channel {} has invalid rate {}",
                    ch.label, ch.rate
                )));
            }
            if ch.op.space() != hamiltonian.space() {
                return Err(Error::DimensionMismatch(format!(
                    "channel {} lives on a different space",
                    ch.label
                )));
            }
        }
        Ok(Self { hamiltonian, channels })
    }

    pub fn unitary(hamiltonian: Operator) -> Result<Self> {
        Self::new(hamiltonian, Vec::new())
    }

    pub fn space(&self) -> HilbertSpace {
        self.hamiltonian.space()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Multiply the Hamiltonian and every rate by `s` (time measured in units of 1/s).
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        let channels = self
            .channels
            .iter()
            .map(|c| Channel { rate: c.rate * s, op: c.op.clone(), label: c.label.clone() })
            .collect();
        Self::new(self.hamiltonian.scale_re(s), channels)
    }

    pub fn min_nonzero_rate(&self) -> Option<f64> {
        self.channels.iter().map(|c| c.rate).filter(|r| *r > 0.0).reduce(f64::min)
    }

    /// Collapse operators with the rate folded in, sqrt(gamma) C.
    pub(crate) fn scaled_collapse(&self) -> Vec<Array2<C64>> {
        self.channels
            .iter()
            .filter(|c| c.rate > 0.0)
            .map(|c| c.op.matrix().mapv(|z| z * c.rate.sqrt()))
            .collect()
    }

    /// H - (i/2) sum gamma C^dag C.
    pub fn effective_hamiltonian(&self) -> Array2<C64> {
        let mut h = self.hamiltonian.matrix().clone();
        for c in self.scaled_collapse() {
            let cdc = linalg::dagger(&c).dot(&c);
            h.scaled_add(-0.5 * I, &cdc);
        }
        h
    }

    /// L(rho) = -i[H, rho] + sum gamma D[C] rho.
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let heff = self.effective_hamiltonian();
        let heff_d = linalg::dagger(&heff);
        let mut out = heff.dot(rho) * (-I) + rho.dot(&heff_d) * I;
        for c in self.scaled_collapse() {
            out = out + c.dot(rho).dot(&linalg::dagger(&c));
        }
        out
    }

    /// Column-stacked superoperator: vec(L rho) = L vec(rho).
    ///
    /// Assembled entry by entry to avoid d^4-sized temporaries:
    /// L = -i I⊗Heff + i conj(Heff)⊗I + sum conj(C)⊗C.
    pub fn liouvillian(&self) -> Array2<C64> {
        let d = self.space().dim();
        let heff = self.effective_hamiltonian();
        let mut l = Array2::zeros((d * d, d * d));
        for b in 0..d {
            for i in 0..d {
                for k in 0..d {
                    let h = heff[[i, k]];
                    if h != C64::new(0.0, 0.0) {
                        l[[b * d + i, b * d + k]] += -I * h;
                        l[[i * d + b, k * d + b]] += I * h.conj();
                    }
                }
            }
        }
        for c in self.scaled_collapse() {
            let nz: Vec<(usize, usize, C64)> = c
                .indexed_iter()
                .filter(|(_, z)| **z != C64::new(0.0, 0.0))
                .map(|((i, j), z)| (i, j, *z))
                .collect();
            for &(a, b, x) in &nz {
                for &(i, k, y) in &nz {
                    l[[a * d + i, b * d + k]] += x.conj() * y;
                }
            }
        }
        l
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    pub gamma_s: f64,
    pub gamma_m: f64,
    pub n_th: f64,
    pub gamma_0: f64,
}

impl DissipationParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_s", self.gamma_s),
            ("gamma_m", self.gamma_m),
            ("n_th", self.n_th),
            ("gamma_0", self.gamma_0),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Channel sets of the three master equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Spin dephasing and cold mechanical damping.
    Cat,
    /// Spin dephasing and thermal mechanical bath (emission and absorption).
    Fock,
    /// Spin dephasing, engineered spin decay and cold mechanical damping.
    Correlation,
}

pub fn make_model(h: Operator, d: &DissipationParams, variant: Variant) -> Result<LindbladModel> {
    d.validate()?;
    let space = h.space();
    let sz = spin_op(SpinKind::SigmaZ, space)?;
    let a = fock_op(FockKind::Annihilate, space);
    let ch = |rate: f64, op: Operator, label: &str| Channel { rate, op, label: label.to_string() };
    let mut channels = vec![ch(d.gamma_s, sz, "dephasing")];
    match variant {
        Variant::Cat => {}
        Variant::Fock => {
            channels.push(ch(d.n_th * d.gamma_m, fock_op(FockKind::Create, space), "absorption"));
        }
        Variant::Correlation => {
            channels.push(ch(d.gamma_0, spin_op(SpinKind::SigmaMinus, space)?, "spin_decay"));
        }
    }
    channels.push(ch((d.n_th + 1.0) * d.gamma_m, a, "damping"));
    LindbladModel::new(h, channels)
}

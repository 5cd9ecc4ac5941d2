//! Rotating-frame Hamiltonians for the Mollow and Lamb-Dicke sideband chains.
//!
//! Qubit spaces use index 0 for the upper level: |b> in the driven
//! Jaynes-Cummings form, |+> in the dressed form. Rates are angular
//! frequencies in whatever unit the caller picks (usually lambda = 1).

use ndarray::{array, Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{fock_factor, spin_factor, FockKind, HilbertSpace, Operator, SpinKind};
use crate::linalg::{self, ONE, ZERO};
use crate::perturbation;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollowParams {
    pub lambda: f64,
    pub omega: f64,
    pub delta_a: f64,
    pub omega_x: f64,
    pub delta: f64,
    pub omega_r: f64,
    pub zero_field: f64,
    pub delta_b: f64,
}

impl Default for MollowParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            omega: 5.0,
            delta_a: 5.0,
            omega_x: 0.0,
            delta: 0.0,
            omega_r: 0.0,
            zero_field: 0.0,
            delta_b: 0.0,
        }
    }
}

impl MollowParams {
    pub fn new(lambda: f64, omega: f64, delta_a: f64) -> Self {
        Self { lambda, omega, delta_a, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be > 0, got {}", self.lambda)));
        }
        Ok(())
    }

    /// Perturbative-validity flags; these never block a build.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.omega.abs() < 3.0 * self.lambda {
            out.push(format!(
                "Omega = {} is not much larger than lambda = {}",
                self.omega, self.lambda
            ));
        }
        if self.omega_x != 0.0 && self.delta.abs() < 3.0 * self.omega_x.abs() {
            out.push(format!(
                "Delta = {} is not much larger than Omega_x = {}",
                self.delta, self.omega_x
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LDParams {
    pub lambda: f64,
    pub omega: f64,
    pub delta: f64,
    pub omega_r: f64,
}

impl LDParams {
    pub fn new(lambda: f64, omega: f64, delta: f64, omega_r: f64) -> Self {
        Self { lambda, omega, delta, omega_r }
    }

    /// Lamb-Dicke parameter 2 lambda / omega_r.
    pub fn eta(&self) -> f64 {
        2.0 * self.lambda / self.omega_r
    }

    /// Constant offset between the rotating and polaron spectra.
    pub fn polaron_shift(&self) -> f64 {
        -self.lambda * self.lambda / self.omega_r
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DressedStates {
    pub theta: f64,
    pub omega_d: f64,
    pub omega_e: f64,
    pub omega_g: f64,
    pub omega_bd: f64,
    pub omega_bd_approx: f64,
    pub omega_dg: f64,
    pub omega_eg: f64,
    /// Spin-1 vectors in the (+1, 0, -1) basis.
    pub g: [f64; 3],
    pub d: [f64; 3],
    pub e: [f64; 3],
    pub b: [f64; 3],
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;
const BRIGHT: [f64; 3] = [SQRT_HALF, 0.0, SQRT_HALF];
const DARK: [f64; 3] = [SQRT_HALF, 0.0, -SQRT_HALF];

/// Dressed states of the spin triplet under an x drive Omega_x detuned by Delta.
pub fn dressed_states(delta: f64, omega_x: f64) -> Result<DressedStates> {
    if delta == 0.0 && omega_x == 0.0 {
        return Err(Error::InvalidArgument("Delta and Omega_x both zero".into()));
    }
    let theta = 0.5 * (2.0 * 2f64.sqrt() * omega_x).atan2(delta);
    let (s, c) = theta.sin_cos();
    let root = (delta * delta + 8.0 * omega_x * omega_x).sqrt();
    let omega_d = delta;
    let omega_e = 0.5 * (delta + root);
    let omega_g = 0.5 * (delta - root);
    let g = [-s * BRIGHT[0], c, -s * BRIGHT[2]];
    let e = [c * BRIGHT[0], s, c * BRIGHT[2]];
    Ok(DressedStates {
        theta,
        omega_d,
        omega_e,
        omega_g,
        omega_bd: omega_e - omega_d,
        omega_bd_approx: if delta != 0.0 { 2.0 * omega_x * omega_x / delta } else { f64::NAN },
        omega_dg: omega_d - omega_g,
        omega_eg: omega_e - omega_g,
        g,
        d: DARK,
        e,
        b: BRIGHT,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub delta_n: f64,
    pub delta_omega_bd: f64,
}

fn bright_dark_splitting(delta: f64, omega_x: f64, delta_n: f64) -> Result<f64> {
    let h: Array2<C64> = array![
        [C64::new(delta + delta_n, 0.0), C64::new(omega_x, 0.0), ZERO],
        [C64::new(omega_x, 0.0), ZERO, C64::new(omega_x, 0.0)],
        [ZERO, C64::new(omega_x, 0.0), C64::new(delta - delta_n, 0.0)],
    ];
    let (w, v) = linalg::eigh(&h)?;
    let overlap = |k: usize, target: &[f64; 3]| -> f64 {
        (0..3).map(|i| v[[i, k]] * target[i]).sum::<C64>().norm_sqr()
    };
    let pick = |target: &[f64; 3]| -> (usize, f64) {
        (0..3)
            .map(|k| (k, overlap(k, target)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    };
    let (kb, ob) = pick(&BRIGHT);
    let (kd, od) = pick(&DARK);
    let worst = ob.min(od);
    if worst < 0.5 || kb == kd {
        return Err(Error::AmbiguousState(worst));
    }
    Ok(w[kb] - w[kd])
}

/// Shift of the bright-dark splitting caused by a static drift delta_n S_z.
pub fn drift_shift(delta: f64, omega_x: f64, delta_n: f64) -> Result<DriftParams> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("Delta must be > 0, got {delta}")));
    }
    let base = bright_dark_splitting(delta, omega_x, 0.0)?;
    let shifted = bright_dark_splitting(delta, omega_x, delta_n)?;
    Ok(DriftParams { delta_n, delta_omega_bd: shifted - base })
}

fn require_qubit(space: HilbertSpace) -> Result<()> {
    if space.spin_dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "builder needs a qubit space, got spin_dim {}",
            space.spin_dim()
        )));
    }
    Ok(())
}

/// Sum of spin ⊗ fock terms with real coefficients.
struct Terms {
    space: HilbertSpace,
    acc: Array2<C64>,
}

impl Terms {
    fn new(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self { space, acc: Array2::zeros((d, d)) }
    }

    fn add(&mut self, coeff: f64, spin: &Array2<C64>, fock: &Array2<C64>) {
        if coeff == 0.0 {
            return;
        }
        let k = ndarray::linalg::kron(spin, fock);
        self.acc.scaled_add(C64::new(coeff, 0.0), &k);
    }

    fn finish(mut self) -> Result<Operator> {
        linalg::symmetrize(&mut self.acc);
        Operator::hermitian(self.space, self.acc)
    }
}

struct Factors {
    a: Array2<C64>,
    ad: Array2<C64>,
    n: Array2<C64>,
    id_f: Array2<C64>,
    sm: Array2<C64>,
    sp: Array2<C64>,
    sz: Array2<C64>,
    id_s: Array2<C64>,
}

impl Factors {
    fn qubit(space: HilbertSpace) -> Result<Self> {
        require_qubit(space)?;
        let n = space.fock_cutoff();
        Ok(Self {
            a: fock_factor(FockKind::Annihilate, n),
            ad: fock_factor(FockKind::Create, n),
            n: fock_factor(FockKind::Number, n),
            id_f: linalg::identity(n),
            sm: spin_factor(SpinKind::SigmaMinus, 2)?,
            sp: spin_factor(SpinKind::SigmaPlus, 2)?,
            sz: spin_factor(SpinKind::SigmaZ, 2)?,
            id_s: linalg::identity(2),
        })
    }

    fn a_pow(&self, k: usize) -> Array2<C64> {
        (0..k).fold(linalg::identity(self.a.nrows()), |acc, _| acc.dot(&self.a))
    }

    fn ad_pow(&self, k: usize) -> Array2<C64> {
        (0..k).fold(linalg::identity(self.a.nrows()), |acc, _| acc.dot(&self.ad))
    }
}

/// Delta_a n + lambda (a s^dag + a^dag s) + Omega (s + s^dag).
pub fn build_driven_jc(p: &MollowParams, space: HilbertSpace) -> Result<Operator> {
    let f = Factors::qubit(space)?;
    let mut t = Terms::new(space);
    t.add(p.delta_a, &f.id_s, &f.n);
    t.add(p.lambda, &f.sp, &f.a);
    t.add(p.lambda, &f.sm, &f.ad);
    t.add(p.omega, &(&f.sm + &f.sp), &f.id_f);
    t.finish()
}

/// Driven Jaynes-Cummings model rewritten in the |+>, |-> eigenbasis of the drive.
pub fn build_dressed_mollow(p: &MollowParams, space: HilbertSpace) -> Result<Operator> {
    let f = Factors::qubit(space)?;
    let m = &(&f.sm - &f.sp) + &f.sz;
    let md = linalg::dagger(&m);
    let mut t = Terms::new(space);
    t.add(p.delta_a, &f.id_s, &f.n);
    t.add(p.omega, &f.sz, &f.id_f);
    t.add(0.5 * p.lambda, &m, &f.ad);
    t.add(0.5 * p.lambda, &md, &f.a);
    t.finish()
}

/// Dressed-basis sigma_z of the bare |b>,|d> qubit, i.e. -(s + s^dag) on |+>,|->.
pub fn dressed_bare_sigma_z(space: HilbertSpace) -> Result<Operator> {
    let f = Factors::qubit(space)?;
    let mut t = Terms::new(space);
    t.add(-1.0, &(&f.sm + &f.sp), &f.id_f);
    t.finish()
}

/// Effective n-phonon Mollow Hamiltonian.
///
/// The coupling defaults to the closed-form n-phonon rate at the given Omega.
pub fn build_effective_mollow(
    n: usize,
    p: &MollowParams,
    rate_override: Option<f64>,
    space: HilbertSpace,
) -> Result<Operator> {
    if n == 0 {
        return Err(Error::InvalidArgument("phonon order must be >= 1".into()));
    }
    if space.fock_cutoff() <= 4 * n {
        return Err(Error::CutoffTooSmall { cutoff: space.fock_cutoff(), required: 4 * n + 1 });
    }
    let rate = match rate_override {
        Some(r) => r,
        None => perturbation::mollow_rate(n, p.lambda, p.omega)?.rate,
    };
    let f = Factors::qubit(space)?;
    let mut t = Terms::new(space);
    t.add(p.delta_a, &f.id_s, &f.n);
    t.add(p.omega, &f.sz, &f.id_f);
    t.add(rate, &f.sp, &f.a_pow(n));
    t.add(rate, &f.sm, &f.ad_pow(n));
    t.finish()
}

/// (-delta/2) s_z + omega_r n + lambda (a + a^dag) s_z + Omega (s + s^dag).
pub fn build_ld_rotating(p: &LDParams, space: HilbertSpace) -> Result<Operator> {
    let f = Factors::qubit(space)?;
    let mut t = Terms::new(space);
    t.add(-0.5 * p.delta, &f.sz, &f.id_f);
    t.add(p.omega_r, &f.id_s, &f.n);
    t.add(p.lambda, &f.sz, &(&f.a + &f.ad));
    t.add(p.omega, &(&f.sm + &f.sp), &f.id_f);
    t.finish()
}

/// exp(eta (a^dag - a)) on the truncated Fock factor.
pub fn displacement_factor(eta: f64, cutoff: usize) -> Result<Array2<C64>> {
    let a = fock_factor(FockKind::Annihilate, cutoff);
    let ad = fock_factor(FockKind::Create, cutoff);
    // eta (a^dag - a) = -i K with K = i eta (a^dag - a) Hermitian.
    let k = (&ad - &a).mapv(|z| z * C64::new(0.0, eta));
    linalg::expm_hermitian(&k, 1.0)
}

/// Polaron-frame Lamb-Dicke Hamiltonian.
///
/// Its spectrum equals that of [`build_ld_rotating`] shifted by
/// [`LDParams::polaron_shift`], up to truncation.
pub fn build_ld_polaron(p: &LDParams, space: HilbertSpace) -> Result<Operator> {
    let f = Factors::qubit(space)?;
    let disp = displacement_factor(p.eta(), space.fock_cutoff())?;
    let disp_d = linalg::dagger(&disp);
    let mut t = Terms::new(space);
    t.add(-0.5 * p.delta, &f.sz, &f.id_f);
    t.add(p.omega_r, &f.id_s, &f.n);
    t.add(p.omega, &f.sp, &disp);
    t.add(p.omega, &f.sm, &disp_d);
    t.finish()
}

/// Blue-sideband effective Lamb-Dicke Hamiltonian of order n.
///
/// For the red sideband negate delta and swap the roles of s and s^dag.
pub fn build_ld_effective(n: usize, p: &LDParams, space: HilbertSpace) -> Result<Operator> {
    if n == 0 {
        return Err(Error::InvalidArgument("phonon order must be >= 1".into()));
    }
    let eta = p.eta();
    if eta.abs() >= 1.0 {
        return Err(Error::InvalidArgument(format!("|eta| = {} must be < 1", eta.abs())));
    }
    let rate = perturbation::ld_rate(n, p.lambda, p.omega, p.omega_r)?.rate;
    let f = Factors::qubit(space)?;
    let mut t = Terms::new(space);
    t.add(-0.5 * p.delta, &f.sz, &f.id_f);
    t.add(p.omega_r, &f.id_s, &f.n);
    t.add(rate, &f.sp, &f.ad_pow(n));
    t.add(rate, &f.sm, &f.a_pow(n));
    t.finish()
}

/// Two-phonon cat-state interaction lambda2 (a^2 s^dag + a^dag^2 s) + Omega0 (s^dag + s).
pub fn build_cat_interaction(lambda2: f64, omega0: f64, space: HilbertSpace) -> Result<Operator> {
    let f = Factors::qubit(space)?;
    let mut t = Terms::new(space);
    t.add(lambda2, &f.sp, &f.a_pow(2));
    t.add(lambda2, &f.sm, &f.ad_pow(2));
    t.add(omega0, &(&f.sm + &f.sp), &f.id_f);
    t.finish()
}

/// Spin vector of the dressed qubit level: 0 = |+>, 1 = |->.
pub fn qubit_level(level: usize) -> Array1<C64> {
    let mut v = Array1::from_elem(2, ZERO);
    v[level.min(1)] = ONE;
    v
}

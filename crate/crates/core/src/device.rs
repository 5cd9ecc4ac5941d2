//! Cantilever feasibility numbers in SI units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MollowParams;

/// CODATA 2018.
pub mod constants {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const K_B: f64 = 1.380_649e-23;
    pub const MU_B: f64 = 9.274_010_078_3e-24;
}

use constants::{HBAR, K_B, MU_B};

/// Euler-Bernoulli prefactor of the fundamental clamped-free flexural mode.
pub const MODE_FACTOR: f64 = 3.516;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    /// Length, width, thickness (m).
    pub l: f64,
    pub w: f64,
    pub t: f64,
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    /// Mass density (kg/m^3).
    pub density: f64,
    /// Magnetic field gradient at the spin (T/m).
    pub gradient: f64,
    /// Tip to spin distance (m); recorded, not used by the formulas.
    pub tip_distance: f64,
    /// Temperature (K).
    pub temperature: f64,
    #[serde(default = "default_g_s")]
    pub g_s: f64,
    /// Where the material constants come from.
    #[serde(default)]
    pub provenance: Option<String>,
}

fn default_g_s() -> f64 {
    2.0
}

impl DeviceParams {
    /// Silicon cantilever, 3.47 x 0.05 x 0.05 um, 10^7 T/m at 25 nm, 10 mK.
    pub fn silicon() -> Self {
        Self {
            l: 3.47e-6,
            w: 0.05e-6,
            t: 0.05e-6,
            youngs_modulus: 1.3e11,
            density: 2.33e3,
            gradient: 1e7,
            tip_distance: 25e-9,
            temperature: 10e-3,
            g_s: 2.0,
            provenance: Some("silicon: E = 1.3e11 Pa, rho = 2.33e3 kg/m^3".into()),
        }
    }

    /// Single-crystal diamond beam, 20 x 8 x 0.8 um.
    pub fn diamond() -> Self {
        Self {
            l: 20e-6,
            w: 8e-6,
            t: 0.8e-6,
            youngs_modulus: 1.05e12,
            density: 3515.0,
            gradient: 1e7,
            tip_distance: 25e-9,
            temperature: 10e-3,
            g_s: 2.0,
            provenance: Some(
                "diamond: E = 1.05e12 Pa and rho = 3515 kg/m^3 from standard handbook values".into(),
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l", self.l),
            ("w", self.w),
            ("t", self.t),
            ("youngs_modulus", self.youngs_modulus),
            ("density", self.density),
            ("gradient", self.gradient),
            ("tip_distance", self.tip_distance),
            ("g_s", self.g_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// rho l w t / 4 (kg).
    pub fn effective_mass(&self) -> f64 {
        self.density * self.l * self.w * self.t / 4.0
    }

    /// Scale that maps this device's lambda to 1.
    pub fn unit_scale(&self) -> UnitScale {
        UnitScale { lambda: magnetic_coupling(self) }
    }

    pub fn report(&self) -> Result<FeasibilityReport> {
        self.validate()?;
        let omega_r = fundamental_frequency(self);
        let lambda = magnetic_coupling(self);
        let two_pi = 2.0 * std::f64::consts::PI;
        Ok(FeasibilityReport {
            omega_r,
            omega_r_hz: omega_r / two_pi,
            m_eff: self.effective_mass(),
            a0: zero_point_amplitude(self),
            lambda,
            lambda_hz: lambda / two_pi,
            n_th: thermal_occupation(omega_r, self.temperature),
            omega_r_over_lambda: omega_r / lambda,
            provenance: self.provenance.clone(),
        })
    }
}

/// omega_r = 3.516 (t / l^2) sqrt(E / 12 rho)  (rad/s).
pub fn fundamental_frequency(d: &DeviceParams) -> f64 {
    MODE_FACTOR * d.t / (d.l * d.l) * (d.youngs_modulus / (12.0 * d.density)).sqrt()
}

/// a0 = sqrt(hbar / (2 m_eff omega_r))  (m).
pub fn zero_point_amplitude(d: &DeviceParams) -> f64 {
    zero_point_from(d.effective_mass(), fundamental_frequency(d))
}

pub fn zero_point_from(m_eff: f64, omega_r: f64) -> f64 {
    (HBAR / (2.0 * m_eff * omega_r)).sqrt()
}

/// lambda = g_s mu_B G_m a0 / hbar  (rad/s).
pub fn magnetic_coupling(d: &DeviceParams) -> f64 {
    d.g_s * MU_B * d.gradient * zero_point_amplitude(d) / HBAR
}

/// Bose occupation 1 / (exp(hbar omega / k_B T) - 1); zero at T = 0.
pub fn thermal_occupation(omega_r: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_r / (K_B * temperature);
    1.0 / x.exp_m1()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// rad/s
    pub omega_r: f64,
    pub omega_r_hz: f64,
    pub m_eff: f64,
    pub a0: f64,
    /// rad/s
    pub lambda: f64,
    pub lambda_hz: f64,
    pub n_th: f64,
    pub omega_r_over_lambda: f64,
    pub provenance: Option<String>,
}

/// Conversion between SI angular frequencies and model units (lambda = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitScale {
    /// rad/s per model unit.
    pub lambda: f64,
}

impl UnitScale {
    pub fn to_model(&self, omega_si: f64) -> f64 {
        omega_si / self.lambda
    }

    pub fn to_si(&self, x: f64) -> f64 {
        x * self.lambda
    }

    /// Model-unit parameters from SI drive settings (all rad/s).
    pub fn mollow_from_si(&self, si: &MollowParams) -> MollowParams {
        self.map(si, |x| self.to_model(x))
    }

    pub fn mollow_to_si(&self, p: &MollowParams) -> MollowParams {
        self.map(p, |x| self.to_si(x))
    }

    fn map(&self, p: &MollowParams, f: impl Fn(f64) -> f64) -> MollowParams {
        MollowParams {
            lambda: f(p.lambda),
            omega: f(p.omega),
            delta_a: f(p.delta_a),
            omega_x: f(p.omega_x),
            delta: f(p.delta),
            omega_r: f(p.omega_r),
            zero_field: f(p.zero_field),
            delta_b: f(p.delta_b),
        }
    }
}

/// MollowParams in model units for a device, with the given drive settings in rad/s.
pub fn device_mollow_params(
    d: &DeviceParams,
    omega: f64,
    delta_a: f64,
) -> Result<(MollowParams, UnitScale)> {
    d.validate()?;
    let scale = d.unit_scale();
    let si = MollowParams {
        lambda: scale.lambda,
        omega,
        delta_a,
        omega_r: fundamental_frequency(d),
        ..MollowParams::default()
    };
    Ok((scale.mollow_from_si(&si), scale))
}

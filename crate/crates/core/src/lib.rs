//! Multi-phonon sideband physics of a driven spin coupled to a mechanical resonator.
//!
//! Rotating-frame Hamiltonians, n-phonon rates, avoided-crossing spectra,
//! Lindblad and quantum-jump dynamics, phase-space and correlation observables,
//! and a device feasibility calculator.

extern crate blas_src;

pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod perturbation;
pub mod spectra;
pub mod dynamics;
pub mod observables;
pub mod device;
pub mod scenarios;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

//! Parametric down-conversion (PDC) as a primary radiation standard.
//!
//! The crate has two halves. The forward half models tilt-tuned type-I PDC in
//! a uniaxial crystal: refractive indices and phase matching ([`dispersion`]),
//! per-mode photon numbers in the spontaneous and high-gain regimes and their
//! radiometric conversion into detected counts ([`pdc_model`]), and a synthetic
//! tilt-scan generator with a known detector ([`synth`]). The inverse half
//! ([`calib`]) recovers a spectrometer's relative response from the envelope of
//! spontaneous spectra and its absolute efficiency from the distorted envelope
//! of high-gain spectra.
//!
//! All quantities in the public API are SI: wavelengths in metres, angles in
//! radians, energies in joules. Configuration and file formats use explicit
//! unit suffixes (`_nm`, `_deg`, ...).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calib;
pub mod constants;
pub mod dispersion;
mod error;
pub mod interp;
pub mod pdc_model;
pub mod synth;

pub use error::{Error, Result};

//! Wavelength dependence of the parametric gain along the tuning curve.
//!
//! At each phase-matched wavelength the squared gain G² picks up four
//! slowly varying factors relative to degeneracy: the index prefactor
//! 1/(n_s n_i n_p²), Miller's-rule dispersion of χ⁽²⁾, the longer path
//! through the tilted slab, and Fresnel losses at the entrance (pump, p) and
//! exit (signal, s) faces.

use crate::constants::idler_wavelength;
use crate::Result;

use super::crystal::{external_incidence, CrystalSpec};
use super::fresnel::{fresnel_transmission, Polarization};
use super::mismatch::phase_matching_internal_angle;

/// Per-factor contributions at one phase-matched wavelength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainFactors {
    pub wavelength_pm: f64,
    /// Slab tilt that phase matches `wavelength_pm` [rad].
    pub tilt: f64,
    pub index: f64,
    pub miller: f64,
    pub effective_length: f64,
    pub fresnel: f64,
}

impl GainFactors {
    /// Relative G² factor: the product of all contributions.
    pub fn total(&self) -> f64 {
        self.index * self.miller * self.effective_length * self.fresnel
    }

    fn scaled_by(self, r: &GainFactors) -> GainFactors {
        GainFactors {
            index: self.index / r.index,
            miller: self.miller / r.miller,
            effective_length: self.effective_length / r.effective_length,
            fresnel: self.fresnel / r.fresnel,
            ..self
        }
    }
}

/// Unnormalized factors at `wavelength`.
pub fn raw_gain_factors(wavelength: f64, crystal: &CrystalSpec, pump_wavelength: f64) -> Result<GainFactors> {
    let s = &crystal.sellmeier;
    let theta = phase_matching_internal_angle(wavelength, crystal, pump_wavelength)?;
    let refraction = theta - crystal.cut_angle;
    let np = crystal.pump_index(pump_wavelength, theta)?;
    let tilt = super::crystal::tilt_for_internal_angle(theta, crystal, pump_wavelength)?;
    let incidence = external_incidence(tilt, crystal, pump_wavelength)?;
    let ns = s.n_ordinary(wavelength)?;
    let ni = s.n_ordinary(idler_wavelength(wavelength, pump_wavelength))?;

    let chi1 = |n: f64| n * n - 1.0;
    let t_in = fresnel_transmission(1.0, np, incidence, Polarization::P)?;
    let t_out = fresnel_transmission(ns, 1.0, refraction, Polarization::S)?;
    Ok(GainFactors {
        wavelength_pm: wavelength,
        tilt,
        index: 1.0 / (ns * ni * np * np),
        miller: (chi1(np) * chi1(ns) * chi1(ni)).powi(2),
        effective_length: refraction.cos().powi(-2),
        fresnel: t_in * t_out,
    })
}

/// Gain factors normalized to 1 at λ = 2λ_p for every grid wavelength.
pub fn gain_dispersion_profile(
    wavelength_grid: &[f64],
    crystal: &CrystalSpec,
    pump_wavelength: f64,
) -> Result<Vec<GainFactors>> {
    let reference = raw_gain_factors(2.0 * pump_wavelength, crystal, pump_wavelength)?;
    wavelength_grid
        .iter()
        .map(|&l| {
            if l == 2.0 * pump_wavelength {
                return Ok(GainFactors {
                    index: 1.0,
                    miller: 1.0,
                    effective_length: 1.0,
                    fresnel: 1.0,
                    ..reference
                });
            }
            raw_gain_factors(l, crystal, pump_wavelength).map(|g| g.scaled_by(&reference))
        })
        .collect()
}

/// Relative G² at a single wavelength.
pub fn relative_gain_squared(wavelength: f64, crystal: &CrystalSpec, pump_wavelength: f64) -> Result<f64> {
    Ok(gain_dispersion_profile(&[wavelength], crystal, pump_wavelength)?[0].total())
}

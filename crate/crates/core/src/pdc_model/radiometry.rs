use std::f64::consts::PI;

use crate::constants::{angular_frequency, C, HBAR};
use crate::{Error, Result};

use super::pump::PumpSpec;

/// D(λ) = (2π)³ λ⁻⁴ [m⁻⁴].
pub fn mode_density(wavelength: f64) -> f64 {
    (2.0 * PI).powi(3) / wavelength.powi(4)
}

/// Solid angle of a circular pinhole of `diameter` at distance `focal_length`.
pub fn pinhole_solid_angle(diameter: f64, focal_length: f64) -> f64 {
    PI * (diameter / 2.0).powi(2) / (focal_length * focal_length)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionGeometry {
    /// ΔΩ [sr].
    pub solid_angle: f64,
    /// Δλ per pixel [m].
    pub pixel_bandwidth: f64,
    /// [s]
    pub acquisition_time: f64,
    /// m, pump pulses integrated per spectrum.
    pub pulses_per_acquisition: u64,
    /// τ_p [s].
    pub pulse_duration: f64,
    /// A_s [m²].
    pub source_area: f64,
    /// Γ = ΔΩ·Δλ·A_s·c·m·τ_p
    pub gamma: f64,
}

impl DetectionGeometry {
    pub fn new(solid_angle: f64, pixel_bandwidth: f64, acquisition_time: f64, pump: &PumpSpec) -> Result<Self> {
        let m = (pump.repetition_rate * acquisition_time).round();
        if !(m >= 1.0) {
            return Err(Error::Invalid(format!(
                "acquisition of {acquisition_time} s at {} Hz holds no pump pulse",
                pump.repetition_rate
            )));
        }
        Self::from_parts(
            solid_angle,
            pixel_bandwidth,
            acquisition_time,
            m as u64,
            pump.pulse_duration,
            pump.beam_area,
        )
    }

    pub fn from_parts(
        solid_angle: f64,
        pixel_bandwidth: f64,
        acquisition_time: f64,
        pulses_per_acquisition: u64,
        pulse_duration: f64,
        source_area: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("solid_angle", solid_angle),
            ("pixel_bandwidth", pixel_bandwidth),
            ("acquisition_time", acquisition_time),
            ("pulse_duration", pulse_duration),
            ("source_area", source_area),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("geometry {name} must be > 0, got {v}")));
            }
        }
        if pulses_per_acquisition < 1 {
            return Err(Error::Invalid("pulses_per_acquisition must be ≥ 1".into()));
        }
        let mut g = DetectionGeometry {
            solid_angle,
            pixel_bandwidth,
            acquisition_time,
            pulses_per_acquisition,
            pulse_duration,
            source_area,
            gamma: 0.0,
        };
        g.gamma = g.compute_gamma();
        Ok(g)
    }

    /// ⌀0.5 mm pinhole at f = 200 mm, 0.063 nm pixels, 500 ms frames.
    pub fn nominal(pump: &PumpSpec) -> Self {
        Self::new(pinhole_solid_angle(0.5e-3, 0.2), 0.063e-9, 0.5, pump).expect("valid defaults")
    }

    /// Emission duration τ_s = m τ_p.
    pub fn emission_time(&self) -> f64 {
        self.pulses_per_acquisition as f64 * self.pulse_duration
    }

    pub fn compute_gamma(&self) -> f64 {
        self.solid_angle * self.pixel_bandwidth * self.source_area * C * self.emission_time()
    }

    /// Copy with the source area and pulse duration scaled, Γ recomputed.
    pub fn perturbed(&self, pulse_duration_factor: f64, area_factor: f64) -> Self {
        let mut g = DetectionGeometry {
            pulse_duration: self.pulse_duration * pulse_duration_factor,
            source_area: self.source_area * area_factor,
            ..*self
        };
        g.gamma = g.compute_gamma();
        g
    }
}

/// Γ D(λ) (2π)⁻³ N = Γ λ⁻⁴ N.
pub fn detected_photons(wavelength: f64, per_mode_photons: f64, geometry: &DetectionGeometry) -> f64 {
    geometry.gamma * per_mode_photons / wavelength.powi(4)
}

/// ħω (2π)⁻³ c D(λ) N.
pub fn spectral_radiance(wavelength: f64, per_mode_photons: f64) -> f64 {
    HBAR * angular_frequency(wavelength) * C * per_mode_photons / wavelength.powi(4)
}

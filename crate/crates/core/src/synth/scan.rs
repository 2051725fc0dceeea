use rayon::prelude::*;

use crate::dispersion::{CrystalSpec, PlaneWaveMode, PumpWave};
use crate::pdc_model::{photons_from_gain, DetectionGeometry, GainParams, PumpSpec};
use crate::{Error, Result};

use super::noise::{spectrum_rng, NoiseModel};
use super::truth::DetectorTruth;

/// One spectrum of a tilt scan.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRecord {
    pub spectrum_id: u32,
    /// Pixel centre wavelengths [m].
    pub pixel_grid: Vec<f64>,
    pub counts: Vec<f64>,
    /// Slab tilt [rad].
    pub tilt: f64,
    /// Relative pump reading E_j, proportional to the pump field.
    pub pump_energy_reading: f64,
    /// [s]
    pub acquisition_time: f64,
}

impl SpectrumRecord {
    pub fn validate(&self) -> Result<()> {
        if self.counts.len() != self.pixel_grid.len() {
            return Err(Error::Invalid(format!(
                "spectrum {}: {} counts for {} pixels",
                self.spectrum_id,
                self.counts.len(),
                self.pixel_grid.len()
            )));
        }
        if self.counts.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Invalid(format!("spectrum {} has negative counts", self.spectrum_id)));
        }
        Ok(())
    }
}

/// Uniformly spaced tilts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltSchedule {
    pub start: f64,
    pub step: f64,
    pub steps: usize,
}

impl TiltSchedule {
    /// 411 steps of 0.01°, starting at zero tilt and rotating towards
    /// shorter signal wavelengths.
    pub fn nominal() -> Self {
        TiltSchedule {
            start: 0.0,
            step: -0.01f64.to_radians(),
            steps: 411,
        }
    }

    /// `steps` tilts spread evenly over `span` starting at `start`.
    pub fn spanning(start: f64, span: f64, steps: usize) -> Self {
        let step = if steps > 1 { span / (steps - 1) as f64 } else { 0.0 };
        TiltSchedule { start, step, steps }
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Expected counts for one tilt: α·R(λ)·Γ·λ⁻⁴·N(λ) per pixel, N from the
/// gain regime in `gain`. `gq` holds G·Q per pixel before drift.
#[allow(clippy::too_many_arguments)]
fn expected_counts(
    wave: &PumpWave,
    crystal: &CrystalSpec,
    geometry: &DetectionGeometry,
    efficiency: &[f64],
    grid: &[f64],
    gq: &[f64],
    drift: f64,
    gain: &GainParams,
) -> Result<Vec<f64>> {
    let half_l = crystal.thickness / 2.0;
    grid.iter()
        .zip(gq)
        .zip(efficiency)
        .map(|((&l, &g), &eta)| {
            let x = wave.mismatch(PlaneWaveMode::collinear(l), crystal)? * half_l;
            let n = photons_from_gain(g * drift, x, gain.regime);
            Ok(eta * geometry.gamma * n / l.powi(4))
        })
        .collect()
}

/// Synthetic spectra of a tilt scan seen through `truth`.
///
/// Drift factors multiply the gain of each spectrum and are recorded as the
/// pump reading `E_p · drift`. Noise is drawn from a stream keyed by the
/// spectrum id, so the result is independent of thread scheduling.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_tilt_scan(
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    geometry: &DetectionGeometry,
    truth: &DetectorTruth,
    gain: &GainParams,
    tilt_schedule: &[f64],
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<SpectrumRecord>> {
    if tilt_schedule.is_empty() {
        return Err(Error::Invalid("empty tilt schedule".into()));
    }
    let grid = &truth.pixel_grid;
    let spacing = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if (spacing / geometry.pixel_bandwidth - 1.0).abs() > 1e-3 {
        return Err(Error::Invalid(format!(
            "pixel spacing {:.4} nm differs from the pixel bandwidth {:.4} nm",
            spacing * 1e9,
            geometry.pixel_bandwidth * 1e9
        )));
    }
    let drift = noise.drift_factors(tilt_schedule.len(), seed)?;
    let efficiency = truth.efficiency();
    let gq: Vec<f64> = grid
        .iter()
        .map(|&l| gain.gain_q(l, crystal, pump.wavelength))
        .collect::<Result<_>>()?;

    tilt_schedule
        .par_iter()
        .enumerate()
        .map(|(j, &tilt)| {
            let wave = PumpWave::new(tilt, crystal, pump.wavelength)?;
            let mut counts = expected_counts(&wave, crystal, geometry, &efficiency, grid, &gq, drift[j], gain)?;
            if !noise.is_noiseless() {
                noise.apply(&mut counts, &mut spectrum_rng(seed, j as u64));
            }
            Ok(SpectrumRecord {
                spectrum_id: j as u32,
                pixel_grid: grid.clone(),
                counts,
                tilt,
                pump_energy_reading: pump.field_amplitude * drift[j],
                acquisition_time: geometry.acquisition_time,
            })
        })
        .collect()
}

use crate::interp;
use crate::{Error, Result};

/// The virtual spectrometer: efficiency η(λ) = α·R(λ) tabulated on its
/// pixel grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorTruth {
    /// Pixel centre wavelengths [m], strictly increasing.
    pub pixel_grid: Vec<f64>,
    /// R(λ) per pixel, normalized so that R(2λ_p) = 1.
    pub response_shape: Vec<f64>,
    pub scale_alpha: f64,
}

/// Uniform pixel centres `start, start + Δλ, ...` up to `stop`.
pub fn pixel_grid(start: f64, stop: f64, pixel_bandwidth: f64) -> Vec<f64> {
    let n = ((stop - start) / pixel_bandwidth + 1e-9).floor() as usize + 1;
    interp::uniform_grid(start, pixel_bandwidth, n)
}

impl DetectorTruth {
    pub fn new(pixel_grid: Vec<f64>, response_shape: Vec<f64>, scale_alpha: f64, pump_wavelength: f64) -> Result<Self> {
        if pixel_grid.len() != response_shape.len() || pixel_grid.len() < 2 {
            return Err(Error::Invalid("response and pixel grid lengths differ".into()));
        }
        if !interp::is_strictly_increasing(&pixel_grid) {
            return Err(Error::Invalid("pixel grid is not strictly increasing".into()));
        }
        if !(scale_alpha > 0.0 && scale_alpha <= 1.0) {
            return Err(Error::Invalid(format!("α must lie in (0, 1], got {scale_alpha}")));
        }
        if let Some(r) = response_shape.iter().find(|r| !(0.0..=1.5).contains(*r)) {
            return Err(Error::Invalid(format!("response value {r} outside [0, 1.5]")));
        }
        let at_norm = interp::linear(&pixel_grid, &response_shape, 2.0 * pump_wavelength)
            .ok_or_else(|| Error::Coverage("pixel grid does not contain 2λ_p".into()))?;
        if (at_norm - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("R(2λ_p) = {at_norm}, expected 1")));
        }
        Ok(DetectorTruth {
            pixel_grid,
            response_shape,
            scale_alpha,
        })
    }

    /// Tabulates `shape` on the grid and rescales it to 1 at 2λ_p.
    pub fn from_fn(
        pixel_grid: Vec<f64>,
        scale_alpha: f64,
        pump_wavelength: f64,
        shape: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let raw: Vec<f64> = pixel_grid.iter().map(|&l| shape(l)).collect();
        let norm = interp::linear(&pixel_grid, &raw, 2.0 * pump_wavelength)
            .ok_or_else(|| Error::Coverage("pixel grid does not contain 2λ_p".into()))?;
        if !(norm > 0.0) {
            return Err(Error::Invalid("response vanishes at 2λ_p".into()));
        }
        let response = raw.iter().map(|r| r / norm).collect();
        Self::new(pixel_grid, response, scale_alpha, pump_wavelength)
    }

    pub fn flat(pixel_grid: Vec<f64>, scale_alpha: f64, pump_wavelength: f64) -> Result<Self> {
        Self::from_fn(pixel_grid, scale_alpha, pump_wavelength, |_| 1.0)
    }

    pub fn efficiency(&self) -> Vec<f64> {
        self.response_shape.iter().map(|r| self.scale_alpha * r).collect()
    }
}

/// A grating-like smooth response: broad blaze peak with a slow tilt.
pub fn smooth_response(wavelength: f64) -> f64 {
    let x = (wavelength - 640e-9) / 260e-9;
    (0.55 + 0.45 * (-x * x).exp()) * (1.0 + 0.15 * (wavelength - 675e-9) / 225e-9)
}

/// Dichroic edge: transmission `high` below `edge`, `low` above it.
pub fn step_response(wavelength: f64, edge: f64, high: f64, low: f64) -> f64 {
    if wavelength < edge {
        high
    } else {
        low
    }
}

/// Smooth response times a dichroic step at `edge`.
pub fn structured_response(wavelength: f64, edge: f64) -> f64 {
    smooth_response(wavelength) * step_response(wavelength, edge, 1.0, 0.7)
}

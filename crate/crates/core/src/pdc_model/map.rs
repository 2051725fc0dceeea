//! Angular-spectral emission map D(λ)·N(λ, θ).

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dispersion::{CrystalSpec, PlaneWaveMode, PumpWave};
use crate::{Error, Result};

use super::photon::photons_from_gain;
use super::pump::{GainParams, PumpSpec};
use super::radiometry::mode_density;

#[derive(Clone, Debug, PartialEq)]
pub struct AngularSpectralMap {
    pub wavelengths: Vec<f64>,
    /// Internal polar angles [rad].
    pub angles: Vec<f64>,
    /// `values[i][j]` at `angles[i]`, `wavelengths[j]`.
    pub values: Vec<Vec<f64>>,
}

/// Internal emission angle of a far-field position `x` in the focal plane
/// of a lens of `focal_length`, for a crystal index `n`.
pub fn far_field_to_internal_angle(x: f64, focal_length: f64, n: f64) -> f64 {
    ((x / focal_length).atan().sin() / n).asin()
}

/// D(λ)·N over a (θ, λ) grid. Cells where the idler is evanescent are zero.
pub fn angular_spectral_map(
    wavelength_grid: &[f64],
    angle_grid: &[f64],
    tilt: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    gain: &GainParams,
) -> Result<AngularSpectralMap> {
    for &l in wavelength_grid {
        crystal.sellmeier.check_range(l)?;
    }
    if let Some(&a) = angle_grid.iter().find(|a| !(a.abs() < std::f64::consts::FRAC_PI_2)) {
        return Err(Error::Domain(format!("polar angle {a} outside (−π/2, π/2)")));
    }
    let wave = PumpWave::new(tilt, crystal, pump.wavelength)?;
    let gq: Vec<f64> = wavelength_grid
        .iter()
        .map(|&l| gain.gain_q(l, crystal, pump.wavelength))
        .collect::<Result<_>>()?;
    let values = angle_grid
        .par_iter()
        .map(|&theta| {
            wavelength_grid
                .iter()
                .zip(&gq)
                .map(|(&l, &g)| match wave.mismatch(PlaneWaveMode { wavelength: l, polar_angle: theta }, crystal) {
                    Ok(dk) => {
                        mode_density(l) * photons_from_gain(g, dk * crystal.thickness / 2.0, gain.regime)
                    }
                    Err(Error::Domain(_)) | Err(Error::Range { .. }) => 0.0,
                    Err(_) => 0.0,
                })
                .collect()
        })
        .collect();
    Ok(AngularSpectralMap {
        wavelengths: wavelength_grid.to_vec(),
        angles: angle_grid.to_vec(),
        values,
    })
}

impl AngularSpectralMap {
    /// Delimited text: a header row of wavelengths [nm], then one row per
    /// angle starting with θ [rad].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_rad\\wavelength_nm");
        for l in &self.wavelengths {
            let _ = write!(out, ",{}", l * 1e9);
        }
        out.push('\n');
        for (a, row) in self.angles.iter().zip(&self.values) {
            let _ = write!(out, "{a}");
            for v in row {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }

    /// Largest relative difference between rows at ±θ.
    pub fn mirror_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.angles.iter().enumerate() {
            if let Some(j) = self.angles.iter().position(|b| *b == -*a) {
                for (x, y) in self.values[i].iter().zip(&self.values[j]) {
                    let scale = x.abs().max(y.abs());
                    if scale > 0.0 {
                        worst = worst.max((x - y).abs() / scale);
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::degenerate_tilt;
    use crate::pdc_model::{mode_density, photon_number, PdcRegime};

    const LP: f64 = 355e-9;

    #[test]
    fn symmetric_and_matches_collinear_scan() {
        let c = CrystalSpec::bbo_default(LP).unwrap();
        let p = PumpSpec::nominal(50e-6);
        let g = GainParams::new(1e-3, p.field_amplitude, false).unwrap().with_regime(PdcRegime::Spontaneous);
        let t0 = degenerate_tilt(&c, LP).unwrap();
        let lams: Vec<f64> = (0..91).map(|i| 450e-9 + i as f64 * 5e-9).collect();
        let angles: Vec<f64> = (-10..=10).map(|i| i as f64 * 2e-3).collect();
        let m = angular_spectral_map(&lams, &angles, t0, &c, &p, &g).unwrap();
        assert!(m.mirror_asymmetry() < 1e-12);
        let row0 = &m.values[10];
        for (j, &l) in lams.iter().enumerate() {
            let n = photon_number(PlaneWaveMode::collinear(l), t0, &c, &p, &g).unwrap();
            assert!((row0[j] - mode_density(l) * n).abs() <= 1e-12 * row0[j].abs().max(1e-300));
        }
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), angles.len() + 1);
    }

    #[test]
    fn far_field_mapping() {
        let th = far_field_to_internal_angle(0.25e-3, 0.2, 1.66);
        assert!((th - (0.25e-3f64 / 0.2).atan().sin().asin() / 1.66).abs() < 1e-9);
        assert_eq!(far_field_to_internal_angle(0.0, 0.2, 1.66), 0.0);
    }
}

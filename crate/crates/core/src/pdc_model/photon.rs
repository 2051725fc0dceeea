//! Mean photon number per plane-wave mode.

use crate::constants::{angular_frequency, idler_wavelength, C};
use crate::dispersion::{CrystalSpec, PlaneWaveMode, PumpWave};
use crate::Result;

use super::pump::{GainParams, PdcRegime, PumpSpec};

/// sin(x)/x.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// sinh²(√z)/z, continued analytically to z < 0 as sin²(√−z)/(−z).
pub fn sinh2_sqrt_over(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        return 1.0 + z / 3.0 + 2.0 * z * z / 45.0;
    }
    if z > 0.0 {
        let s = z.sqrt().sinh();
        s * s / z
    } else {
        let s = (-z).sqrt().sin();
        s * s / -z
    }
}

/// Per-mode photon number for a phase mismatch `x = ΔκL/2` and a gain
/// `gq = G·Q`.
pub fn photons_from_gain(gq: f64, x: f64, regime: PdcRegime) -> f64 {
    let g2 = gq * gq;
    match regime {
        PdcRegime::Spontaneous => {
            let s = sinc(x);
            g2 * s * s
        }
        PdcRegime::HighGain => g2 * sinh2_sqrt_over(g2 - x * x),
    }
}

/// (c⁻¹ L χ⁽²⁾ E_p)² ω ω_i / (n n_i) sinc²(ΔκL/2)
pub fn photon_number_spontaneous(
    mode: PlaneWaveMode,
    tilt: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let wave = PumpWave::new(tilt, crystal, pump.wavelength)?;
    let dk = wave.mismatch(mode, crystal)?;
    let ls = mode.wavelength;
    let li = idler_wavelength(ls, pump.wavelength);
    let ns = crystal.sellmeier.n_ordinary(ls)?;
    let ni = crystal.sellmeier.n_ordinary(li)?;
    let a = crystal.thickness * crystal.chi2_reference * pump.field_amplitude / C;
    let s = sinc(dk * crystal.thickness / 2.0);
    Ok(a * a * angular_frequency(ls) * angular_frequency(li) / (ns * ni) * s * s)
}

pub fn photon_number_high_gain(
    mode: PlaneWaveMode,
    tilt: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    gain: &GainParams,
) -> Result<f64> {
    let wave = PumpWave::new(tilt, crystal, pump.wavelength)?;
    photon_number_with_wave(&wave, mode, crystal, gain, PdcRegime::HighGain)
}

/// Per-mode photon number using the law selected by `gain.regime`.
pub fn photon_number(
    mode: PlaneWaveMode,
    tilt: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    gain: &GainParams,
) -> Result<f64> {
    let wave = PumpWave::new(tilt, crystal, pump.wavelength)?;
    photon_number_with_wave(&wave, mode, crystal, gain, gain.regime)
}

pub fn photon_number_with_wave(
    wave: &PumpWave,
    mode: PlaneWaveMode,
    crystal: &CrystalSpec,
    gain: &GainParams,
    regime: PdcRegime,
) -> Result<f64> {
    let x = wave.mismatch(mode, crystal)? * crystal.thickness / 2.0;
    let gq = gain.gain_q(mode.wavelength, crystal, wave.wavelength)?;
    Ok(photons_from_gain(gq, x, regime))
}

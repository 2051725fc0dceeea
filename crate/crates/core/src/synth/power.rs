use crate::dispersion::{phase_matching_tilt, CrystalSpec, PlaneWaveMode, PumpWave};
use crate::pdc_model::{detected_photons, photons_from_gain, DetectionGeometry, GainParams, PumpSpec};
use crate::{Error, Result};

use super::noise::{spectrum_rng, NoiseModel};

/// Counts at `wavelength_probe` against pump pulse energy, with the crystal
/// held at the tilt that phase matches the probe.
///
/// The gain follows the pump field: G(E) = (G/E_p)·E_p(E), so at low
/// energy the counts grow linearly with E.
#[allow(clippy::too_many_arguments)]
pub fn power_scan(
    crystal: &CrystalSpec,
    pump_base: &PumpSpec,
    geometry: &DetectionGeometry,
    gain: &GainParams,
    wavelength_probe: f64,
    energies: &[f64],
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let tilt = phase_matching_tilt(wavelength_probe, crystal, pump_base.wavelength)?;
    let wave = PumpWave::new(tilt, crystal, pump_base.wavelength)?;
    let x = wave.mismatch(PlaneWaveMode::collinear(wavelength_probe), crystal)? * crystal.thickness / 2.0;
    let mut out = Vec::with_capacity(energies.len());
    for &e in energies {
        if !(e > 0.0) {
            return Err(Error::Invalid(format!("pulse energy must be > 0, got {e}")));
        }
        let pump = pump_base.with_energy(e)?;
        let g = gain.scaled_to_field(pump.field_amplitude);
        let gq = g.gain_q(wavelength_probe, crystal, pump.wavelength)?;
        out.push((e, detected_photons(wavelength_probe, photons_from_gain(gq, x, gain.regime), geometry)));
    }
    if !noise.is_noiseless() {
        let mut counts: Vec<f64> = out.iter().map(|p| p.1).collect();
        noise.apply(&mut counts, &mut spectrum_rng(seed, 0));
        for (p, c) in out.iter_mut().zip(counts) {
            p.1 = c;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_then_convex() {
        let c = CrystalSpec::bbo_default(355e-9).unwrap();
        let p = PumpSpec::nominal(100e-6);
        let geo = DetectionGeometry::nominal(&p);
        let gain = GainParams::new(1.0, p.field_amplitude, false).unwrap();
        let energies: Vec<f64> = (0..12).map(|i| 1e-7 * 2f64.powi(i)).collect();
        let s = power_scan(&c, &p, &geo, &gain, 690e-9, &energies, &NoiseModel::none(), 0).unwrap();
        let slopes: Vec<f64> = s[..3].iter().map(|(e, n)| n / e).collect();
        assert!((slopes[2] / slopes[0] - 1.0).abs() < 0.01);
        for w in s.windows(3) {
            // second divided difference on a non-uniform grid
            let d1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let d2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            assert!(d2 >= d1 * (1.0 - 1e-12));
        }
    }
}

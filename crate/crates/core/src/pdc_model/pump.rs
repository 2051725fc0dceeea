use crate::constants::{angular_frequency, C, EPSILON_0};
use crate::dispersion::{CrystalSpec, SellmeierSet};
use crate::{Error, Result};

/// A pulsed, monochromatic plane-wave pump.
#[derive(Clone, Debug, PartialEq)]
pub struct PumpSpec {
    /// Vacuum wavelength λ_p [m].
    pub wavelength: f64,
    /// Energy per pulse [J].
    pub pulse_energy: f64,
    /// τ_p [s].
    pub pulse_duration: f64,
    /// [1/s]
    pub repetition_rate: f64,
    /// Transverse beam area A_s [m²].
    pub beam_area: f64,
    /// Pump index used for the field conversion.
    pub index: f64,
    /// Peak field amplitude E_p [V/m], see [`field_amplitude`].
    pub field_amplitude: f64,
}

/// Field amplitude of a flat-top pulse, E_p = √(2E / (τ_p A_s ε₀ c n_p)).
///
/// The pulse is treated as a uniform slab of intensity I = E/(τ_p A_s)
/// and I = ½ n_p ε₀ c E_p².
pub fn field_amplitude(pulse_energy: f64, pulse_duration: f64, beam_area: f64, index: f64) -> f64 {
    (2.0 * pulse_energy / (pulse_duration * beam_area * EPSILON_0 * C * index)).sqrt()
}

impl PumpSpec {
    pub fn new(
        wavelength: f64,
        pulse_energy: f64,
        pulse_duration: f64,
        repetition_rate: f64,
        beam_area: f64,
        index: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("wavelength", wavelength),
            ("pulse_energy", pulse_energy),
            ("pulse_duration", pulse_duration),
            ("repetition_rate", repetition_rate),
            ("beam_area", beam_area),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("pump {name} must be > 0, got {v}")));
            }
        }
        if !(index >= 1.0) {
            return Err(Error::Invalid(format!("pump index must be ≥ 1, got {index}")));
        }
        Ok(PumpSpec {
            wavelength,
            pulse_energy,
            pulse_duration,
            repetition_rate,
            beam_area,
            index,
            field_amplitude: field_amplitude(pulse_energy, pulse_duration, beam_area, index),
        })
    }

    /// Pump with the index taken at the crystal's cut angle.
    pub fn for_crystal(
        crystal: &CrystalSpec,
        wavelength: f64,
        pulse_energy: f64,
        pulse_duration: f64,
        repetition_rate: f64,
        beam_diameter: f64,
    ) -> Result<Self> {
        let n = crystal.pump_index(wavelength, crystal.cut_angle)?;
        let area = std::f64::consts::PI * (beam_diameter / 2.0).powi(2);
        Self::new(wavelength, pulse_energy, pulse_duration, repetition_rate, area, n)
    }

    /// 355 nm, 29.4 ps, 50 Hz, ⌀0.6 mm.
    pub fn nominal(pulse_energy: f64) -> Self {
        let n = SellmeierSet::bbo()
            .n_ordinary(710e-9)
            .expect("bundled set covers 710 nm");
        let area = std::f64::consts::PI * 0.3e-3f64.powi(2);
        Self::new(355e-9, pulse_energy, 29.4e-12, 50.0, area, n).expect("valid defaults")
    }

    pub fn with_energy(&self, pulse_energy: f64) -> Result<Self> {
        Self::new(
            self.wavelength,
            pulse_energy,
            self.pulse_duration,
            self.repetition_rate,
            self.beam_area,
            self.index,
        )
    }

    pub fn omega(&self) -> f64 {
        angular_frequency(self.wavelength)
    }
}

/// Which per-mode photon-number law to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdcRegime {
    /// N = G²Q² sinc²(ΔκL/2), first order in the gain.
    Spontaneous,
    /// N = G²Q²/(G²Q² − x²) sinh²√(G²Q² − x²), x = ΔκL/2.
    #[default]
    HighGain,
}

/// Parametric gain.
///
/// `gain_reference` is the dimensionless product G·Q at λ = 2λ_p, where the
/// physical gain G = c⁻¹Lχ⁽²⁾E_p/√(n_s n_i) carries units of time and
/// Q = √(ω(ω_p − ω)). Away from degeneracy the gain follows
/// [`gain_shape`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainParams {
    pub gain_reference: f64,
    /// gain_reference / E_p [(V/m)⁻¹].
    pub pump_normalized_gain: f64,
    pub use_dispersion_correction: bool,
    pub regime: PdcRegime,
}

impl GainParams {
    pub fn new(gain_reference: f64, field_amplitude: f64, use_dispersion_correction: bool) -> Result<Self> {
        if !(gain_reference >= 0.0 && gain_reference.is_finite()) {
            return Err(Error::Invalid(format!("gain must be ≥ 0, got {gain_reference}")));
        }
        if !(field_amplitude > 0.0) {
            return Err(Error::Invalid("field amplitude must be > 0".into()));
        }
        Ok(GainParams {
            gain_reference,
            pump_normalized_gain: gain_reference / field_amplitude,
            use_dispersion_correction,
            regime: PdcRegime::HighGain,
        })
    }

    /// Gain computed from the crystal nonlinearity and the pump field.
    pub fn from_physical(crystal: &CrystalSpec, pump: &PumpSpec) -> Result<Self> {
        let n = crystal.sellmeier.n_ordinary(2.0 * pump.wavelength)?;
        let g = crystal.thickness * crystal.chi2_reference * pump.field_amplitude / (C * n);
        Self::new(g * pump.omega() / 2.0, pump.field_amplitude, false)
    }

    pub fn with_regime(mut self, regime: PdcRegime) -> Self {
        self.regime = regime;
        self
    }

    /// Same pump-normalized gain at a different field amplitude.
    pub fn scaled_to_field(&self, field_amplitude: f64) -> Self {
        GainParams {
            gain_reference: self.pump_normalized_gain * field_amplitude,
            ..*self
        }
    }

    /// Gain multiplied by a relative pump-field factor.
    pub fn scaled(&self, factor: f64) -> Self {
        GainParams {
            gain_reference: self.gain_reference * factor,
            ..*self
        }
    }

    /// G·Q at `wavelength`.
    pub fn gain_q(&self, wavelength: f64, crystal: &CrystalSpec, pump_wavelength: f64) -> Result<f64> {
        Ok(self.gain_reference
            * gain_shape(wavelength, crystal, pump_wavelength, self.use_dispersion_correction)?
            * q_relative(wavelength, pump_wavelength))
    }
}

/// Q(λ)/Q(2λ_p) = 2√(ω(ω_p − ω))/ω_p. Zero outside (λ_p, ∞).
pub fn q_relative(wavelength: f64, pump_wavelength: f64) -> f64 {
    let x = pump_wavelength / wavelength;
    if !(x > 0.0 && x < 1.0) {
        return 0.0;
    }
    2.0 * (x * (1.0 - x)).sqrt()
}

/// Q² = ω(ω_p − ω) [s⁻²].
pub fn q_squared(wavelength: f64, pump_wavelength: f64) -> f64 {
    let w = angular_frequency(wavelength);
    w * (angular_frequency(pump_wavelength) - w)
}

/// G(λ)/G(2λ_p).
///
/// Without the dispersion correction this is the bare index dependence
/// √(n_o(2λ_p)²/(n_s n_i)); with it, the square root of the full
/// gain-dispersion profile.
pub fn gain_shape(
    wavelength: f64,
    crystal: &CrystalSpec,
    pump_wavelength: f64,
    use_dispersion_correction: bool,
) -> Result<f64> {
    if use_dispersion_correction {
        return Ok(crate::dispersion::relative_gain_squared(wavelength, crystal, pump_wavelength)?.sqrt());
    }
    let s = &crystal.sellmeier;
    let n0 = s.n_ordinary(2.0 * pump_wavelength)?;
    let ns = s.n_ordinary(wavelength)?;
    let ni = s.n_ordinary(crate::constants::idler_wavelength(wavelength, pump_wavelength))?;
    Ok(n0 / (ns * ni).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_conversion_round_trip() {
        let p = PumpSpec::nominal(100e-6);
        let e = 0.5 * p.index * EPSILON_0 * C * p.field_amplitude.powi(2) * p.pulse_duration * p.beam_area;
        assert!((e / 100e-6 - 1.0).abs() < 1e-12);
        let q = p.with_energy(400e-6).unwrap();
        assert!((q.field_amplitude / p.field_amplitude - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gain_consistency() {
        let p = PumpSpec::nominal(100e-6);
        let g = GainParams::new(5.0, p.field_amplitude, false).unwrap();
        assert!((g.pump_normalized_gain * p.field_amplitude - 5.0).abs() < 1e-12);
        assert!(GainParams::new(-1.0, 1.0, false).is_err());
        let h = g.scaled_to_field(2.0 * p.field_amplitude);
        assert!((h.gain_reference - 10.0).abs() < 1e-12);
    }

    #[test]
    fn q_helpers() {
        assert_eq!(q_relative(710e-9, 355e-9), 1.0);
        let lp = 355e-9;
        let r = q_squared(600e-9, lp) / q_squared(710e-9, lp);
        assert!((r.sqrt() - q_relative(600e-9, lp)).abs() < 1e-12);
        assert_eq!(q_relative(300e-9, lp), 0.0);
    }

    #[test]
    fn shape_is_one_at_degeneracy() {
        let c = CrystalSpec::bbo_default(355e-9).unwrap();
        for flag in [false, true] {
            assert!((gain_shape(710e-9, &c, 355e-9, flag).unwrap() - 1.0).abs() < 1e-15);
        }
    }
}

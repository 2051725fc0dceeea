//! Photon-number distributions of spontaneous and high-gain PDC and their
//! radiometric conversion into detected counts.

mod map;
mod photon;
mod pump;
mod radiometry;

pub use map::{angular_spectral_map, far_field_to_internal_angle, AngularSpectralMap};
pub use photon::{
    photon_number, photon_number_high_gain, photon_number_spontaneous, photon_number_with_wave,
    photons_from_gain, sinc, sinh2_sqrt_over,
};
pub use pump::{
    field_amplitude, gain_shape, q_relative, q_squared, GainParams, PdcRegime, PumpSpec,
};
pub use radiometry::{
    detected_photons, mode_density, pinhole_solid_angle, spectral_radiance, DetectionGeometry,
};

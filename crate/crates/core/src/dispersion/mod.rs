//! Refractive indices, phase matching and tilt-dependent gain corrections
//! for a type-I uniaxial crystal.

mod crystal;
mod fresnel;
mod gain;
mod mismatch;
mod sellmeier;

pub use crystal::{
    external_incidence, internal_pump_angle, pump_angle_for_index, tilt_for_internal_angle,
    CrystalSpec,
};
pub use fresnel::{fresnel_transmission, Polarization};
pub use gain::{gain_dispersion_profile, raw_gain_factors, relative_gain_squared, GainFactors};
pub use mismatch::{
    degenerate_tilt, longitudinal_mismatch, phase_matched_wavelengths,
    phase_matching_internal_angle, phase_matching_tilt, PhaseMatchPoint, PlaneWaveMode,
    PumpWave, ROOT_RESIDUAL_TOL, ROOT_SCAN_STEP,
};
pub use sellmeier::{
    index_extraordinary, index_ordinary, SellmeierFile, SellmeierForm, SellmeierSet,
    BUNDLED_SETS,
};

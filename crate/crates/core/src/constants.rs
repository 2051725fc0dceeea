//! Physical constants (CODATA 2018, exact where defined) and unit helpers.

use std::f64::consts::PI;

/// Speed of light in vacuum [m/s].
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity [F/m].
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

pub const NM: f64 = 1e-9;

/// Angular frequency ω = 2πc/λ for a vacuum wavelength λ [m].
#[inline]
pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * PI * C / wavelength
}

/// Idler wavelength fixed by energy conservation, 1/λ_i = 1/λ_p − 1/λ_s.
#[inline]
pub fn idler_wavelength(signal: f64, pump: f64) -> f64 {
    1.0 / (1.0 / pump - 1.0 / signal)
}

#[inline]
pub fn deg(x: f64) -> f64 {
    x.to_radians()
}

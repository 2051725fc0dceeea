use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarization {
    S,
    P,
}

/// Power transmittance T = 1 − |r|² of a planar dielectric interface.
pub fn fresnel_transmission(
    n_in: f64,
    n_out: f64,
    incidence_angle: f64,
    polarization: Polarization,
) -> Result<f64> {
    if !(n_in >= 1.0 && n_out >= 1.0) {
        return Err(Error::Domain(format!(
            "indices must be ≥ 1, got {n_in} and {n_out}"
        )));
    }
    let sin_t = n_in / n_out * incidence_angle.sin();
    if sin_t.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "total internal reflection at {incidence_angle} rad ({n_in} → {n_out})"
        )));
    }
    let ci = incidence_angle.cos();
    let ct = (1.0 - sin_t * sin_t).sqrt();
    let r = match polarization {
        Polarization::S => (n_in * ci - n_out * ct) / (n_in * ci + n_out * ct),
        Polarization::P => (n_out * ci - n_in * ct) / (n_out * ci + n_in * ct),
    };
    Ok((1.0 - r * r).clamp(0.0, 1.0))
}

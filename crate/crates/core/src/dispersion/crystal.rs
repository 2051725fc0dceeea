use crate::{Error, Result};

use super::sellmeier::SellmeierSet;

const SNELL_MAX_ITER: usize = 100;
const SNELL_TOL: f64 = 1e-10;

/// A type-I uniaxial crystal slab. The pump travels as the extraordinary
/// wave, signal and idler as ordinary waves.
#[derive(Clone, Debug, PartialEq)]
pub struct CrystalSpec {
    /// Slab thickness L [m].
    pub thickness: f64,
    /// Angle between the optic axis and the surface normal [rad].
    pub cut_angle: f64,
    /// Effective χ⁽²⁾ at the degenerate wavelength [m/V].
    pub chi2_reference: f64,
    pub sellmeier: SellmeierSet,
    /// When false, tilts are already internal (refracted) angles.
    pub tilt_is_external: bool,
}

impl CrystalSpec {
    pub fn new(
        thickness: f64,
        cut_angle: f64,
        chi2_reference: f64,
        sellmeier: SellmeierSet,
        tilt_is_external: bool,
    ) -> Result<Self> {
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(Error::Invalid(format!("thickness must be > 0, got {thickness}")));
        }
        if !(chi2_reference > 0.0 && chi2_reference.is_finite()) {
            return Err(Error::Invalid(format!(
                "chi2_reference must be > 0, got {chi2_reference}"
            )));
        }
        if !(cut_angle > 0.0 && cut_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Invalid(format!(
                "cut angle must lie in (0, π/2), got {cut_angle}"
            )));
        }
        Ok(CrystalSpec {
            thickness,
            cut_angle,
            chi2_reference,
            sellmeier,
            tilt_is_external,
        })
    }

    /// Crystal cut so that zero tilt phase matches the degenerate pair
    /// λ_s = λ_i = 2λ_p collinearly.
    pub fn cut_for_degeneracy(
        thickness: f64,
        chi2_reference: f64,
        sellmeier: SellmeierSet,
        pump_wavelength: f64,
        tilt_is_external: bool,
    ) -> Result<Self> {
        let n_s = sellmeier.n_ordinary(2.0 * pump_wavelength)?;
        let cut = pump_angle_for_index(&sellmeier, pump_wavelength, n_s)?;
        Self::new(thickness, cut, chi2_reference, sellmeier, tilt_is_external)
    }

    /// β-BBO, 3 mm, cut for degeneracy at `pump_wavelength`, χ⁽²⁾ = 4 pm/V.
    pub fn bbo_default(pump_wavelength: f64) -> Result<Self> {
        Self::cut_for_degeneracy(3e-3, 4e-12, SellmeierSet::bbo(), pump_wavelength, true)
    }

    /// Extraordinary pump index at internal angle θ to the optic axis.
    pub fn pump_index(&self, pump_wavelength: f64, internal_angle: f64) -> Result<f64> {
        self.sellmeier.n_at_angle(pump_wavelength, internal_angle)
    }
}

/// Angle to the optic axis at which the extraordinary index at `wavelength`
/// equals `target`. Solves `1/n² = cos²θ/n_o² + sin²θ/n_e²` for θ.
pub fn pump_angle_for_index(sellmeier: &SellmeierSet, wavelength: f64, target: f64) -> Result<f64> {
    let no = sellmeier.n_ordinary(wavelength)?;
    let ne = sellmeier.n_extraordinary_principal(wavelength)?;
    let s2 = (target.powi(-2) - no.powi(-2)) / (ne.powi(-2) - no.powi(-2));
    if !(0.0..=1.0).contains(&s2) || !s2.is_finite() {
        return Err(Error::Domain(format!(
            "index {target:.6} not reachable by the extraordinary wave at {:.2} nm ({ne:.6}..{no:.6})",
            wavelength * 1e9
        )));
    }
    Ok(s2.sqrt().asin())
}

/// Internal angle between the pump wave vector and the optic axis for a
/// given tilt of the slab.
///
/// For external tilts the refraction angle r inside the crystal depends on
/// the extraordinary index at `cut + r`, so Snell's law
/// `sin(tilt) = n_p(cut + r)·sin r` is solved by fixed-point iteration.
pub fn internal_pump_angle(tilt: f64, crystal: &CrystalSpec, pump_wavelength: f64) -> Result<f64> {
    if !crystal.tilt_is_external {
        return Ok(crystal.cut_angle + tilt);
    }
    if !(tilt.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("|tilt| must be < π/2, got {tilt}")));
    }
    if tilt == 0.0 {
        return Ok(crystal.cut_angle);
    }
    let s = tilt.sin();
    let mut r = (s / crystal.pump_index(pump_wavelength, crystal.cut_angle)?).asin();
    let mut delta = f64::INFINITY;
    let mut trace = Vec::new();
    for _ in 0..SNELL_MAX_ITER {
        let n = crystal.pump_index(pump_wavelength, crystal.cut_angle + r)?;
        let next = (s / n).asin();
        delta = (next - r).abs();
        trace.push(delta);
        r = next;
        if delta < SNELL_TOL {
            return Ok(crystal.cut_angle + r);
        }
    }
    Err(Error::NoConvergence {
        what: "Snell refraction fixed point",
        iterations: SNELL_MAX_ITER,
        residual: delta,
        trace,
    })
}

/// Inverse of [`internal_pump_angle`]: the slab tilt producing a given
/// internal pump angle.
pub fn tilt_for_internal_angle(
    internal_angle: f64,
    crystal: &CrystalSpec,
    pump_wavelength: f64,
) -> Result<f64> {
    let r = internal_angle - crystal.cut_angle;
    if !crystal.tilt_is_external {
        return Ok(r);
    }
    let s = crystal.pump_index(pump_wavelength, internal_angle)? * r.sin();
    if s.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "internal refraction angle {r} rad is beyond the critical angle"
        )));
    }
    Ok(s.asin())
}

/// Physical angle of incidence on the entrance face for a slab tilt,
/// regardless of the tilt convention.
pub fn external_incidence(tilt: f64, crystal: &CrystalSpec, pump_wavelength: f64) -> Result<f64> {
    if crystal.tilt_is_external {
        return Ok(tilt);
    }
    let internal = crystal.cut_angle + tilt;
    let s = crystal.pump_index(pump_wavelength, internal)? * tilt.sin();
    if s.abs() >= 1.0 {
        return Err(Error::Domain("refraction angle beyond the critical angle".into()));
    }
    Ok(s.asin())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LP: f64 = 355e-9;

    fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn degenerate_cut_angle() {
        let c = CrystalSpec::bbo_default(LP).unwrap();
        let np = c.pump_index(LP, c.cut_angle).unwrap();
        let ns = c.sellmeier.n_ordinary(2.0 * LP).unwrap();
        assert!((np - ns).abs() < 1e-12);
        assert!((c.cut_angle.to_degrees() - 33.16).abs() < 0.05);
    }

    #[test]
    fn zero_tilt_and_bypass() {
        let mut c = CrystalSpec::bbo_default(LP).unwrap();
        assert_eq!(internal_pump_angle(0.0, &c, LP).unwrap(), c.cut_angle);
        c.tilt_is_external = false;
        let t = 0.031;
        assert_eq!(internal_pump_angle(t, &c, LP).unwrap(), c.cut_angle + t);
    }

    #[test]
    fn snell_matches_bisection() {
        let c = CrystalSpec::bbo_default(LP).unwrap();
        for tilt_deg in [3.0_f64, -3.0, -9.5, 20.0] {
            let tilt = tilt_deg.to_radians();
            let got = internal_pump_angle(tilt, &c, LP).unwrap();
            let oracle = bisect(c.cut_angle - 0.6, c.cut_angle + 0.6, |th| {
                c.pump_index(LP, th).unwrap() * (th - c.cut_angle).sin() - tilt.sin()
            });
            assert!((got - oracle).abs() < 1e-9, "{tilt_deg}: {got} vs {oracle}");
            let back = tilt_for_internal_angle(got, &c, LP).unwrap();
            assert!((back - tilt).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let s = SellmeierSet::bbo();
        assert!(CrystalSpec::new(0.0, 0.5, 1e-12, s.clone(), true).is_err());
        assert!(CrystalSpec::new(1e-3, 0.5, -1.0, s.clone(), true).is_err());
        assert!(CrystalSpec::new(1e-3, 1.6, 1e-12, s, true).is_err());
    }
}

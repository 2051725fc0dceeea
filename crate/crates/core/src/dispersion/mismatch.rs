//! Longitudinal phase mismatch for collinear-pump type-I PDC and the
//! phase-matched solutions of a tilted slab.

use std::f64::consts::PI;

use crate::constants::{idler_wavelength, NM};
use crate::{Error, Result};

use super::crystal::{internal_pump_angle, pump_angle_for_index, tilt_for_internal_angle, CrystalSpec};

/// Spacing of the coarse scan used to bracket roots [m].
pub const ROOT_SCAN_STEP: f64 = 0.1 * NM;
/// Accepted roots satisfy |Δκ|·L/2 below this.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-6;
const BISECTION_TARGET: f64 = 1e-7;
const BISECTION_WIDTH: f64 = 1e-4 * NM;

/// One plane-wave signal mode outside the pump axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWaveMode {
    /// Vacuum wavelength [m].
    pub wavelength: f64,
    /// Angle to the pump axis [rad].
    pub polar_angle: f64,
}

impl PlaneWaveMode {
    pub fn new(wavelength: f64, polar_angle: f64) -> Result<Self> {
        if !(wavelength > 0.0) || !(polar_angle.abs() < PI / 2.0) {
            return Err(Error::Domain(format!(
                "invalid mode λ = {wavelength:e} m, θ = {polar_angle} rad"
            )));
        }
        Ok(PlaneWaveMode {
            wavelength,
            polar_angle,
        })
    }

    pub fn collinear(wavelength: f64) -> Self {
        PlaneWaveMode {
            wavelength,
            polar_angle: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseMatchPoint {
    /// Phase-matched signal wavelength λ_PM [m].
    pub wavelength_pm: f64,
    /// Slab tilt for which the point was computed [rad].
    pub tilt: f64,
    /// Δκ at the returned wavelength [1/m].
    pub mismatch_residual: f64,
    /// The point is a double (tangent) root, as at exact degeneracy.
    pub tangent: bool,
}

/// The pump wave inside the crystal at a fixed tilt. Caches k_p so that
/// many signal modes can be evaluated cheaply.
#[derive(Clone, Copy, Debug)]
pub struct PumpWave {
    pub wavelength: f64,
    pub tilt: f64,
    /// Angle between pump wave vector and optic axis [rad].
    pub internal_angle: f64,
    pub index: f64,
    /// Pump wavenumber in the crystal [1/m].
    pub k: f64,
}

impl PumpWave {
    pub fn new(tilt: f64, crystal: &CrystalSpec, pump_wavelength: f64) -> Result<Self> {
        let internal_angle = internal_pump_angle(tilt, crystal, pump_wavelength)?;
        let index = crystal.pump_index(pump_wavelength, internal_angle)?;
        Ok(PumpWave {
            wavelength: pump_wavelength,
            tilt,
            internal_angle,
            index,
            k: 2.0 * PI * index / pump_wavelength,
        })
    }

    /// Δκ = k_p − k_s (cos θ + √((k_i/k_s)² − sin²θ)).
    pub fn mismatch(&self, mode: PlaneWaveMode, crystal: &CrystalSpec) -> Result<f64> {
        let ls = mode.wavelength;
        if !(ls > self.wavelength) {
            return Err(Error::Domain(format!(
                "signal at {:.3} nm is not below the pump frequency",
                ls / NM
            )));
        }
        let li = idler_wavelength(ls, self.wavelength);
        let ks = 2.0 * PI * crystal.sellmeier.n_ordinary(ls)? / ls;
        let ki = 2.0 * PI * crystal.sellmeier.n_ordinary(li)? / li;
        let (s, c) = mode.polar_angle.sin_cos();
        let arg = (ki / ks).powi(2) - s * s;
        if arg < 0.0 {
            return Err(Error::Domain(format!(
                "evanescent idler at λ = {:.3} nm, θ = {} rad",
                ls / NM,
                mode.polar_angle
            )));
        }
        Ok(self.k - ks * (c + arg.sqrt()))
    }
}

pub fn longitudinal_mismatch(
    mode: PlaneWaveMode,
    tilt: f64,
    crystal: &CrystalSpec,
    pump_wavelength: f64,
) -> Result<f64> {
    PumpWave::new(tilt, crystal, pump_wavelength)?.mismatch(mode, crystal)
}

#[derive(Clone, Copy)]
struct Sample {
    lam: f64,
    f: f64,
    tangent: bool,
}

fn golden_extremum(a: f64, b: f64, sign: f64, f: &impl Fn(f64) -> f64) -> (f64, f64) {
    // maximizes sign·f on [a, b]
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = sign * f(x1);
    let mut f2 = sign * f(x2);
    for _ in 0..120 {
        if b - a < 1e-7 * NM {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sign * f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sign * f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn bisect_root(a: Sample, b: Sample, half_l: f64, f: &impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (a.lam, b.lam);
    let flo_pos = a.f > 0.0;
    let mut best = if a.f.abs() < b.f.abs() { (a.lam, a.f) } else { (b.lam, b.f) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if !fm.is_finite() {
            return None;
        }
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs() * half_l < BISECTION_TARGET && hi - lo < BISECTION_WIDTH {
            break;
        }
        if (fm > 0.0) == flo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * BISECTION_WIDTH {
            break;
        }
    }
    (best.1.abs() * half_l < ROOT_RESIDUAL_TOL).then_some(best)
}

/// All wavelengths in `search_range` where Δκ(λ) = 0 at `polar_angle`.
///
/// A 0.1 nm scan brackets sign changes, which are refined by bisection.
/// Local extrema of Δκ are refined by golden-section search so that a
/// tangent double root (exact degeneracy) is reported once, and root pairs
/// closer than the scan step are not missed.
pub fn phase_matched_wavelengths(
    tilt: f64,
    crystal: &CrystalSpec,
    pump_wavelength: f64,
    search_range: (f64, f64),
    polar_angle: f64,
) -> Result<Vec<PhaseMatchPoint>> {
    let (lo, hi) = search_range;
    if !(hi > lo) {
        return Err(Error::Invalid("empty search range".into()));
    }
    crystal.sellmeier.check_range(lo)?;
    crystal.sellmeier.check_range(hi)?;
    let pump = PumpWave::new(tilt, crystal, pump_wavelength)?;
    let half_l = crystal.thickness / 2.0;
    let f = |lam: f64| {
        PlaneWaveMode::new(lam, polar_angle)
            .and_then(|m| pump.mismatch(m, crystal))
            .unwrap_or(f64::NAN)
    };

    let n = ((hi - lo) / ROOT_SCAN_STEP).ceil() as usize + 1;
    let grid: Vec<Sample> = (0..n)
        .map(|i| {
            let lam = (lo + i as f64 * ROOT_SCAN_STEP).min(hi);
            Sample {
                lam,
                f: f(lam),
                tangent: false,
            }
        })
        .collect();

    let mut roots: Vec<PhaseMatchPoint> = Vec::new();
    let point = |lam: f64, res: f64, tangent: bool| PhaseMatchPoint {
        wavelength_pm: lam,
        tilt,
        mismatch_residual: res,
        tangent,
    };

    for seg in grid.split(|s| !s.f.is_finite()) {
        if seg.is_empty() {
            continue;
        }
        let mut pts: Vec<Sample> = seg.to_vec();
        for i in 1..seg.len().saturating_sub(1) {
            let (d1, d2) = (seg[i].f - seg[i - 1].f, seg[i + 1].f - seg[i].f);
            if d1 * d2 < 0.0 {
                let sign = if d1 > 0.0 { 1.0 } else { -1.0 };
                let (x, fx) = golden_extremum(seg[i - 1].lam, seg[i + 1].lam, sign, &f);
                if fx.is_finite() {
                    pts.push(Sample {
                        lam: x,
                        f: fx,
                        tangent: fx.abs() * half_l < ROOT_RESIDUAL_TOL,
                    });
                }
            }
        }
        pts.sort_by(|a, b| a.lam.total_cmp(&b.lam));

        let mut seg_roots = Vec::new();
        let mut tangents = Vec::new();
        for (k, a) in pts.iter().enumerate() {
            if a.tangent {
                tangents.push(point(a.lam, a.f, true));
                continue;
            }
            if a.f == 0.0 {
                seg_roots.push(point(a.lam, 0.0, false));
                continue;
            }
            let Some(b) = pts.get(k + 1) else { continue };
            if b.tangent || b.f == 0.0 || (a.f > 0.0) == (b.f > 0.0) {
                continue;
            }
            if let Some((lam, res)) = bisect_root(*a, *b, half_l, &f) {
                seg_roots.push(point(lam, res, false));
            }
        }
        seg_roots.retain(|r| {
            tangents
                .iter()
                .all(|t| (t.wavelength_pm - r.wavelength_pm).abs() > 2.0 * ROOT_SCAN_STEP)
        });
        roots.extend(seg_roots);
        roots.extend(tangents);
    }
    roots.sort_by(|a, b| a.wavelength_pm.total_cmp(&b.wavelength_pm));
    Ok(roots)
}

/// Slab tilt at which `signal_wavelength` is collinearly phase matched.
///
/// Closed form: the required pump index is
/// n_p = λ_p (n_s/λ_s + n_i/λ_i), and the ellipsoid is inverted for the
/// internal angle.
pub fn phase_matching_tilt(signal_wavelength: f64, crystal: &CrystalSpec, pump_wavelength: f64) -> Result<f64> {
    tilt_for_internal_angle(
        phase_matching_internal_angle(signal_wavelength, crystal, pump_wavelength)?,
        crystal,
        pump_wavelength,
    )
}

pub fn phase_matching_internal_angle(
    signal_wavelength: f64,
    crystal: &CrystalSpec,
    pump_wavelength: f64,
) -> Result<f64> {
    if !(signal_wavelength > pump_wavelength) {
        return Err(Error::Domain("signal must be red of the pump".into()));
    }
    let li = idler_wavelength(signal_wavelength, pump_wavelength);
    let ns = crystal.sellmeier.n_ordinary(signal_wavelength)?;
    let ni = crystal.sellmeier.n_ordinary(li)?;
    let target = pump_wavelength * (ns / signal_wavelength + ni / li);
    pump_angle_for_index(&crystal.sellmeier, pump_wavelength, target)
}

/// Tilt that phase matches the degenerate pair at 2λ_p.
pub fn degenerate_tilt(crystal: &CrystalSpec, pump_wavelength: f64) -> Result<f64> {
    phase_matching_tilt(2.0 * pump_wavelength, crystal, pump_wavelength)
}

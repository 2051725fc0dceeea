use crate::interp;
use crate::{Error, Result};

use super::relative::ResponseCurve;

/// Tabulated reference response (e.g. a calibration lamp) with an absolute
/// uncertainty band in the same units.
#[derive(Clone, Debug, PartialEq)]
pub struct LampReference {
    pub wavelengths: Vec<f64>,
    pub response: Vec<f64>,
    pub uncertainty: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    /// Least-squares factor k in lamp ≈ k·pdc.
    pub scale: f64,
    pub wavelengths: Vec<f64>,
    pub pdc: Vec<f64>,
    /// lamp / k
    pub scaled_lamp: Vec<f64>,
    pub scaled_uncertainty: Vec<f64>,
    /// pdc / (lamp / k)
    pub ratio: Vec<f64>,
    pub rms_deviation: f64,
    pub in_band_fraction: f64,
}

/// Scales the lamp onto the PDC curve by a single factor through the origin
/// and compares them on the PDC support.
pub fn compare_reference(pdc: &ResponseCurve, lamp: &LampReference) -> Result<ComparisonReport> {
    if lamp.wavelengths.len() != lamp.response.len() || lamp.wavelengths.len() != lamp.uncertainty.len() {
        return Err(Error::Invalid("lamp columns differ in length".into()));
    }
    if !interp::is_strictly_increasing(&lamp.wavelengths) {
        return Err(Error::Invalid("lamp wavelengths must be strictly increasing".into()));
    }
    let (mut wl, mut p, mut l, mut u) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..pdc.wavelength_grid.len() {
        if !pdc.support_mask[i] {
            continue;
        }
        let x = pdc.wavelength_grid[i];
        if let (Some(lr), Some(lu)) = (
            interp::linear(&lamp.wavelengths, &lamp.response, x),
            interp::linear(&lamp.wavelengths, &lamp.uncertainty, x),
        ) {
            wl.push(x);
            p.push(pdc.response[i]);
            l.push(lr);
            u.push(lu);
        }
    }
    if wl.is_empty() {
        return Err(Error::Coverage("lamp and PDC curves do not overlap".into()));
    }
    let spp: f64 = p.iter().map(|x| x * x).sum();
    let slp: f64 = p.iter().zip(&l).map(|(a, b)| a * b).sum();
    let scale = slp / spp;
    if !(scale > 0.0) {
        return Err(Error::Domain("lamp curve does not scale positively onto PDC".into()));
    }
    let scaled_lamp: Vec<f64> = l.iter().map(|x| x / scale).collect();
    let scaled_uncertainty: Vec<f64> = u.iter().map(|x| x / scale).collect();
    let ratio: Vec<f64> = p.iter().zip(&scaled_lamp).map(|(a, b)| a / b).collect();
    let n = wl.len() as f64;
    let rms_deviation = (ratio.iter().map(|r| (r - 1.0).powi(2)).sum::<f64>() / n).sqrt();
    let inside = p
        .iter()
        .zip(&scaled_lamp)
        .zip(&scaled_uncertainty)
        .filter(|((a, b), s)| (*a - *b).abs() <= **s)
        .count();
    Ok(ComparisonReport {
        scale,
        wavelengths: wl,
        pdc: p,
        scaled_lamp,
        scaled_uncertainty,
        ratio,
        rms_deviation,
        in_band_fraction: inside as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> ResponseCurve {
        let g: Vec<f64> = (0..100).map(|i| 500e-9 + i as f64 * 1e-9).collect();
        ResponseCurve {
            response: g.iter().map(|l| 1.0 + (l * 1e7).sin() * 0.2).collect(),
            support_mask: vec![true; g.len()],
            wavelength_grid: g,
            normalization_wavelength: 550e-9,
            warnings: vec![],
        }
    }

    #[test]
    fn self_comparison() {
        let c = curve();
        let lamp = LampReference {
            wavelengths: c.wavelength_grid.clone(),
            response: c.response.clone(),
            uncertainty: c.response.iter().map(|r| 0.05 * r).collect(),
        };
        let r = compare_reference(&c, &lamp).unwrap();
        assert!((r.scale - 1.0).abs() < 1e-14);
        assert!(r.rms_deviation < 1e-14);
        assert_eq!(r.in_band_fraction, 1.0);
    }

    #[test]
    fn pure_scale() {
        let c = curve();
        let lamp = LampReference {
            wavelengths: c.wavelength_grid.clone(),
            response: c.response.iter().map(|r| 0.8 * r).collect(),
            uncertainty: vec![0.0; c.response.len()],
        };
        let r = compare_reference(&c, &lamp).unwrap();
        assert!((r.scale - 0.8).abs() < 1e-14);
        assert!(r.rms_deviation < 1e-14);
    }

    #[test]
    fn no_overlap() {
        let c = curve();
        let lamp = LampReference {
            wavelengths: vec![1e-6, 2e-6],
            response: vec![1.0, 1.0],
            uncertainty: vec![0.1, 0.1],
        };
        assert!(matches!(compare_reference(&c, &lamp), Err(Error::Coverage(_))));
    }
}

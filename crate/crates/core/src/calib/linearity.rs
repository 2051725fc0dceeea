use crate::{Error, Result};

pub const MIN_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearityOptions {
    /// Allowed relative excess over the linear prediction.
    pub tolerance: f64,
    /// Number of lowest-energy points that fix the zero-energy slope.
    pub reference_points: usize,
}

impl Default for LinearityOptions {
    fn default() -> Self {
        LinearityOptions {
            tolerance: 0.10,
            reference_points: 3,
        }
    }
}

/// Zero-energy slope lim_{E→0} counts/E, from a straight-line fit of
/// counts/E against E over the lowest points.
pub fn reference_slope(scan: &[(f64, f64)], points: usize) -> f64 {
    let pts = &scan[..points.min(scan.len())];
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1 / p.0).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if pts.len() < 2 || sxx == 0.0 {
        return my;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    my - sxy / sxx * mx
}

/// Largest pump energy up to which every point of the scan stays within
/// `tolerance` of the linear (spontaneous) prediction. If even the first
/// point fails, the first energy is returned.
pub fn linearity_bound(scan: &[(f64, f64)], options: &LinearityOptions) -> Result<f64> {
    if scan.len() < MIN_POINTS {
        return Err(Error::Size {
            needed: MIN_POINTS,
            got: scan.len(),
        });
    }
    if scan.windows(2).any(|w| !(w[1].0 > w[0].0)) || !(scan[0].0 > 0.0) {
        return Err(Error::Invalid("energies must be positive and increasing".into()));
    }
    let slope = reference_slope(scan, options.reference_points.max(2));
    if !(slope > 0.0) {
        return Ok(scan[0].0);
    }
    let mut bound = scan[0].0;
    for &(e, c) in scan {
        if ((c / (slope * e)) - 1.0).abs() > options.tolerance {
            break;
        }
        bound = e;
    }
    Ok(bound)
}

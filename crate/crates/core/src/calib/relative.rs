use rayon::prelude::*;

use crate::constants::NM;
use crate::interp;
use crate::pdc_model::{mode_density, q_squared};
use crate::synth::SpectrumRecord;
use crate::{Error, Result};

use super::envelope::{envelope, Envelope, SupportRule};
use super::filter::fourier_lowpass;

/// Default low-pass cutoff as a fraction of Nyquist.
pub const DEFAULT_CUTOFF: f64 = 0.2;
/// Envelope dips deeper than this trigger the sparse-scan warning.
pub const DEFAULT_SCALLOP_THRESHOLD: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct ResponseCurve {
    pub wavelength_grid: Vec<f64>,
    pub response: Vec<f64>,
    pub normalization_wavelength: f64,
    /// Pixels that were phase matched by some spectrum of the scan.
    pub support_mask: Vec<bool>,
    pub warnings: Vec<String>,
}

impl ResponseCurve {
    pub fn support_range(&self) -> Option<(f64, f64)> {
        let first = self.support_mask.iter().position(|&b| b)?;
        let last = self.support_mask.iter().rposition(|&b| b)?;
        Some((self.wavelength_grid[first], self.wavelength_grid[last]))
    }

    pub fn at(&self, wavelength: f64) -> Option<f64> {
        interp::linear(&self.wavelength_grid, &self.response, wavelength)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelativeOptions {
    /// Per-spectrum low-pass cutoff; `None` disables filtering.
    pub cutoff: Option<f64>,
    /// Known G(λ)/G(2λ_p) per pixel; `None` assumes a constant gain.
    pub gain_shape: Option<Vec<f64>>,
    pub support: SupportRule,
    pub scallop_threshold: f64,
}

impl Default for RelativeOptions {
    fn default() -> Self {
        RelativeOptions {
            cutoff: Some(DEFAULT_CUTOFF),
            gain_shape: None,
            support: SupportRule::default(),
            scallop_threshold: DEFAULT_SCALLOP_THRESHOLD,
        }
    }
}

pub(crate) fn check_common_grid(records: &[SpectrumRecord]) -> Result<&[f64]> {
    let first = records.first().ok_or(Error::Size { needed: 1, got: 0 })?;
    let grid = &first.pixel_grid;
    if grid.len() < 2 || !interp::is_strictly_increasing(grid) {
        return Err(Error::Invalid("pixel grid must be strictly increasing".into()));
    }
    for r in records {
        r.validate()?;
        if r.pixel_grid.len() != grid.len()
            || r.pixel_grid.iter().zip(grid).any(|(a, b)| (a - b).abs() > 1e-6 * NM)
        {
            return Err(Error::Invalid(format!(
                "spectrum {} does not share the pixel grid",
                r.spectrum_id
            )));
        }
    }
    Ok(grid)
}

pub(crate) fn filtered(records: &[SpectrumRecord], cutoff: Option<f64>) -> Result<Vec<SpectrumRecord>> {
    match cutoff {
        None => Ok(records.to_vec()),
        Some(c) if c >= 1.0 => Ok(records.to_vec()),
        Some(c) => records.par_iter().map(|r| fourier_lowpass(r, c)).collect(),
    }
}

pub(crate) fn tilt_ranks(records: &[SpectrumRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].tilt.total_cmp(&records[b].tilt).then(a.cmp(&b)));
    let mut rank = vec![0; records.len()];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    rank
}

/// Interpolation weights of `x` between the two bracketing pixels.
pub(crate) fn bracket(grid: &[f64], x: f64) -> Option<(usize, f64)> {
    if x < grid[0] || x > grid[grid.len() - 1] {
        return None;
    }
    let hi = grid.partition_point(|&v| v < x).clamp(1, grid.len() - 1);
    Some((hi - 1, (x - grid[hi - 1]) / (grid[hi] - grid[hi - 1])))
}

pub(crate) fn warn_scallops(env: &Envelope, grid: &[f64], threshold: f64) -> Option<String> {
    let deep: Vec<_> = env.scallops().into_iter().filter(|s| s.depth > threshold).collect();
    let worst = deep.iter().max_by(|a, b| a.depth.total_cmp(&b.depth))?;
    Some(format!(
        "sparse scan: {} envelope dips deeper than {:.1}% (worst {:.2}% at {:.2} nm)",
        deep.len(),
        threshold * 100.0,
        worst.depth * 100.0,
        grid[worst.pixel] / NM
    ))
}

/// R(λ) = max_j M_j(λ) / (D(λ) ω(ω_p − ω)), normalized to 1 at 2λ_p.
pub fn relative_response(
    records: &[SpectrumRecord],
    pump_wavelength: f64,
    options: &RelativeOptions,
) -> Result<ResponseCurve> {
    let grid = check_common_grid(records)?.to_vec();
    let norm_wl = 2.0 * pump_wavelength;
    let (anchor, t) = bracket(&grid, norm_wl)
        .ok_or_else(|| Error::Coverage(format!("pixel grid does not reach {:.2} nm", norm_wl / NM)))?;
    if let Some(s) = &options.gain_shape {
        if s.len() != grid.len() {
            return Err(Error::Invalid("gain shape length differs from the pixel grid".into()));
        }
    }
    if let Some(l) = grid.iter().find(|&&l| !(l > pump_wavelength)) {
        return Err(Error::Domain(format!("pixel at {:.2} nm is not red of the pump", l / NM)));
    }
    let recs = filtered(records, options.cutoff)?;

    let model: Vec<f64> = grid
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let s = options.gain_shape.as_ref().map_or(1.0, |s| s[i]);
            mode_density(l) * q_squared(l, pump_wavelength) * s * s
        })
        .collect();
    let ratios: Vec<Vec<f64>> = recs
        .par_iter()
        .map(|r| r.counts.iter().zip(&model).map(|(m, d)| m / d).collect())
        .collect();
    let counts: Vec<Vec<f64>> = recs.iter().map(|r| r.counts.clone()).collect();
    let anchor_px = if t < 0.5 { anchor } else { anchor + 1 };
    let env = envelope(&ratios, &counts, &tilt_ranks(records), anchor_px, &options.support);

    let norm = env.values[anchor] * (1.0 - t) + env.values[anchor + 1] * t;
    let floor = (options.support.relative_floor
        * counts.iter().flat_map(|c| c.iter()).fold(0.0f64, |m, &c| m.max(c)))
    .max(options.support.absolute_floor);
    let anchor_counts = counts[env.argmax[anchor_px]][anchor_px];
    if !(norm > 0.0) || !(anchor_counts > floor) {
        return Err(Error::Coverage(format!(
            "no spectrum is phase matched at {:.2} nm; cannot normalize",
            norm_wl / NM
        )));
    }
    if !env.support[anchor_px] {
        return Err(Error::Coverage(format!(
            "{:.2} nm is only reached by a side lobe; cannot normalize",
            norm_wl / NM
        )));
    }
    let mut warnings = Vec::new();
    if let Some(w) = warn_scallops(&env, &grid, options.scallop_threshold) {
        warnings.push(w);
    }
    let response = env.values.iter().map(|v| v / norm).collect();
    Ok(ResponseCurve {
        wavelength_grid: grid,
        response,
        normalization_wavelength: norm_wl,
        support_mask: env.support,
        warnings,
    })
}

//! Absolute efficiency and gain from the distorted high-gain envelope.
//!
//! After dividing out the relative response and the radiometric constant,
//! the envelope of a high-gain scan is Y(λ) = α sinh²(G(λ) Q(λ)), where G
//! follows the pump reading of the spectrum that maximizes each pixel. The
//! curvature of sinh² separates α from G.

use rayon::prelude::*;

use crate::pdc_model::{q_relative, DetectionGeometry};
use crate::synth::SpectrumRecord;
use crate::{Error, Result};

use super::envelope::{envelope, SupportRule};
use super::fit::{invert_spd, levenberg_marquardt, LmOptions, LmReport};
use super::relative::{bracket, check_common_grid, filtered, tilt_ranks, ResponseCurve, DEFAULT_CUTOFF};

pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct AbsoluteOptions {
    pub cutoff: Option<f64>,
    /// Known G(λ)/G(2λ_p); `None` assumes constant gain.
    pub gain_shape: Option<Vec<f64>>,
    pub support: SupportRule,
    /// Below this shape-distortion statistic the gain is unresolved.
    pub degeneracy_threshold: f64,
    pub lm: LmOptions,
    /// Relative step for the Γ sensitivity; `None` skips it.
    pub sensitivity_step: Option<f64>,
}

impl Default for AbsoluteOptions {
    fn default() -> Self {
        AbsoluteOptions {
            cutoff: Some(DEFAULT_CUTOFF),
            gain_shape: None,
            support: SupportRule::default(),
            degeneracy_threshold: DEFAULT_DEGENERACY_THRESHOLD,
            lm: LmOptions::default(),
            sensitivity_step: Some(1e-3),
        }
    }
}

/// ∂α/∂τ_p and ∂α/∂A_s by refitting with a perturbed Γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sensitivity {
    pub d_alpha_d_pulse_duration: f64,
    pub d_alpha_d_source_area: f64,
    /// (τ_p/α) ∂α/∂τ_p
    pub relative_pulse_duration: f64,
    /// (A_s/α) ∂α/∂A_s
    pub relative_source_area: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationResult {
    pub response: ResponseCurve,
    pub alpha: f64,
    pub alpha_sigma: f64,
    /// G(2λ_p)/E_p in inverse pump-reading units.
    pub pump_normalized_gain: f64,
    pub pump_normalized_gain_sigma: f64,
    /// Covariance of (α, G/E_p).
    pub covariance: [[f64; 2]; 2],
    /// η = α R on the response grid.
    pub efficiency: Vec<f64>,
    pub fit_wavelengths: Vec<f64>,
    /// Envelope Y on the fitted pixels.
    pub envelope: Vec<f64>,
    pub model: Vec<f64>,
    /// Pump reading of the maximizing spectrum per fitted pixel.
    pub pump_readings: Vec<f64>,
    /// Residuals in noise units.
    pub fit_residuals: Vec<f64>,
    pub residual_rms: f64,
    /// RMS of (Y − f)/f.
    pub relative_rms: f64,
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// RMS distance of the normalized sinh² shape from the best parabola.
    pub distortion: f64,
    pub sensitivity: Option<Sensitivity>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
struct FitData {
    wavelengths: Vec<f64>,
    y: Vec<f64>,
    /// √(c/Y), so that weighted residuals are in shot-noise units.
    weight: Vec<f64>,
    reading: Vec<f64>,
    /// q̂(λ)·G(λ)/G(2λ_p)
    h: Vec<f64>,
}

/// Per-spectrum envelope candidates on the support pixels.
struct Candidates {
    grid: Vec<f64>,
    /// M_j/(R Γ λ⁻⁴) per spectrum and pixel.
    values: Vec<Vec<f64>>,
    c: Vec<f64>,
    pixels: Vec<usize>,
    /// Plain maximizer per support pixel.
    argmax: Vec<usize>,
    readings: Vec<f64>,
    h: Vec<f64>,
    eps: f64,
}

fn prepare(
    records: &[SpectrumRecord],
    response: &ResponseCurve,
    geometry: &DetectionGeometry,
    pump_wavelength: f64,
    options: &AbsoluteOptions,
) -> Result<Candidates> {
    let grid = check_common_grid(records)?.to_vec();
    if response.wavelength_grid.len() != grid.len()
        || response.wavelength_grid.iter().zip(&grid).any(|(a, b)| (a - b).abs() > 1e-15)
    {
        return Err(Error::Invalid("response and spectra use different pixel grids".into()));
    }
    if let Some(s) = &options.gain_shape {
        if s.len() != grid.len() {
            return Err(Error::Invalid("gain shape length differs from the pixel grid".into()));
        }
    }
    if let Some(r) = records.iter().find(|r| !(r.pump_energy_reading > 0.0)) {
        return Err(Error::Invalid(format!("spectrum {} has no pump reading", r.spectrum_id)));
    }
    let recs = filtered(records, options.cutoff)?;
    let c: Vec<f64> = grid
        .iter()
        .zip(&response.response)
        .zip(&response.support_mask)
        .map(|((&l, &r), &on)| if on && r > 0.0 { r * geometry.gamma / l.powi(4) } else { 0.0 })
        .collect();
    let values: Vec<Vec<f64>> = recs
        .par_iter()
        .map(|r| r.counts.iter().zip(&c).map(|(m, c)| if *c > 0.0 { m / c } else { 0.0 }).collect())
        .collect();
    let counts: Vec<Vec<f64>> = recs.iter().map(|r| r.counts.clone()).collect();
    let anchor = bracket(&grid, 2.0 * pump_wavelength)
        .map(|(i, t)| if t < 0.5 { i } else { i + 1 })
        .unwrap_or(usize::MAX);
    let env = envelope(&values, &counts, &tilt_ranks(records), anchor, &options.support);

    let y_max = env.values.iter().fold(0.0f64, |m, &v| m.max(v));
    let pixels: Vec<usize> = (0..grid.len())
        .filter(|&i| env.support[i] && c[i] > 0.0 && env.values[i] > 0.0)
        .collect();
    if pixels.len() < 3 {
        return Err(Error::Coverage(format!(
            "only {} envelope pixels on support; need at least 3",
            pixels.len()
        )));
    }
    let h = grid
        .iter()
        .enumerate()
        .map(|(i, &l)| q_relative(l, pump_wavelength) * options.gain_shape.as_ref().map_or(1.0, |s| s[i]))
        .collect();
    Ok(Candidates {
        argmax: pixels.iter().map(|&i| env.argmax[i]).collect(),
        grid,
        values,
        c,
        pixels,
        readings: records.iter().map(|r| r.pump_energy_reading).collect(),
        h,
        eps: 1e-9 * y_max,
    })
}

impl Candidates {
    /// Envelope data with the maximizer per pixel. Without a gain the plain
    /// maximum is used; with G/E_p the spectrum that comes closest to its
    /// own phase-matched value α sinh²(G E_j Q) is taken, which keeps
    /// pump fluctuations from promoting off-peak spectra.
    fn select(&self, gain: Option<f64>) -> FitData {
        let mut d = FitData {
            wavelengths: Vec::with_capacity(self.pixels.len()),
            y: Vec::with_capacity(self.pixels.len()),
            weight: Vec::with_capacity(self.pixels.len()),
            reading: Vec::with_capacity(self.pixels.len()),
            h: Vec::with_capacity(self.pixels.len()),
        };
        for (n, &i) in self.pixels.iter().enumerate() {
            let j = match gain {
                None => self.argmax[n],
                Some(g) => {
                    let mut best = (f64::NEG_INFINITY, self.argmax[n]);
                    for (j, v) in self.values.iter().enumerate() {
                        let peak = (g * self.readings[j] * self.h[i]).sinh().powi(2);
                        let score = v[i] / peak;
                        if v[i] > 0.0 && score > best.0 {
                            best = (score, j);
                        }
                    }
                    best.1
                }
            };
            let y = self.values[j][i];
            if !(y > 0.0) {
                continue;
            }
            d.wavelengths.push(self.grid[i]);
            d.y.push(y);
            d.weight.push((self.c[i] / y.max(self.eps)).sqrt());
            d.reading.push(self.readings[j]);
            d.h.push(self.h[i]);
        }
        d
    }
}

const RESELECTION_ROUNDS: usize = 10;

/// Fit, reselect the maximizers with the fitted gain, refit until the
/// selection is stable.
fn fit_envelope(cand: &Candidates, lm: &LmOptions) -> Result<(FitData, Solution)> {
    let mut d = cand.select(None);
    let mut sol = fit(&d, lm)?;
    for _ in 0..RESELECTION_ROUNDS {
        let next = cand.select(Some(sol.gain()));
        if next.reading == d.reading && next.y == d.y {
            break;
        }
        d = next;
        sol = fit(&d, lm)?;
    }
    Ok((d, sol))
}

struct Solution {
    report: LmReport,
    mean_reading: f64,
}

impl Solution {
    /// G/E_p in reading units.
    fn gain(&self) -> f64 {
        self.report.params[1] / self.mean_reading
    }
}

fn fit(d: &FitData, lm: &LmOptions) -> Result<Solution> {
    let mean_reading = d.reading.iter().sum::<f64>() / d.reading.len() as f64;
    let e: Vec<f64> = d.reading.iter().map(|r| r / mean_reading).collect();
    let n = d.y.len();

    // Profile the cost over the gain with α solved in closed form.
    let mut best = (f64::INFINITY, 1.0, 1.0);
    for i in 0..=240 {
        let g = 1e-3 * 10f64.powf(i as f64 / 60.0);
        let (mut sys, mut sss) = (0.0, 0.0);
        for k in 0..n {
            let s = (g * e[k] * d.h[k]).sinh().powi(2);
            let w2 = d.weight[k] * d.weight[k];
            sys += w2 * d.y[k] * s;
            sss += w2 * s * s;
        }
        if !(sss > 0.0 && sss.is_finite()) {
            continue;
        }
        let a = sys / sss;
        let cost: f64 = (0..n)
            .map(|k| (d.weight[k] * (a * (g * e[k] * d.h[k]).sinh().powi(2) - d.y[k])).powi(2))
            .sum();
        if cost < best.0 {
            best = (cost, a, g);
        }
    }
    // Log parameters straighten the α·G² valley of weakly distorted data.
    let mut report = levenberg_marquardt(
        &[best.1.ln(), best.2.ln()],
        n,
        |p, r, j| {
            let (a, g) = (p[0].exp(), p[1].exp());
            for k in 0..n {
                let u = g * e[k] * d.h[k];
                let s = u.sinh();
                r[k] = d.weight[k] * (a * s * s - d.y[k]);
                j[2 * k] = d.weight[k] * a * s * s;
                j[2 * k + 1] = d.weight[k] * a * (2.0 * u).sinh() * u;
            }
        },
        lm,
    )?;
    let scale = [report.params[0].exp(), report.params[1].exp()];
    report.params = scale.to_vec();
    for a in 0..2 {
        for b in 0..2 {
            report.jtj[2 * a + b] /= scale[a] * scale[b];
        }
    }
    Ok(Solution { report, mean_reading })
}

fn distortion(u: &[f64]) -> f64 {
    let (mut tp, mut pp, mut tt) = (0.0, 0.0, 0.0);
    for &x in u {
        let (t, p) = (x.sinh().powi(2), x * x);
        tp += t * p;
        pp += p * p;
        tt += t * t;
    }
    if !(pp > 0.0 && tt > 0.0) {
        return 0.0;
    }
    let beta = tp / pp;
    let ss: f64 = u.iter().map(|&x| (x.sinh().powi(2) - beta * x * x).powi(2)).sum();
    (ss / tt).sqrt()
}

fn alpha_only(
    records: &[SpectrumRecord],
    response: &ResponseCurve,
    geometry: &DetectionGeometry,
    pump_wavelength: f64,
    options: &AbsoluteOptions,
) -> Result<f64> {
    let cand = prepare(records, response, geometry, pump_wavelength, options)?;
    Ok(fit_envelope(&cand, &options.lm)?.1.report.params[0])
}

/// Fits Y(λ) ≈ α sinh²((G/E_p)·E_j(λ)·Q(λ)) over the envelope support.
pub fn absolute_fit(
    records: &[SpectrumRecord],
    response: &ResponseCurve,
    geometry: &DetectionGeometry,
    pump_wavelength: f64,
    options: &AbsoluteOptions,
) -> Result<CalibrationResult> {
    let cand = prepare(records, response, geometry, pump_wavelength, options)?;
    let (d, sol) = fit_envelope(&cand, &options.lm)?;
    let rep = &sol.report;
    let (alpha, k) = (rep.params[0], rep.params[1]);
    let n = d.y.len();
    let u: Vec<f64> = (0..n).map(|i| k * d.reading[i] / sol.mean_reading * d.h[i]).collect();
    let model: Vec<f64> = u.iter().map(|x| alpha * x.sinh().powi(2)).collect();

    let dof = (n - 2).max(1) as f64;
    let s2 = 2.0 * rep.cost / dof;
    let inv = invert_spd(&rep.jtj, 2).unwrap_or(vec![f64::NAN; 4]);
    let to_g = 1.0 / sol.mean_reading;
    let covariance = [
        [s2 * inv[0], s2 * inv[1] * to_g],
        [s2 * inv[2] * to_g, s2 * inv[3] * to_g * to_g],
    ];
    let residual_rms = (rep.residuals.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    let relative_rms = relative_rms(&d.y, &model);

    let mut warnings = Vec::new();
    let dist = distortion(&u);
    if dist < options.degeneracy_threshold {
        warnings.push(format!(
            "gain unresolved; α degenerate with G² (shape distortion {dist:.2e} below {:.1e})",
            options.degeneracy_threshold
        ));
    }
    if !(alpha > 0.0 && alpha < 1.5) {
        warnings.push(format!("fitted α = {alpha:.4} outside (0, 1.5)"));
    }

    let sensitivity = options.sensitivity_step.and_then(|h| {
        let opts = AbsoluteOptions {
            sensitivity_step: None,
            ..options.clone()
        };
        let a_tau = alpha_only(records, response, &geometry.perturbed(1.0 + h, 1.0), pump_wavelength, &opts).ok()?;
        let a_area = alpha_only(records, response, &geometry.perturbed(1.0, 1.0 + h), pump_wavelength, &opts).ok()?;
        let d_tau = (a_tau - alpha) / (h * geometry.pulse_duration);
        let d_area = (a_area - alpha) / (h * geometry.source_area);
        Some(Sensitivity {
            d_alpha_d_pulse_duration: d_tau,
            d_alpha_d_source_area: d_area,
            relative_pulse_duration: d_tau * geometry.pulse_duration / alpha,
            relative_source_area: d_area * geometry.source_area / alpha,
        })
    });

    Ok(CalibrationResult {
        efficiency: response.response.iter().map(|r| alpha * r).collect(),
        response: response.clone(),
        alpha,
        alpha_sigma: covariance[0][0].sqrt(),
        pump_normalized_gain: k * to_g,
        pump_normalized_gain_sigma: covariance[1][1].sqrt(),
        covariance,
        fit_wavelengths: d.wavelengths,
        envelope: d.y,
        model,
        pump_readings: d.reading,
        fit_residuals: rep.residuals.clone(),
        residual_rms,
        relative_rms,
        cost_trace: rep.cost_trace.clone(),
        iterations: rep.iterations,
        gradient_norm: rep.gradient_norm,
        distortion: dist,
        sensitivity,
        warnings,
    })
}

fn relative_rms(y: &[f64], f: &[f64]) -> f64 {
    let s: f64 = y.iter().zip(f).map(|(y, f)| ((y - f) / f).powi(2)).sum();
    (s / y.len() as f64).sqrt()
}

/// Prediction of a held-out scan from fitted parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferReport {
    pub wavelengths: Vec<f64>,
    pub envelope: Vec<f64>,
    pub predicted: Vec<f64>,
    pub relative_rms: f64,
    /// RMS in noise units.
    pub residual_rms: f64,
}

/// Predicts the envelope of `records` (typically at another pump energy)
/// with the α and G/E_p of `result`, without refitting.
pub fn predict_envelope(
    result: &CalibrationResult,
    records: &[SpectrumRecord],
    geometry: &DetectionGeometry,
    pump_wavelength: f64,
    options: &AbsoluteOptions,
) -> Result<TransferReport> {
    let d = prepare(records, &result.response, geometry, pump_wavelength, options)?
        .select(Some(result.pump_normalized_gain));
    let predicted: Vec<f64> = (0..d.y.len())
        .map(|i| result.alpha * (result.pump_normalized_gain * d.reading[i] * d.h[i]).sinh().powi(2))
        .collect();
    let residual_rms = ((0..d.y.len())
        .map(|i| (d.weight[i] * (predicted[i] - d.y[i])).powi(2))
        .sum::<f64>()
        / d.y.len() as f64)
        .sqrt();
    Ok(TransferReport {
        relative_rms: relative_rms(&d.y, &predicted),
        residual_rms,
        wavelengths: d.wavelengths,
        envelope: d.y,
        predicted,
    })
}

/// Tabulated η(λ) with the α uncertainty propagated (R taken as exact).
#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyTable {
    pub wavelengths: Vec<f64>,
    pub efficiency: Vec<f64>,
    pub sigma: Vec<f64>,
    pub support: Vec<bool>,
}

pub fn quantum_efficiency(result: &CalibrationResult) -> EfficiencyTable {
    let r = &result.response;
    EfficiencyTable {
        wavelengths: r.wavelength_grid.clone(),
        efficiency: r.response.iter().map(|x| result.alpha * x).collect(),
        sigma: r.response.iter().map(|x| result.alpha_sigma * x).collect(),
        support: r.support_mask.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distortion_statistic() {
        let small: Vec<f64> = (0..100).map(|i| 1e-3 * (0.9 + 0.001 * i as f64)).collect();
        assert!(distortion(&small) < 1e-6);
        let big: Vec<f64> = (0..100).map(|i| 3.0 * (0.9 + 0.001 * i as f64)).collect();
        assert!(distortion(&big) > 1e-2);
    }
}

//! JSON export of calibration results, and re-import of response curves.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::NM;
use crate::synth::to_nm;
use crate::{Error, Result};

use super::absolute::{CalibrationResult, Sensitivity};
use super::relative::ResponseCurve;

pub const EXPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub inputs: Vec<String>,
    pub config_sha256: String,
    /// `None` when filtering was disabled.
    pub filter_cutoff: Option<f64>,
    pub filter_stage: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(inputs: Vec<String>, config_sha256: String, filter_cutoff: Option<f64>) -> Self {
        Provenance {
            tool: format!("pdcal {}", env!("CARGO_PKG_VERSION")),
            inputs,
            config_sha256,
            filter_cutoff,
            filter_stage: "per-spectrum".into(),
            seed: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitExport {
    pub wavelength_nm: Vec<f64>,
    pub envelope: Vec<f64>,
    pub model: Vec<f64>,
    pub pump_reading: Vec<f64>,
    pub normalized_residuals: Vec<f64>,
    pub residual_rms: f64,
    pub relative_rms: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub cost_trace: Vec<f64>,
    pub distortion: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityExport {
    pub d_alpha_d_pulse_duration_per_s: f64,
    pub d_alpha_d_source_area_per_m2: f64,
    pub relative_pulse_duration: f64,
    pub relative_source_area: f64,
}

impl From<Sensitivity> for SensitivityExport {
    fn from(s: Sensitivity) -> Self {
        SensitivityExport {
            d_alpha_d_pulse_duration_per_s: s.d_alpha_d_pulse_duration,
            d_alpha_d_source_area_per_m2: s.d_alpha_d_source_area,
            relative_pulse_duration: s.relative_pulse_duration,
            relative_source_area: s.relative_source_area,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationExport {
    pub format_version: u32,
    /// "relative" or "absolute"
    pub mode: String,
    pub provenance: Provenance,
    pub normalization_wavelength_nm: f64,
    pub wavelength_nm: Vec<f64>,
    pub response: Vec<f64>,
    pub support: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency_sigma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_normalized_gain: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitExport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivityExport>,
    pub warnings: Vec<String>,
}

fn nm_all(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| to_nm(x)).collect()
}

impl CalibrationExport {
    pub fn relative(curve: &ResponseCurve, provenance: Provenance) -> Self {
        CalibrationExport {
            format_version: EXPORT_VERSION,
            mode: "relative".into(),
            provenance,
            normalization_wavelength_nm: to_nm(curve.normalization_wavelength),
            wavelength_nm: nm_all(&curve.wavelength_grid),
            response: curve.response.clone(),
            support: curve.support_mask.clone(),
            efficiency: None,
            efficiency_sigma: None,
            alpha: None,
            pump_normalized_gain: None,
            covariance: None,
            fit: None,
            sensitivity: None,
            warnings: curve.warnings.clone(),
        }
    }

    pub fn absolute(result: &CalibrationResult, provenance: Provenance) -> Self {
        let mut e = Self::relative(&result.response, provenance);
        e.mode = "absolute".into();
        e.efficiency = Some(result.efficiency.clone());
        e.efficiency_sigma = Some(result.response.response.iter().map(|r| r * result.alpha_sigma).collect());
        e.alpha = Some(Estimate {
            value: result.alpha,
            sigma: result.alpha_sigma,
        });
        e.pump_normalized_gain = Some(Estimate {
            value: result.pump_normalized_gain,
            sigma: result.pump_normalized_gain_sigma,
        });
        e.covariance = Some(result.covariance);
        e.fit = Some(FitExport {
            wavelength_nm: nm_all(&result.fit_wavelengths),
            envelope: result.envelope.clone(),
            model: result.model.clone(),
            pump_reading: result.pump_readings.clone(),
            normalized_residuals: result.fit_residuals.clone(),
            residual_rms: result.residual_rms,
            relative_rms: result.relative_rms,
            iterations: result.iterations,
            gradient_norm: result.gradient_norm,
            cost_trace: result.cost_trace.clone(),
            distortion: result.distortion,
        });
        e.sensitivity = result.sensitivity.map(Into::into);
        e.warnings = result.warnings.clone();
        e
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("export serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let e: CalibrationExport = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if e.format_version != EXPORT_VERSION {
            return Err(format!("unsupported format_version {}", e.format_version));
        }
        let n = e.wavelength_nm.len();
        if e.response.len() != n || e.support.len() != n {
            return Err("wavelength_nm, response and support differ in length".into());
        }
        Ok(e)
    }

    pub fn response_curve(&self) -> ResponseCurve {
        ResponseCurve {
            wavelength_grid: self.wavelength_nm.iter().map(|x| x * NM).collect(),
            response: self.response.clone(),
            normalization_wavelength: self.normalization_wavelength_nm * NM,
            support_mask: self.support.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

pub fn read_export(path: &Path) -> Result<CalibrationExport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CalibrationExport::from_json(&text).map_err(|m| Error::format(path, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_round_trip() {
        let g: Vec<f64> = (0..5).map(|i| (700.0 + i as f64) * NM).collect();
        let c = ResponseCurve {
            wavelength_grid: g,
            response: vec![0.9, 1.0, 1.1, 1.0, 0.5],
            normalization_wavelength: 710.0 * NM,
            support_mask: vec![true, true, true, true, false],
            warnings: vec!["w".into()],
        };
        let e = CalibrationExport::relative(&c, Provenance::new(vec!["a.csv".into()], "00".into(), Some(0.2)));
        let back = CalibrationExport::from_json(&e.to_json()).unwrap();
        assert_eq!(back, e);
        let c2 = back.response_curve();
        assert_eq!(c2.response, c.response);
        for (a, b) in c2.wavelength_grid.iter().zip(&c.wavelength_grid) {
            assert!((a - b).abs() < 1e-20);
        }
        assert!(!e.to_json().contains("alpha"));
    }
}

//! On-disk dataset bundle: `metadata.toml`, one CSV per spectrum and an
//! optional `truth.csv`. See `docs/formats.md` for the schema.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constants::NM;
use crate::dispersion::SellmeierFile;
use crate::{Error, Result};

use super::scan::SpectrumRecord;
use super::truth::DetectorTruth;

pub const METADATA_FILE: &str = "metadata.toml";
pub const TRUTH_FILE: &str = "truth.csv";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalMeta {
    pub thickness_mm: f64,
    pub cut_angle_deg: f64,
    pub chi2_pm_per_v: f64,
    pub tilt_is_external: bool,
    pub sellmeier: SellmeierFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpMeta {
    pub wavelength_nm: f64,
    pub pulse_energy_uj: f64,
    pub pulse_duration_ps: f64,
    pub repetition_rate_hz: f64,
    pub beam_area_mm2: f64,
    pub field_amplitude_v_per_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryMeta {
    pub solid_angle_sr: f64,
    pub pixel_bandwidth_nm: f64,
    pub acquisition_time_s: f64,
    pub pulses_per_acquisition: u64,
    pub gamma_m4_sr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainMeta {
    pub gain_reference: f64,
    pub pump_normalized_gain: f64,
    pub use_dispersion_correction: bool,
    pub regime: crate::pdc_model::PdcRegime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthMeta {
    pub file: String,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordMeta {
    pub id: u32,
    pub tilt_rad: f64,
    pub pump_reading: f64,
    pub acquisition_time_s: f64,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleMetadata {
    pub format_version: u32,
    pub pump_wavelength_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crystal: Option<CrystalMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump: Option<PumpMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<GainMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthMeta>,
    pub records: Vec<RecordMeta>,
}

pub fn spectrum_file_name(id: u32, tilt: f64) -> String {
    format!("spectrum_{id:04}_tilt_{:+.4}deg.csv", tilt.to_degrees())
}

pub fn record_meta(records: &[SpectrumRecord]) -> Vec<RecordMeta> {
    records
        .iter()
        .map(|r| RecordMeta {
            id: r.spectrum_id,
            tilt_rad: r.tilt,
            pump_reading: r.pump_energy_reading,
            acquisition_time_s: r.acquisition_time,
            file: spectrum_file_name(r.spectrum_id, r.tilt),
        })
        .collect()
}

/// Two-column table with a header line; values in shortest round-trip form.
pub fn two_column_csv(header: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = String::with_capacity(24 * xs.len());
    out.push_str(header);
    out.push('\n');
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

/// Wavelength in nm, rounded to 1e-9 nm so grids print cleanly.
pub fn to_nm(wavelength: f64) -> f64 {
    (wavelength / NM * 1e9).round() / 1e9
}

pub fn spectrum_csv(record: &SpectrumRecord) -> String {
    let nm: Vec<f64> = record.pixel_grid.iter().map(|&l| to_nm(l)).collect();
    two_column_csv("wavelength_nm,counts", &nm, &record.counts)
}

pub fn truth_csv(truth: &DetectorTruth) -> String {
    let nm: Vec<f64> = truth.pixel_grid.iter().map(|&l| to_nm(l)).collect();
    two_column_csv("wavelength_nm,response", &nm, &truth.response_shape)
}

/// Parses delimited text with a header row into columns. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_table(text: &str, path: &Path, expected_header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::format(path, "empty file"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != expected_header {
        return Err(Error::format(
            path,
            format!("header {:?}, expected {:?}", cols, expected_header),
        ));
    }
    let mut out = vec![Vec::new(); cols.len()];
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::format(path, format!("row {}: {} fields", i + 1, fields.len())));
        }
        for (c, f) in out.iter_mut().zip(fields) {
            c.push(
                f.parse::<f64>()
                    .map_err(|e| Error::format(path, format!("row {}: '{f}': {e}", i + 1)))?,
            );
        }
    }
    Ok(out)
}

pub fn read_table(path: &Path, expected_header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, path, expected_header)
}

pub fn read_truth(path: &Path, alpha: f64, pump_wavelength: f64) -> Result<DetectorTruth> {
    let mut cols = read_table(path, &["wavelength_nm", "response"])?;
    let r = cols.pop().unwrap();
    let l = cols.pop().unwrap().into_iter().map(|x| x * NM).collect();
    DetectorTruth::new(l, r, alpha, pump_wavelength).map_err(|e| Error::format(path, e.to_string()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Renders every file of the bundle in memory, keyed by relative name.
pub fn render_bundle(
    metadata: &BundleMetadata,
    records: &[SpectrumRecord],
    truth: Option<&DetectorTruth>,
) -> Result<Vec<(String, String)>> {
    if metadata.records.len() != records.len() {
        return Err(Error::Invalid("metadata and record list differ in length".into()));
    }
    let meta = toml::to_string(metadata).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut files = vec![(METADATA_FILE.to_string(), meta)];
    for (m, r) in metadata.records.iter().zip(records) {
        r.validate()?;
        files.push((m.file.clone(), spectrum_csv(r)));
    }
    if let Some(t) = truth {
        let name = metadata
            .truth
            .as_ref()
            .map(|t| t.file.clone())
            .unwrap_or_else(|| TRUTH_FILE.to_string());
        files.push((name, truth_csv(t)));
    }
    Ok(files)
}

pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|(name, body)| {
            let p = dir.join(name);
            write(&p, body)?;
            Ok(p)
        })
        .collect()
}

pub fn write_bundle(
    dir: &Path,
    metadata: &BundleMetadata,
    records: &[SpectrumRecord],
    truth: Option<&DetectorTruth>,
) -> Result<Vec<PathBuf>> {
    let files = render_bundle(metadata, records, truth)?;
    write_files(dir, &files)
}

pub fn read_metadata(dir: &Path) -> Result<BundleMetadata> {
    let path = dir.join(METADATA_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: BundleMetadata = toml::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    if meta.format_version != FORMAT_VERSION {
        return Err(Error::format(
            &path,
            format!("unsupported format_version {}", meta.format_version),
        ));
    }
    Ok(meta)
}

/// Reads a bundle. Every spectrum file must share the first file's grid.
pub fn read_bundle(dir: &Path) -> Result<(BundleMetadata, Vec<SpectrumRecord>)> {
    let meta = read_metadata(dir)?;
    let mut records: Vec<SpectrumRecord> = Vec::with_capacity(meta.records.len());
    for m in &meta.records {
        let path = dir.join(&m.file);
        let mut cols = read_table(&path, &["wavelength_nm", "counts"])?;
        let counts = cols.pop().unwrap();
        let grid: Vec<f64> = cols.pop().unwrap().into_iter().map(|x| x * NM).collect();
        if let Some(first) = records.first() {
            if first.pixel_grid != grid {
                return Err(Error::format(&path, "pixel grid differs from the first spectrum"));
            }
        }
        let r = SpectrumRecord {
            spectrum_id: m.id,
            pixel_grid: grid,
            counts,
            tilt: m.tilt_rad,
            pump_energy_reading: m.pump_reading,
            acquisition_time: m.acquisition_time_s,
        };
        r.validate().map_err(|e| Error::format(&path, e.to_string()))?;
        records.push(r);
    }
    Ok((meta, records))
}

//! Run configuration: a strict TOML schema resolved into model types.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use pdc_core::calib::{AbsoluteOptions, LinearityOptions, RelativeOptions, SupportRule, DEFAULT_CUTOFF};
use pdc_core::constants::NM;
use pdc_core::dispersion::{CrystalSpec, SellmeierSet};
use pdc_core::pdc_model::{gain_shape, pinhole_solid_angle, DetectionGeometry, GainParams, PdcRegime, PumpSpec};
use pdc_core::synth::{
    pixel_grid, read_truth, smooth_response, structured_response, DetectorTruth, NoiseModel, PumpDrift,
    TiltSchedule,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub crystal: CrystalConfig,
    #[serde(default)]
    pub pump: PumpConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub gain: GainConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub truth: TruthConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub power_scan: Option<PowerScanConfig>,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub inspect: InspectConfig,
    #[serde(default)]
    pub paths: PathsConfig,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrystalConfig {
    #[serde(default)]
    pub sellmeier: Option<String>,
    #[serde(default)]
    pub sellmeier_file: Option<PathBuf>,
    pub thickness_mm: f64,
    pub chi2_pm_per_v: f64,
    /// Defaults to the cut that phase matches degeneracy at zero tilt.
    #[serde(default)]
    pub cut_angle_deg: Option<f64>,
    pub tilt_is_external: bool,
}

impl Default for CrystalConfig {
    fn default() -> Self {
        CrystalConfig {
            sellmeier: None,
            sellmeier_file: None,
            thickness_mm: 3.0,
            chi2_pm_per_v: 4.0,
            cut_angle_deg: None,
            tilt_is_external: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpConfig {
    pub wavelength_nm: f64,
    pub pulse_energy_uj: f64,
    pub pulse_duration_ps: f64,
    pub repetition_rate_hz: f64,
    pub beam_diameter_mm: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        PumpConfig {
            wavelength_nm: 355.0,
            pulse_energy_uj: 100.0,
            pulse_duration_ps: 29.4,
            repetition_rate_hz: 50.0,
            beam_diameter_mm: 0.6,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default)]
    pub solid_angle_sr: Option<f64>,
    #[serde(default)]
    pub pinhole_diameter_mm: Option<f64>,
    #[serde(default)]
    pub focal_length_mm: Option<f64>,
    pub pixel_bandwidth_nm: f64,
    pub acquisition_time_s: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            solid_angle_sr: None,
            pinhole_diameter_mm: Some(0.5),
            focal_length_mm: Some(200.0),
            pixel_bandwidth_nm: 0.063,
            acquisition_time_s: 0.5,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub start_nm: f64,
    pub stop_nm: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            start_nm: 500.0,
            stop_nm: 920.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainConfig {
    /// G·Q at 2λ_p at `reference_energy_uj`.
    pub gain_reference: f64,
    /// Pulse energy at which `gain_reference` holds; defaults to the pump's.
    pub reference_energy_uj: Option<f64>,
    pub regime: PdcRegime,
    pub dispersion_correction: bool,
}

impl Default for GainConfig {
    fn default() -> Self {
        GainConfig {
            gain_reference: 1e-3,
            reference_energy_uj: None,
            regime: PdcRegime::HighGain,
            dispersion_correction: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub start_deg: f64,
    pub step_deg: f64,
    pub steps: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let t = TiltSchedule::nominal();
        ScanConfig {
            start_deg: t.start.to_degrees(),
            step_deg: t.step.to_degrees(),
            steps: t.steps,
        }
    }
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TruthShape {
    Flat,
    Smooth,
    Structured,
    File,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthConfig {
    pub alpha: f64,
    pub shape: TruthShape,
    #[serde(default)]
    pub edge_nm: Option<f64>,
    #[serde(default)]
    pub file: Option<PathBuf>,
}

impl Default for TruthConfig {
    fn default() -> Self {
        TruthConfig {
            alpha: 1.0,
            shape: TruthShape::Flat,
            edge_nm: None,
            file: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub shot_noise: bool,
    #[serde(default)]
    pub readout_sigma: f64,
    #[serde(default)]
    pub drift: PumpDrift,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerScanConfig {
    pub probe_nm: f64,
    pub start_uj: f64,
    pub stop_uj: f64,
    pub step_uj: f64,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Low-pass cutoff as a fraction of Nyquist; 1 disables filtering.
    pub cutoff: f64,
    pub use_gain_shape: bool,
    pub relative_floor: f64,
    pub absolute_floor: f64,
    pub sidelobe_ratio: f64,
    pub sidelobe_window: usize,
    pub exclude_scan_ends: bool,
    pub scallop_threshold: f64,
    pub degeneracy_threshold: f64,
    pub sensitivity: bool,
    pub linearity_tolerance: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let s = SupportRule::default();
        CalibrationConfig {
            cutoff: DEFAULT_CUTOFF,
            use_gain_shape: true,
            relative_floor: s.relative_floor,
            absolute_floor: s.absolute_floor,
            sidelobe_ratio: s.sidelobe_ratio,
            sidelobe_window: s.sidelobe_window,
            exclude_scan_ends: s.exclude_scan_ends,
            scallop_threshold: pdc_core::calib::DEFAULT_SCALLOP_THRESHOLD,
            degeneracy_threshold: pdc_core::calib::DEFAULT_DEGENERACY_THRESHOLD,
            sensitivity: true,
            linearity_tolerance: LinearityOptions::default().tolerance,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InspectConfig {
    /// Half width of the dispersion window around 2λ_p.
    pub dispersion_half_width_nm: f64,
    pub dispersion_step_nm: f64,
    /// Tilt for the angular map; defaults to the degenerate tilt.
    #[serde(default)]
    pub map_tilt_deg: Option<f64>,
    pub map_max_angle_mrad: f64,
    pub map_angles: usize,
    pub map_start_nm: f64,
    pub map_stop_nm: f64,
    pub map_step_nm: f64,
}

impl Default for InspectConfig {
    fn default() -> Self {
        InspectConfig {
            dispersion_half_width_nm: 150.0,
            dispersion_step_nm: 1.0,
            map_tilt_deg: None,
            map_max_angle_mrad: 40.0,
            map_angles: 81,
            map_start_nm: 600.0,
            map_stop_nm: 850.0,
            map_step_nm: 1.0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    /// Dataset bundle: written by `simulate`, read by the other commands.
    #[serde(default)]
    pub bundle: Option<PathBuf>,
    /// Relative-response export used by absolute calibration and `compare`.
    #[serde(default)]
    pub response: Option<PathBuf>,
    /// Low-gain bundle for absolute calibration without a response file.
    #[serde(default)]
    pub low_gain_bundle: Option<PathBuf>,
    #[serde(default)]
    pub lamp: Option<PathBuf>,
    #[serde(default)]
    pub budget: Option<PathBuf>,
    /// Default output directory.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// High-gain bundles at other pump energies, predicted without refitting.
    #[serde(default)]
    pub transfer_bundles: Vec<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A parsed configuration with its provenance.
pub struct Loaded {
    pub config: RunConfig,
    pub path: PathBuf,
    pub base: PathBuf,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let bytes = std::fs::read(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| config_err(format!("{} is not UTF-8", path.display())))?;
    let config: RunConfig = toml::from_str(text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loaded = Loaded {
        config,
        path: path.to_path_buf(),
        base,
        sha256: sha256_hex(&bytes),
    };
    loaded.check_files()?;
    Ok(loaded)
}

impl Loaded {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Input files named by the config must exist at load.
    fn check_files(&self) -> CliResult<()> {
        let c = &self.config;
        let inputs = [
            ("crystal.sellmeier_file", c.crystal.sellmeier_file.as_ref()),
            ("truth.file", c.truth.file.as_ref()),
            ("paths.lamp", c.paths.lamp.as_ref()),
            ("paths.budget", c.paths.budget.as_ref()),
        ];
        for (key, p) in inputs {
            if let Some(p) = p {
                let r = self.resolve(p);
                if !r.is_file() {
                    return Err(config_err(format!("{key}: {} does not exist", r.display())));
                }
            }
        }
        Ok(())
    }

    pub fn path_of(&self, key: &str, p: &Option<PathBuf>) -> CliResult<PathBuf> {
        p.as_ref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| config_err(format!("paths.{key} is required for this command")))
    }

    /// Output directory: `--out` if given, else `paths.<key>`, else `out`.
    pub fn out_dir(&self, flag: Option<&Path>, fallback: Option<&PathBuf>) -> PathBuf {
        match (flag, fallback) {
            (Some(f), _) => f.to_path_buf(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => self.resolve(self.config.paths.out.as_deref().unwrap_or(Path::new("out"))),
        }
    }
}

/// Model objects built from a validated configuration.
pub struct Model {
    pub crystal: CrystalSpec,
    pub pump: PumpSpec,
    pub geometry: DetectionGeometry,
    pub gain: GainParams,
    pub grid: Vec<f64>,
}

fn positive(key: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("{key} must be > 0, got {v}")))
    }
}

impl Loaded {
    pub fn sellmeier(&self) -> CliResult<SellmeierSet> {
        let c = &self.config.crystal;
        match (&c.sellmeier, &c.sellmeier_file) {
            (Some(_), Some(_)) => Err(config_err("set only one of crystal.sellmeier and crystal.sellmeier_file")),
            (Some(name), None) => SellmeierSet::bundled(name).map_err(|e| config_err(e.to_string())),
            (None, Some(f)) => Ok(SellmeierSet::from_file(&self.resolve(f))?),
            (None, None) => Ok(SellmeierSet::bbo()),
        }
    }

    pub fn model(&self) -> CliResult<Model> {
        let c = &self.config;
        let lp = positive("pump.wavelength_nm", c.pump.wavelength_nm)? * NM;
        let thickness = positive("crystal.thickness_mm", c.crystal.thickness_mm)? * 1e-3;
        let chi2 = positive("crystal.chi2_pm_per_v", c.crystal.chi2_pm_per_v)? * 1e-12;
        let s = self.sellmeier()?;
        let crystal = match c.crystal.cut_angle_deg {
            Some(a) => CrystalSpec::new(thickness, a.to_radians(), chi2, s, c.crystal.tilt_is_external)?,
            None => CrystalSpec::cut_for_degeneracy(thickness, chi2, s, lp, c.crystal.tilt_is_external)?,
        };
        let pump = PumpSpec::for_crystal(
            &crystal,
            lp,
            positive("pump.pulse_energy_uj", c.pump.pulse_energy_uj)? * 1e-6,
            positive("pump.pulse_duration_ps", c.pump.pulse_duration_ps)? * 1e-12,
            positive("pump.repetition_rate_hz", c.pump.repetition_rate_hz)?,
            positive("pump.beam_diameter_mm", c.pump.beam_diameter_mm)? * 1e-3,
        )?;
        let g = &c.geometry;
        let solid_angle = match (g.solid_angle_sr, g.pinhole_diameter_mm, g.focal_length_mm) {
            (Some(s), None, None) => positive("geometry.solid_angle_sr", s)?,
            (None, Some(d), Some(f)) => pinhole_solid_angle(
                positive("geometry.pinhole_diameter_mm", d)? * 1e-3,
                positive("geometry.focal_length_mm", f)? * 1e-3,
            ),
            _ => {
                return Err(config_err(
                    "geometry needs either solid_angle_sr or both pinhole_diameter_mm and focal_length_mm",
                ))
            }
        };
        let bw = positive("geometry.pixel_bandwidth_nm", g.pixel_bandwidth_nm)? * NM;
        let geometry = DetectionGeometry::new(
            solid_angle,
            bw,
            positive("geometry.acquisition_time_s", g.acquisition_time_s)?,
            &pump,
        )?;
        let (a, b) = (c.grid.start_nm * NM, c.grid.stop_nm * NM);
        if !(a > lp && b > a) {
            return Err(config_err("grid needs pump wavelength < start_nm < stop_nm"));
        }
        crystal.sellmeier.check_range(a).map_err(|e| config_err(format!("grid: {e}")))?;
        crystal.sellmeier.check_range(b).map_err(|e| config_err(format!("grid: {e}")))?;
        let grid = pixel_grid(a, b, bw);
        let reference_field = match c.gain.reference_energy_uj {
            Some(e) => pump.with_energy(positive("gain.reference_energy_uj", e)? * 1e-6)?.field_amplitude,
            None => pump.field_amplitude,
        };
        let gain = GainParams::new(c.gain.gain_reference, reference_field, c.gain.dispersion_correction)
            .map_err(|e| config_err(e.to_string()))?
            .with_regime(c.gain.regime)
            .scaled_to_field(pump.field_amplitude);
        Ok(Model {
            crystal,
            pump,
            geometry,
            gain,
            grid,
        })
    }

    pub fn tilts(&self) -> CliResult<Vec<f64>> {
        let s = &self.config.scan;
        if s.steps == 0 || !s.step_deg.is_finite() || !s.start_deg.is_finite() {
            return Err(config_err("scan needs steps ≥ 1 and finite angles"));
        }
        Ok(TiltSchedule {
            start: s.start_deg.to_radians(),
            step: s.step_deg.to_radians(),
            steps: s.steps,
        }
        .angles())
    }

    pub fn truth(&self, m: &Model) -> CliResult<DetectorTruth> {
        let t = &self.config.truth;
        let lp = m.pump.wavelength;
        let edge = || {
            t.edge_nm
                .map(|e| e * NM)
                .ok_or_else(|| config_err("truth.edge_nm is required for the structured shape"))
        };
        let truth = match t.shape {
            TruthShape::Flat => DetectorTruth::flat(m.grid.clone(), t.alpha, lp)?,
            TruthShape::Smooth => DetectorTruth::from_fn(m.grid.clone(), t.alpha, lp, smooth_response)?,
            TruthShape::Structured => {
                let e = edge()?;
                DetectorTruth::from_fn(m.grid.clone(), t.alpha, lp, |l| structured_response(l, e))?
            }
            TruthShape::File => {
                let f = t.file.as_ref().ok_or_else(|| config_err("truth.file is required for shape = \"file\""))?;
                let tab = read_truth(&self.resolve(f), t.alpha, lp)?;
                let r: Vec<f64> = m
                    .grid
                    .iter()
                    .map(|&l| pdc_core::interp::linear(&tab.pixel_grid, &tab.response_shape, l))
                    .collect::<Option<_>>()
                    .ok_or_else(|| config_err("truth file does not cover the pixel grid"))?;
                DetectorTruth::new(m.grid.clone(), r, t.alpha, lp)?
            }
        };
        Ok(truth)
    }

    pub fn noise(&self) -> CliResult<NoiseModel> {
        let n = &self.config.noise;
        let model = NoiseModel {
            shot_noise: n.shot_noise,
            readout_sigma: n.readout_sigma,
            pump_drift: n.drift.clone(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn energies(&self) -> CliResult<(f64, Vec<f64>)> {
        let p = self
            .config
            .power_scan
            .as_ref()
            .ok_or_else(|| config_err("[power_scan] is required for --power-scan"))?;
        let step = positive("power_scan.step_uj", p.step_uj)?;
        let start = positive("power_scan.start_uj", p.start_uj)?;
        if !(p.stop_uj >= start) {
            return Err(config_err("power_scan.stop_uj must be ≥ start_uj"));
        }
        let n = ((p.stop_uj - start) / step + 1e-9).floor() as usize + 1;
        Ok((p.probe_nm * NM, (0..n).map(|i| (start + i as f64 * step) * 1e-6).collect()))
    }

    fn support(&self) -> CliResult<SupportRule> {
        let c = &self.config.calibration;
        if !(0.0..1.0).contains(&c.relative_floor) || c.absolute_floor < 0.0 || !(0.0..=1.0).contains(&c.sidelobe_ratio) {
            return Err(config_err("calibration support floors out of range"));
        }
        Ok(SupportRule {
            relative_floor: c.relative_floor,
            absolute_floor: c.absolute_floor,
            sidelobe_ratio: c.sidelobe_ratio,
            sidelobe_window: c.sidelobe_window,
            exclude_scan_ends: c.exclude_scan_ends,
        })
    }

    pub fn cutoff(&self) -> CliResult<Option<f64>> {
        let c = self.config.calibration.cutoff;
        if !(c > 0.0 && c <= 1.0) {
            return Err(config_err(format!("calibration.cutoff must be in (0, 1], got {c}")));
        }
        Ok(if c >= 1.0 { None } else { Some(c) })
    }

    pub fn gain_shape(&self, m: &Model) -> CliResult<Option<Vec<f64>>> {
        if !self.config.calibration.use_gain_shape {
            return Ok(None);
        }
        let v = m
            .grid
            .iter()
            .map(|&l| gain_shape(l, &m.crystal, m.pump.wavelength, self.config.gain.dispersion_correction))
            .collect::<pdc_core::Result<Vec<f64>>>()?;
        Ok(Some(v))
    }

    pub fn relative_options(&self, m: &Model) -> CliResult<RelativeOptions> {
        Ok(RelativeOptions {
            cutoff: self.cutoff()?,
            gain_shape: self.gain_shape(m)?,
            support: self.support()?,
            scallop_threshold: self.config.calibration.scallop_threshold,
        })
    }

    pub fn absolute_options(&self, m: &Model) -> CliResult<AbsoluteOptions> {
        let c = &self.config.calibration;
        Ok(AbsoluteOptions {
            cutoff: self.cutoff()?,
            gain_shape: self.gain_shape(m)?,
            support: self.support()?,
            degeneracy_threshold: c.degeneracy_threshold,
            sensitivity_step: c.sensitivity.then_some(1e-3),
            ..Default::default()
        })
    }

    pub fn linearity(&self) -> LinearityOptions {
        LinearityOptions {
            tolerance: self.config.calibration.linearity_tolerance,
            ..Default::default()
        }
    }
}

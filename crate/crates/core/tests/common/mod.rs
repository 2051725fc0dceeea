#![allow(dead_code)]

use pdc_core::constants::NM;
use pdc_core::dispersion::CrystalSpec;
use pdc_core::pdc_model::{gain_shape, DetectionGeometry, GainParams, PdcRegime, PumpSpec};
use pdc_core::synth::{pixel_grid, synthesize_tilt_scan, DetectorTruth, NoiseModel, SpectrumRecord, TiltSchedule};

pub const LP: f64 = 355e-9;

pub struct Setup {
    pub crystal: CrystalSpec,
    pub pump: PumpSpec,
    pub geometry: DetectionGeometry,
    pub grid: Vec<f64>,
}

pub fn setup() -> Setup {
    let crystal = CrystalSpec::bbo_default(LP).unwrap();
    let pump = PumpSpec::nominal(100e-6);
    let geometry = DetectionGeometry::nominal(&pump);
    let grid = pixel_grid(500.0 * NM, 920.0 * NM, geometry.pixel_bandwidth);
    Setup {
        crystal,
        pump,
        geometry,
        grid,
    }
}

impl Setup {
    pub fn shape(&self) -> Vec<f64> {
        self.grid
            .iter()
            .map(|&l| gain_shape(l, &self.crystal, LP, false).unwrap())
            .collect()
    }

    pub fn gain(&self, g: f64, regime: PdcRegime) -> GainParams {
        GainParams::new(g, self.pump.field_amplitude, false).unwrap().with_regime(regime)
    }

    pub fn scan(&self, truth: &DetectorTruth, gain: &GainParams, tilts: &[f64], noise: &NoiseModel) -> Vec<SpectrumRecord> {
        synthesize_tilt_scan(&self.crystal, &self.pump, &self.geometry, truth, gain, tilts, noise, 7).unwrap()
    }

    pub fn scan_at(&self, pump: &PumpSpec, truth: &DetectorTruth, gain: &GainParams, tilts: &[f64]) -> Vec<SpectrumRecord> {
        let geometry = DetectionGeometry::nominal(pump);
        let g = gain.scaled_to_field(pump.field_amplitude);
        synthesize_tilt_scan(&self.crystal, pump, &geometry, truth, &g, tilts, &NoiseModel::none(), 7).unwrap()
    }
}

/// Tilts from zero towards short signal wavelengths, 0.01° apart.
pub fn tilts(steps: usize) -> Vec<f64> {
    TiltSchedule {
        steps,
        ..TiltSchedule::nominal()
    }
    .angles()
}

pub fn rms_on(a: &[f64], b: &[f64], mask: &[bool]) -> f64 {
    let d: Vec<f64> = (0..a.len()).filter(|&i| mask[i]).map(|i| (a[i] / b[i] - 1.0).powi(2)).collect();
    (d.iter().sum::<f64>() / d.len() as f64).sqrt()
}

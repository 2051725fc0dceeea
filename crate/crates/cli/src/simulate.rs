use std::path::Path;

use pdc_core::constants::NM;
use pdc_core::synth::{
    power_scan, record_meta, render_bundle, synthesize_tilt_scan, BundleMetadata, CrystalMeta, GainMeta,
    GeometryMeta, PumpMeta, TruthMeta, FORMAT_VERSION, TRUTH_FILE,
};

use crate::config::{Loaded, Model};
use crate::error::CliResult;
use crate::output::{table, Staged};

pub const POWER_SCAN_FILE: &str = "power_scan.csv";

/// Rounds away unit-conversion noise, as `to_nm` does for wavelengths.
fn clean(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(12 - x.abs().log10().ceil() as i32);
    (x * scale).round() / scale
}

fn metadata(m: &Model, seed: u64, alpha: f64) -> BundleMetadata {
    let (c, p, g) = (&m.crystal, &m.pump, &m.geometry);
    BundleMetadata {
        format_version: FORMAT_VERSION,
        pump_wavelength_nm: p.wavelength / NM,
        seed: Some(seed),
        crystal: Some(CrystalMeta {
            thickness_mm: clean(c.thickness * 1e3),
            cut_angle_deg: clean(c.cut_angle.to_degrees()),
            chi2_pm_per_v: clean(c.chi2_reference * 1e12),
            tilt_is_external: c.tilt_is_external,
            sellmeier: c.sellmeier.to_file_repr(),
        }),
        pump: Some(PumpMeta {
            wavelength_nm: p.wavelength / NM,
            pulse_energy_uj: clean(p.pulse_energy * 1e6),
            pulse_duration_ps: clean(p.pulse_duration * 1e12),
            repetition_rate_hz: p.repetition_rate,
            beam_area_mm2: clean(p.beam_area * 1e6),
            field_amplitude_v_per_m: p.field_amplitude,
        }),
        geometry: Some(GeometryMeta {
            solid_angle_sr: g.solid_angle,
            pixel_bandwidth_nm: g.pixel_bandwidth / NM,
            acquisition_time_s: g.acquisition_time,
            pulses_per_acquisition: g.pulses_per_acquisition,
            gamma_m4_sr: g.gamma,
        }),
        gain: Some(GainMeta {
            gain_reference: m.gain.gain_reference,
            pump_normalized_gain: m.gain.pump_normalized_gain,
            use_dispersion_correction: m.gain.use_dispersion_correction,
            regime: m.gain.regime,
        }),
        truth: Some(TruthMeta {
            file: TRUTH_FILE.to_string(),
            alpha,
        }),
        records: Vec::new(),
    }
}

pub fn run(cfg: &Loaded, seed: u64, out: Option<&Path>, power: bool) -> CliResult<()> {
    let m = cfg.model()?;
    let noise = cfg.noise()?;
    let mut staged = Staged::new();
    if power {
        let (probe, energies) = cfg.energies()?;
        let scan = power_scan(&m.crystal, &m.pump, &m.geometry, &m.gain, probe, &energies, &noise, seed)?;
        let e: Vec<f64> = scan.iter().map(|p| p.0 * 1e6).collect();
        let n: Vec<f64> = scan.iter().map(|p| p.1).collect();
        staged.add(POWER_SCAN_FILE, table(&["pulse_energy_uj", "counts"], &[&e, &n]));
        let dir = cfg.out_dir(out, cfg.config.paths.bundle.as_ref());
        staged.commit(&dir, "simulate --power-scan", &cfg.path, &cfg.sha256, seed)?;
        println!(
            "power scan: {} energies {:.1}–{:.1} µJ at {:.2} nm, peak counts {:.4e} -> {}",
            e.len(),
            e[0],
            e[e.len() - 1],
            probe / NM,
            n.iter().fold(0.0f64, |a, &b| a.max(b)),
            dir.join(POWER_SCAN_FILE).display()
        );
        return Ok(());
    }
    let tilts = cfg.tilts()?;
    let truth = cfg.truth(&m)?;
    let records = synthesize_tilt_scan(&m.crystal, &m.pump, &m.geometry, &truth, &m.gain, &tilts, &noise, seed)?;
    let mut meta = metadata(&m, seed, truth.scale_alpha);
    meta.records = record_meta(&records);
    for (name, body) in render_bundle(&meta, &records, Some(&truth))? {
        staged.add(name, body);
    }
    let dir = cfg.out_dir(out, cfg.config.paths.bundle.as_ref());
    staged.commit(&dir, "simulate", &cfg.path, &cfg.sha256, seed)?;

    let peak = records
        .iter()
        .flat_map(|r| r.counts.iter())
        .fold(0.0f64, |a, &b| a.max(b));
    println!(
        "{} spectra, {:.3}–{:.3} nm ({} pixels), peak counts {:.4e} -> {}",
        records.len(),
        m.grid[0] / NM,
        m.grid[m.grid.len() - 1] / NM,
        m.grid.len(),
        peak,
        dir.display()
    );
    Ok(())
}

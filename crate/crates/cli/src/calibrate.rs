use std::path::{Path, PathBuf};

use pdc_core::calib::{
    absolute_fit, predict_envelope, quantum_efficiency, read_export, relative_response, CalibrationExport,
    Provenance, ResponseCurve,
};
use pdc_core::constants::NM;
use pdc_core::synth::{read_bundle, to_nm, BundleMetadata, SpectrumRecord};

use crate::config::{Loaded, Model};
use crate::error::{CliError, CliResult};
use crate::output::{flags, table, Staged};

pub const RESPONSE_JSON: &str = "response.json";
pub const RESPONSE_CSV: &str = "response.csv";
pub const CALIBRATION_JSON: &str = "calibration.json";
pub const EFFICIENCY_CSV: &str = "efficiency.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Relative,
    Absolute,
}

/// Reads a bundle and checks it against the configured experiment.
pub fn load_bundle(
    m: &Model,
    dir: &Path,
    warnings: &mut Vec<String>,
) -> CliResult<(BundleMetadata, Vec<SpectrumRecord>)> {
    let (meta, records) = read_bundle(dir)?;
    if records.is_empty() {
        return Err(CliError::Config(format!("bundle {} holds no spectra", dir.display())));
    }
    let lp = m.pump.wavelength / NM;
    if (meta.pump_wavelength_nm - lp).abs() > 1e-6 {
        return Err(CliError::Config(format!(
            "bundle {} was taken at λ_p = {} nm, config says {lp} nm",
            dir.display(),
            meta.pump_wavelength_nm
        )));
    }
    if let Some(g) = &meta.geometry {
        if (g.gamma_m4_sr / m.geometry.gamma - 1.0).abs() > 1e-9 {
            warnings.push(format!(
                "bundle {} records Γ = {:.6e}, config gives {:.6e}; using the config",
                dir.display(),
                g.gamma_m4_sr,
                m.geometry.gamma
            ));
        }
    }
    let n = records[0].pixel_grid.len();
    if n != m.grid.len()
        || records[0]
            .pixel_grid
            .iter()
            .zip(&m.grid)
            .any(|(a, b)| (a - b).abs() > 1e-6 * NM)
    {
        return Err(CliError::Config(format!(
            "bundle {} pixel grid differs from the configured grid",
            dir.display()
        )));
    }
    Ok((meta, records))
}

fn relative_from_bundle(
    cfg: &Loaded,
    m: &Model,
    dir: &Path,
    warnings: &mut Vec<String>,
) -> CliResult<ResponseCurve> {
    let (_, records) = load_bundle(m, dir, warnings)?;
    Ok(relative_response(&records, m.pump.wavelength, &cfg.relative_options(m)?)?)
}

fn provenance(cfg: &Loaded, inputs: &[PathBuf], seed: u64) -> CliResult<Provenance> {
    let mut p = Provenance::new(
        inputs.iter().map(|p| p.display().to_string()).collect(),
        cfg.sha256.clone(),
        cfg.cutoff()?,
    );
    p.seed = Some(seed);
    Ok(p)
}

fn response_csv(curve: &ResponseCurve) -> String {
    let nm: Vec<f64> = curve.wavelength_grid.iter().map(|&l| to_nm(l)).collect();
    table(
        &["wavelength_nm", "response", "support"],
        &[&nm, &curve.response, &flags(&curve.support_mask)],
    )
}

fn strict_check(strict: bool, warnings: &[String]) -> CliResult<()> {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if strict && !warnings.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} warning(s) under --strict; no output written",
            warnings.len()
        )));
    }
    Ok(())
}

pub fn run(cfg: &Loaded, seed: u64, out: Option<&Path>, mode: Mode, strict: bool) -> CliResult<()> {
    let m = cfg.model()?;
    let paths = &cfg.config.paths;
    let bundle = cfg.path_of("bundle", &paths.bundle)?;
    let mut staged = Staged::new();
    let mut warnings = Vec::new();
    let dir = cfg.out_dir(out, None);
    match mode {
        Mode::Relative => {
            let curve = relative_from_bundle(cfg, &m, &bundle, &mut warnings)?;
            warnings.extend(curve.warnings.iter().cloned());
            strict_check(strict, &warnings)?;
            let inputs = vec![bundle];
            let export = CalibrationExport::relative(&curve, provenance(cfg, &inputs, seed)?);
            staged.input(&inputs[0]);
            staged.add(RESPONSE_JSON, export.to_json());
            staged.add(RESPONSE_CSV, response_csv(&curve));
            staged.commit(&dir, "calibrate --mode relative", &cfg.path, &cfg.sha256, seed)?;
            let (a, b) = curve.support_range().unwrap_or((f64::NAN, f64::NAN));
            let n = curve.support_mask.iter().filter(|&&s| s).count();
            println!(
                "relative response: support {:.3}–{:.3} nm ({n} pixels), normalized at {:.3} nm -> {}",
                a / NM,
                b / NM,
                curve.normalization_wavelength / NM,
                dir.join(RESPONSE_JSON).display()
            );
        }
        Mode::Absolute => {
            let mut inputs = vec![bundle.clone()];
            let response = match (&paths.response, &paths.low_gain_bundle) {
                (Some(r), _) => {
                    let p = cfg.resolve(r);
                    let e = read_export(&p)?;
                    inputs.push(p);
                    e.response_curve()
                }
                (None, Some(b)) => {
                    let p = cfg.resolve(b);
                    let c = relative_from_bundle(cfg, &m, &p, &mut warnings)?;
                    inputs.push(p);
                    c
                }
                (None, None) => {
                    return Err(CliError::Config(
                        "absolute mode needs paths.response or paths.low_gain_bundle".into(),
                    ))
                }
            };
            let (_, records) = load_bundle(&m, &bundle, &mut warnings)?;
            let opts = cfg.absolute_options(&m)?;
            let result = absolute_fit(&records, &response, &m.geometry, m.pump.wavelength, &opts)?;
            warnings.extend(result.warnings.iter().cloned());

            let mut transfers = Vec::new();
            for (k, t) in paths.transfer_bundles.iter().enumerate() {
                let p = cfg.resolve(t);
                let (_, recs) = load_bundle(&m, &p, &mut warnings)?;
                let rep = predict_envelope(&result, &recs, &m.geometry, m.pump.wavelength, &opts)?;
                let nm: Vec<f64> = rep.wavelengths.iter().map(|&l| to_nm(l)).collect();
                staged.add(
                    format!("transfer_{k}.csv"),
                    table(&["wavelength_nm", "envelope", "predicted"], &[&nm, &rep.envelope, &rep.predicted]),
                );
                transfers.push((p.clone(), rep.relative_rms));
                inputs.push(p);
            }
            strict_check(strict, &warnings)?;

            let mut export = CalibrationExport::absolute(&result, provenance(cfg, &inputs, seed)?);
            export.warnings = warnings.clone();
            let eta = quantum_efficiency(&result);
            let nm: Vec<f64> = eta.wavelengths.iter().map(|&l| to_nm(l)).collect();
            for p in &inputs {
                staged.input(p);
            }
            staged.add(CALIBRATION_JSON, export.to_json());
            staged.add(
                EFFICIENCY_CSV,
                table(
                    &["wavelength_nm", "efficiency", "sigma", "support"],
                    &[&nm, &eta.efficiency, &eta.sigma, &flags(&eta.support)],
                ),
            );
            staged.commit(&dir, "calibrate --mode absolute", &cfg.path, &cfg.sha256, seed)?;
            println!("alpha = {:.5} ± {:.5}", result.alpha, result.alpha_sigma);
            println!(
                "G/E_p = {:.6e} ± {:.2e} m/V (G(2λ_p) = {:.4} at the mean pump reading)",
                result.pump_normalized_gain,
                result.pump_normalized_gain_sigma,
                result.pump_normalized_gain * mean(&result.pump_readings)
            );
            println!(
                "residual RMS {:.4} (noise units), {:.3e} relative, {} iterations",
                result.residual_rms, result.relative_rms, result.iterations
            );
            if let Some(s) = result.sensitivity {
                println!(
                    "sensitivity: (τ_p/α)∂α/∂τ_p = {:.4}, (A_s/α)∂α/∂A_s = {:.4}",
                    s.relative_pulse_duration, s.relative_source_area
                );
            }
            for (p, rms) in &transfers {
                println!(
                    "transfer {}: relative RMS {:.3e} ({:.2}× fit)",
                    p.display(),
                    rms,
                    rms / result.relative_rms
                );
            }
            println!("-> {}", dir.join(CALIBRATION_JSON).display());
        }
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

use std::path::Path;

use pdc_core::calib::{
    budget_efficiency, compare_reference, envelope, parse_budget, read_export, relative_response, LampReference,
    Propagation,
};
use pdc_core::constants::NM;
use pdc_core::dispersion::{degenerate_tilt, gain_dispersion_profile};
use pdc_core::interp::{nearest_index, uniform_grid};
use pdc_core::pdc_model::angular_spectral_map;
use pdc_core::synth::{read_table, to_nm};

use crate::calibrate::load_bundle;
use crate::config::Loaded;
use crate::error::{CliError, CliResult};
use crate::output::{flags, table, Staged};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum What {
    Dispersion,
    Map,
    Envelope,
    Budget,
    Compare,
}

impl What {
    fn name(self) -> &'static str {
        match self {
            What::Dispersion => "dispersion",
            What::Map => "map",
            What::Envelope => "envelope",
            What::Budget => "budget",
            What::Compare => "compare",
        }
    }
}

pub fn run(cfg: &Loaded, seed: u64, out: Option<&Path>, what: What) -> CliResult<()> {
    let mut staged = Staged::new();
    let summary = match what {
        What::Dispersion => dispersion(cfg, &mut staged)?,
        What::Map => map(cfg, &mut staged)?,
        What::Envelope => envelope_table(cfg, &mut staged)?,
        What::Budget => budget(cfg, &mut staged)?,
        What::Compare => compare(cfg, &mut staged)?,
    };
    let dir = cfg.out_dir(out, None);
    staged.commit(&dir, &format!("inspect --what {}", what.name()), &cfg.path, &cfg.sha256, seed)?;
    println!("{summary}");
    Ok(())
}

fn dispersion(cfg: &Loaded, staged: &mut Staged) -> CliResult<String> {
    let m = cfg.model()?;
    let ins = &cfg.config.inspect;
    if !(ins.dispersion_step_nm > 0.0 && ins.dispersion_half_width_nm > 0.0) {
        return Err(CliError::Config("inspect dispersion window must be positive".into()));
    }
    let lp = m.pump.wavelength;
    let n = (2.0 * ins.dispersion_half_width_nm / ins.dispersion_step_nm).round() as usize + 1;
    let grid = uniform_grid(2.0 * lp - ins.dispersion_half_width_nm * NM, ins.dispersion_step_nm * NM, n);
    let prof = gain_dispersion_profile(&grid, &m.crystal, lp)?;
    let col = |f: fn(&pdc_core::dispersion::GainFactors) -> f64| prof.iter().map(f).collect::<Vec<f64>>();
    let nm: Vec<f64> = grid.iter().map(|&l| to_nm(l)).collect();
    let total = col(|g| g.total());
    staged.add(
        "dispersion.csv",
        table(
            &["wavelength_nm", "tilt_deg", "index", "miller", "effective_length", "fresnel", "total"],
            &[
                &nm,
                &col(|g| g.tilt.to_degrees()),
                &col(|g| g.index),
                &col(|g| g.miller),
                &col(|g| g.effective_length),
                &col(|g| g.fresnel),
                &total,
            ],
        ),
    );
    let worst = total.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    Ok(format!(
        "gain dispersion over {:.1}–{:.1} nm: max |G²(λ)/G²(2λ_p) − 1| = {:.3}%",
        nm[0],
        nm[n - 1],
        worst * 100.0
    ))
}

fn map(cfg: &Loaded, staged: &mut Staged) -> CliResult<String> {
    let m = cfg.model()?;
    let ins = &cfg.config.inspect;
    if ins.map_angles < 2 || !(ins.map_stop_nm > ins.map_start_nm && ins.map_step_nm > 0.0) {
        return Err(CliError::Config("inspect map grid is empty".into()));
    }
    let tilt = match ins.map_tilt_deg {
        Some(t) => t.to_radians(),
        None => degenerate_tilt(&m.crystal, m.pump.wavelength)?,
    };
    let th = ins.map_max_angle_mrad * 1e-3;
    let angles: Vec<f64> = (0..ins.map_angles)
        .map(|i| th * (2 * i as i64 - (ins.map_angles as i64 - 1)) as f64 / (ins.map_angles - 1) as f64)
        .collect();
    let nwl = ((ins.map_stop_nm - ins.map_start_nm) / ins.map_step_nm).round() as usize + 1;
    let wl = uniform_grid(ins.map_start_nm * NM, ins.map_step_nm * NM, nwl);
    let map = angular_spectral_map(&wl, &angles, tilt, &m.crystal, &m.pump, &m.gain)?;
    staged.add("map.csv", map.to_csv());
    Ok(format!(
        "angular map {}×{} at tilt {:.4}°: ±θ asymmetry {:.2e}",
        angles.len(),
        wl.len(),
        tilt.to_degrees(),
        map.mirror_asymmetry()
    ))
}

fn envelope_table(cfg: &Loaded, staged: &mut Staged) -> CliResult<String> {
    let m = cfg.model()?;
    let bundle = cfg.path_of("bundle", &cfg.config.paths.bundle)?;
    let mut warnings = Vec::new();
    let (_, records) = load_bundle(&m, &bundle, &mut warnings)?;
    staged.input(&bundle);
    let opts = cfg.relative_options(&m)?;
    let curve = relative_response(&records, m.pump.wavelength, &opts)?;
    let counts: Vec<Vec<f64>> = records.iter().map(|r| r.counts.clone()).collect();
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].tilt.total_cmp(&records[b].tilt).then(a.cmp(&b)));
    let mut rank = vec![0; records.len()];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    let anchor = nearest_index(&m.grid, 2.0 * m.pump.wavelength);
    let env = envelope(&counts, &counts, &rank, anchor, &opts.support);
    let nm: Vec<f64> = m.grid.iter().map(|&l| to_nm(l)).collect();
    let ids: Vec<f64> = env.argmax.iter().map(|&j| records[j].spectrum_id as f64).collect();
    let tilt: Vec<f64> = env.argmax.iter().map(|&j| records[j].tilt.to_degrees()).collect();
    staged.add(
        "envelope.csv",
        table(
            &["wavelength_nm", "max_counts", "spectrum_id", "tilt_deg", "response", "support"],
            &[&nm, &env.values, &ids, &tilt, &curve.response, &flags(&curve.support_mask)],
        ),
    );
    let dips = curve.warnings.len() + warnings.len();
    for w in warnings.iter().chain(&curve.warnings) {
        eprintln!("warning: {w}");
    }
    let n = curve.support_mask.iter().filter(|&&s| s).count();
    Ok(format!("envelope of {} spectra: {n} supported pixels, {dips} warning(s)", records.len()))
}

fn budget(cfg: &Loaded, staged: &mut Staged) -> CliResult<String> {
    let path = cfg.path_of("budget", &cfg.config.paths.budget)?;
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let (components, prop) = parse_budget(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let b = budget_efficiency(&components, prop.unwrap_or(Propagation::Linear))?;
    staged.input(&path);
    let report = b.render();
    staged.add("budget.txt", report.clone());
    Ok(report.trim_end().to_string())
}

fn compare(cfg: &Loaded, staged: &mut Staged) -> CliResult<String> {
    let paths = &cfg.config.paths;
    let rp = cfg.path_of("response", &paths.response)?;
    let lp = cfg.path_of("lamp", &paths.lamp)?;
    let curve = read_export(&rp)?.response_curve();
    let mut cols = read_table(&lp, &["wavelength_nm", "response", "uncertainty"])?;
    let uncertainty = cols.pop().unwrap();
    let response = cols.pop().unwrap();
    let lamp = LampReference {
        wavelengths: cols.pop().unwrap().into_iter().map(|x| x * NM).collect(),
        response,
        uncertainty,
    };
    let rep = compare_reference(&curve, &lamp)?;
    staged.input(&rp);
    staged.input(&lp);
    let nm: Vec<f64> = rep.wavelengths.iter().map(|&l| to_nm(l)).collect();
    staged.add(
        "compare.csv",
        table(
            &["wavelength_nm", "pdc", "lamp_scaled", "lamp_uncertainty", "ratio"],
            &[&nm, &rep.pdc, &rep.scaled_lamp, &rep.scaled_uncertainty, &rep.ratio],
        ),
    );
    Ok(format!(
        "lamp/PDC scale {:.6e}; RMS deviation {:.3}%; {:.1}% of {} points inside the lamp band",
        rep.scale,
        rep.rms_deviation * 100.0,
        rep.in_band_fraction * 100.0,
        nm.len()
    ))
}

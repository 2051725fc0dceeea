mod common;

use common::{high_gain, low_gain, pdcal, read_csv, snapshot, write};
use pdc_core::calib::read_export;
use pdc_core::constants::NM;
use pdc_core::synth::{read_truth, METADATA_FILE};

fn cfg_arg(p: &std::path::Path) -> String {
    p.display().to_string()
}

#[test]
fn budget_prints_the_product() {
    let d = tempfile::tempdir().unwrap();
    let comps = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/optical_components.toml")).unwrap();
    write(d.path(), "components.toml", &comps);
    let c = write(d.path(), "run.toml", "[paths]\nbudget = \"components.toml\"\nout = \"b\"\n");
    let r = pdcal(&["inspect", "--what", "budget", "--config", &cfg_arg(&c)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.lines().last().unwrap().contains("0.38 ± 0.07"), "{}", r.stdout);
    assert!(d.path().join("b/budget.txt").is_file());
    assert!(d.path().join("b/provenance.json").is_file());
}

#[test]
fn config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let unknown = write(d.path(), "a.toml", "[pump]\nwavelenght_nm = 355.0\n");
    assert_eq!(pdcal(&["simulate", "--config", &cfg_arg(&unknown)]).code, 2);
    let missing = write(d.path(), "b.toml", "[paths]\nbudget = \"nope.toml\"\n");
    let r = pdcal(&["inspect", "--what", "budget", "--config", &cfg_arg(&missing)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("does not exist"), "{}", r.stderr);
    assert_eq!(pdcal(&["simulate", "--config", "/nonexistent/run.toml"]).code, 2);
    assert_eq!(pdcal(&["simulate"]).code, 2);
    assert_eq!(pdcal(&["calibrate", "--mode", "sideways"]).code, 2);
    let bad = write(d.path(), "c.toml", "[grid]\nstart_nm = 300.0\nstop_nm = 900.0\n");
    assert_eq!(pdcal(&["simulate", "--config", &cfg_arg(&bad)]).code, 2);
}

#[test]
fn simulate_writes_one_file_per_tilt() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "run.toml", &low_gain(""));
    let r = pdcal(&["simulate", "--config", &cfg_arg(&c)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("411 spectra"), "{}", r.stdout);
    let files = snapshot(&d.path().join("low"));
    let spectra = files.keys().filter(|p| p.to_string_lossy().starts_with("spectrum_")).count();
    assert_eq!(spectra, 411);
    assert!(files.contains_key(std::path::Path::new(METADATA_FILE)));
    assert!(files.contains_key(std::path::Path::new("truth.csv")));
    assert_eq!(files.len(), 411 + 3);
}

#[test]
fn power_scan_is_a_single_table() {
    let d = tempfile::tempdir().unwrap();
    let c = write(
        d.path(),
        "run.toml",
        "[gain]\ngain_reference = 0.5\n[power_scan]\nprobe_nm = 690.0\nstart_uj = 10.0\nstop_uj = 100.0\nstep_uj = 10.0\n",
    );
    let out = d.path().join("p");
    let r = pdcal(&["simulate", "--power-scan", "--config", &cfg_arg(&c), "--out", &cfg_arg(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let files = snapshot(&out);
    assert_eq!(files.len(), 2);
    let (h, rows) = read_csv(&out.join("power_scan.csv"));
    assert_eq!(h, ["pulse_energy_uj", "counts"]);
    assert_eq!(rows.len(), 10);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
}

#[test]
fn same_seed_gives_identical_bundles() {
    let d = tempfile::tempdir().unwrap();
    let noisy = low_gain("[noise]\nshot_noise = true\nreadout_sigma = 10.0\n[scan]\nstart_deg = 0.0\nstep_deg = -0.05\nsteps = 40\n");
    let c = write(d.path(), "run.toml", &noisy);
    let (a, b, e) = (d.path().join("a"), d.path().join("b"), d.path().join("c"));
    for o in [&a, &b] {
        assert_eq!(pdcal(&["simulate", "--config", &cfg_arg(&c), "--out", &cfg_arg(o)]).code, 0);
    }
    assert_eq!(snapshot(&a), snapshot(&b));
    assert_eq!(pdcal(&["simulate", "--config", &cfg_arg(&c), "--out", &cfg_arg(&e), "--seed", "8"]).code, 0);
    let (sa, se) = (snapshot(&a), snapshot(&e));
    let name = sa.keys().find(|k| k.to_string_lossy().starts_with("spectrum_0000")).unwrap();
    assert_ne!(sa[name], se[name]);
}

#[test]
fn relative_matches_truth_and_absolute_recovers_alpha() {
    let d = tempfile::tempdir().unwrap();
    let lc = write(d.path(), "low.toml", &low_gain(""));
    assert_eq!(pdcal(&["simulate", "--config", &cfg_arg(&lc)]).code, 0);
    let r = pdcal(&["calibrate", "--mode", "relative", "--config", &cfg_arg(&lc)]);
    assert_eq!(r.code, 0, "{}", r.stderr);

    let export = read_export(&d.path().join("relative/response.json")).unwrap();
    assert_eq!(export.mode, "relative");
    assert_eq!(export.provenance.filter_cutoff, None);
    let curve = export.response_curve();
    let truth = read_truth(&d.path().join("low/truth.csv"), 0.42, 355e-9).unwrap();
    let t710 = pdc_core::interp::linear(&truth.pixel_grid, &truth.response_shape, 710.0 * NM).unwrap();
    let (mut s, mut n) = (0.0, 0);
    for i in 0..curve.response.len() {
        if curve.support_mask[i] {
            let t = truth.response_shape[i] / t710;
            s += (curve.response[i] / t - 1.0).powi(2);
            n += 1;
        }
    }
    assert!(n > 5000);
    assert!((s / n as f64).sqrt() < 0.005, "{}", (s / n as f64).sqrt());
    let (h, rows) = read_csv(&d.path().join("relative/response.csv"));
    assert_eq!(h, ["wavelength_nm", "response", "support"]);
    assert_eq!(rows.len(), curve.response.len());

    let hc = write(d.path(), "high.toml", &high_gain("high", "response = \"relative/response.json\"\n"));
    assert_eq!(pdcal(&["simulate", "--config", &cfg_arg(&hc)]).code, 0);
    let r = pdcal(&["calibrate", "--mode", "absolute", "--config", &cfg_arg(&hc)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("alpha = "), "{}", r.stdout);
    let e = read_export(&d.path().join("absolute/calibration.json")).unwrap();
    let a = e.alpha.unwrap().value;
    assert!((a / 0.42 - 1.0).abs() < 0.02, "{a}");
    assert_eq!(e.provenance.inputs.len(), 2);
    let (h, rows) = read_csv(&d.path().join("absolute/efficiency.csv"));
    assert_eq!(h, ["wavelength_nm", "efficiency", "sigma", "support"]);
    for (row, r) in rows.iter().zip(&curve.response) {
        assert!((row[1] - a * r).abs() <= 1e-12 * row[1].abs());
    }

    // Joint mode: the response is derived from the low-gain bundle directly.
    let jc = write(d.path(), "joint.toml", &high_gain("high", "low_gain_bundle = \"low\"\n"));
    let out = d.path().join("joint");
    let r = pdcal(&["calibrate", "--mode", "absolute", "--config", &cfg_arg(&jc), "--out", &cfg_arg(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = read_export(&out.join("calibration.json")).unwrap();
    assert_eq!(j.alpha.unwrap().value, a);

    let lamp_rows: String = truth
        .pixel_grid
        .iter()
        .zip(&truth.response_shape)
        .step_by(20)
        .map(|(l, r)| format!("{},{},{}\n", l / NM, 3.0 * r, 0.03 * r))
        .collect();
    write(d.path(), "lamp.csv", &format!("wavelength_nm,response,uncertainty\n{lamp_rows}"));
    let cc = write(
        d.path(),
        "cmp.toml",
        "[paths]\nresponse = \"relative/response.json\"\nlamp = \"lamp.csv\"\nout = \"cmp\"\n",
    );
    let r = pdcal(&["inspect", "--what", "compare", "--config", &cfg_arg(&cc)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&d.path().join("cmp/compare.csv"));
    assert_eq!(h[0], "wavelength_nm");
    let inside = rows.iter().filter(|r| (r[1] - r[2]).abs() <= r[3]).count();
    assert!(inside as f64 >= 0.95 * rows.len() as f64);

    let ec = write(d.path(), "env.toml", &low_gain("").replace("out = \"relative\"", "out = \"env\""));
    let r = pdcal(&["inspect", "--what", "envelope", "--config", &cfg_arg(&ec)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&d.path().join("env/envelope.csv"));
    assert_eq!(h[1], "max_counts");
    assert_eq!(rows.len(), curve.response.len());
}

#[test]
fn low_gain_data_is_degenerate_and_strict_refuses() {
    let d = tempfile::tempdir().unwrap();
    let scan = "[scan]\nstart_deg = 0.0\nstep_deg = -0.01\nsteps = 120\n";
    let lc = write(d.path(), "low.toml", &low_gain(scan));
    assert_eq!(pdcal(&["simulate", "--config", &cfg_arg(&lc)]).code, 0);
    let hc = write(
        d.path(),
        "abs.toml",
        &format!(
            "{}{scan}",
            high_gain("low", "low_gain_bundle = \"low\"\n").replace("\"high-gain\"", "\"spontaneous\"")
        ),
    );
    let r = pdcal(&["calibrate", "--mode", "absolute", "--config", &cfg_arg(&hc)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("gain unresolved"), "{}", r.stderr);
    let strict = d.path().join("strict");
    let r = pdcal(&["calibrate", "--mode", "absolute", "--strict", "--config", &cfg_arg(&hc), "--out", &cfg_arg(&strict)]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(!strict.exists());
}

#[test]
fn failures_leave_no_partial_output() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "run.toml", &low_gain(""));
    let out = d.path().join("never");
    let r = pdcal(&["calibrate", "--mode", "relative", "--config", &cfg_arg(&c), "--out", &cfg_arg(&out)]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    assert!(!out.exists());

    // The scan never reaches 710 nm, so normalization fails.
    let far = low_gain("[scan]\nstart_deg = -3.0\nstep_deg = -0.01\nsteps = 30\n");
    let c = write(d.path(), "far.toml", &far);
    assert_eq!(pdcal(&["simulate", "--config", &cfg_arg(&c)]).code, 0);
    let r = pdcal(&["calibrate", "--mode", "relative", "--config", &cfg_arg(&c), "--out", &cfg_arg(&out)]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("710"), "{}", r.stderr);
    assert!(!out.exists());
}

#[test]
fn dispersion_and_map_tables() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "run.toml", "[gain]\ngain_reference = 1.0\n[inspect]\nmap_angles = 21\nmap_step_nm = 5.0\n");
    let out = d.path().join("i");
    let r = pdcal(&["inspect", "--what", "dispersion", "--config", &cfg_arg(&c), "--out", &cfg_arg(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&out.join("dispersion.csv"));
    assert_eq!(h.last().unwrap(), "total");
    assert_eq!(rows.len(), 301);
    assert!((rows[0][0] - 560.0).abs() < 1e-9 && (rows[300][0] - 860.0).abs() < 1e-9);
    assert!(rows.iter().all(|r| (r[6] - 1.0).abs() <= 0.01));

    let r = pdcal(&["inspect", "--what", "map", "--config", &cfg_arg(&c), "--out", &cfg_arg(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(out.join("map.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 21);
    for i in 0..21 {
        assert_eq!(rows[i][0], -rows[20 - i][0]);
        for k in 1..rows[i].len() {
            let (a, b) = (rows[i][k], rows[20 - i][k]);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()), "{a} {b}");
        }
    }
}

#[test]
fn shipped_configs_load() {
    let dir = std::path::Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"));
    for name in ["low_gain", "high_gain", "high_gain_60uj", "high_gain_150uj", "power_scan", "inspect", "budget"] {
        let cfg = pdc_cli::config::load(&dir.join(format!("{name}.toml"))).unwrap_or_else(|e| panic!("{name}: {e}"));
        let m = cfg.model().unwrap();
        assert_eq!(m.grid.len(), 6667, "{name}");
    }
    let hg = pdc_cli::config::load(&dir.join("high_gain.toml")).unwrap();
    let lo = pdc_cli::config::load(&dir.join("high_gain_60uj.toml")).unwrap();
    let (a, b) = (hg.model().unwrap().gain, lo.model().unwrap().gain);
    assert!((a.pump_normalized_gain / b.pump_normalized_gain - 1.0).abs() < 1e-12);
    assert!((b.gain_reference / a.gain_reference - 0.6f64.sqrt()).abs() < 1e-12);
}

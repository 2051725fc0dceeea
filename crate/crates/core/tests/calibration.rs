mod common;

use std::sync::OnceLock;

use common::*;
use pdc_core::calib::*;
use pdc_core::constants::NM;
use pdc_core::pdc_model::{mode_density, q_squared, DetectionGeometry, PdcRegime};
use pdc_core::synth::*;
use pdc_core::Error;

const EDGE: f64 = 740.0 * NM;
const ALPHA: f64 = 0.42;

struct Fixture {
    s: Setup,
    truth: DetectorTruth,
    low: Vec<SpectrumRecord>,
    response: ResponseCurve,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let s = setup();
        let truth = DetectorTruth::from_fn(s.grid.clone(), ALPHA, LP, |l| structured_response(l, EDGE)).unwrap();
        let low = s.scan(&truth, &s.gain(1e-3, PdcRegime::Spontaneous), &tilts(411), &NoiseModel::none());
        let response = relative_response(&low, LP, &unfiltered(&s)).unwrap();
        Fixture { s, truth, low, response }
    })
}

fn relative_options(s: &Setup) -> RelativeOptions {
    RelativeOptions {
        gain_shape: Some(s.shape()),
        ..Default::default()
    }
}

/// Noiseless scans carry nothing to filter; the hard cutoff would only add
/// ringing at the dichroic edge.
fn unfiltered(s: &Setup) -> RelativeOptions {
    RelativeOptions {
        cutoff: None,
        ..relative_options(s)
    }
}

fn absolute_options(s: &Setup) -> AbsoluteOptions {
    AbsoluteOptions {
        gain_shape: Some(s.shape()),
        ..Default::default()
    }
}

#[test]
fn flat_truth_round_trip() {
    let s = setup();
    let truth = DetectorTruth::flat(s.grid.clone(), 1.0, LP).unwrap();
    let recs = s.scan(&truth, &s.gain(1e-3, PdcRegime::Spontaneous), &tilts(411), &NoiseModel::none());
    let r = relative_response(&recs, LP, &relative_options(&s)).unwrap();
    let rms = rms_on(&r.response, &truth.response_shape, &r.support_mask);
    assert!(rms < 0.005, "{rms}");
    let (lo, hi) = r.support_range().unwrap();
    assert!(lo < 520.0 * NM && hi > 900.0 * NM);
}

#[test]
fn structured_truth_round_trip() {
    let f = fixture();
    let r = &f.response;
    assert!((r.at(2.0 * LP).unwrap() - 1.0).abs() < 1e-9);
    let rms = rms_on(&r.response, &f.truth.response_shape, &r.support_mask);
    assert!(rms < 0.005, "{rms}");

    // with the default filter the error is Gibbs ringing confined to the edge
    let filtered = relative_response(&f.low, LP, &relative_options(&f.s)).unwrap();
    let away: Vec<bool> = (0..filtered.response.len())
        .map(|i| filtered.support_mask[i] && (filtered.wavelength_grid[i] - EDGE).abs() > 1.0 * NM)
        .collect();
    assert!(rms_on(&filtered.response, &f.truth.response_shape, &away) < 0.005);
}

#[test]
fn step_edge_and_plateaus_recovered() {
    let f = fixture();
    let r = &f.response;
    let grid = &r.wavelength_grid;
    let smooth: Vec<f64> = grid.iter().map(|&l| smooth_response(l)).collect();
    let flat: Vec<f64> = r.response.iter().zip(&smooth).map(|(a, b)| a / b).collect();
    let near = |a: f64, b: f64| {
        let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] >= a && grid[i] <= b && r.support_mask[i]).collect();
        idx.iter().map(|&i| flat[i]).sum::<f64>() / idx.len() as f64
    };
    let high = near(EDGE - 15.0 * NM, EDGE - 2.0 * NM);
    let low = near(EDGE + 2.0 * NM, EDGE + 15.0 * NM);
    let truth_ratio = 0.7;
    assert!((low / high / truth_ratio - 1.0).abs() < 0.01, "{high} {low}");
    let mid = 0.5 * (high + low);
    let crossing = (1..grid.len())
        .find(|&i| grid[i] > EDGE - 10.0 * NM && flat[i - 1] > mid && flat[i] <= mid)
        .unwrap();
    let edge_px = grid.partition_point(|&l| l < EDGE);
    assert!(crossing.abs_diff(edge_px) <= 2, "{crossing} {edge_px}");
}

#[test]
fn noisy_round_trip() {
    let f = fixture();
    let recs = f.s.scan(&f.truth, &f.s.gain(23.7, PdcRegime::Spontaneous), &tilts(411), &NoiseModel::nominal_scale());
    let peak = recs.iter().flat_map(|r| r.counts.iter()).fold(0.0f64, |m, &c| m.max(c));
    assert!(peak > 1e4 && peak < 1e5);
    let r = relative_response(&recs, LP, &relative_options(&f.s)).unwrap();
    let rms = rms_on(&r.response, &f.truth.response_shape, &r.support_mask);
    assert!(rms < 0.02, "{rms}");
}

#[test]
fn envelope_dominates_every_spectrum() {
    let f = fixture();
    let r = &f.response;
    let shape = f.s.shape();
    let ratio = |rec: &SpectrumRecord, i: usize| {
        let l = rec.pixel_grid[i];
        rec.counts[i] / (mode_density(l) * q_squared(l, LP) * shape[i] * shape[i])
    };
    let i0 = r.support_mask.iter().position(|&b| b).unwrap();
    let scale = f.low.iter().map(|rec| ratio(rec, i0)).fold(0.0, f64::max) / r.response[i0];
    for rec in &f.low {
        for i in 0..r.response.len() {
            if r.support_mask[i] {
                assert!(ratio(rec, i) / scale <= r.response[i] * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn single_spectrum_is_its_own_response() {
    let f = fixture();
    let j = f
        .low
        .iter()
        .position(|r| {
            let i = r.pixel_grid.partition_point(|&l| l < 2.0 * LP);
            r.counts[i] == f.low.iter().map(|x| x.counts[i]).fold(0.0, f64::max)
        })
        .unwrap();
    let one = vec![f.low[j].clone()];
    let r = relative_response(&one, LP, &unfiltered(&f.s)).unwrap();
    let on = r.support_mask.iter().filter(|&&b| b).count();
    let full = f.response.support_mask.iter().filter(|&&b| b).count();
    assert!(on > 0 && on < full / 4, "{on} of {full}");
    let shape = f.s.shape();
    let raw: Vec<f64> = (0..shape.len())
        .map(|i| {
            let l = r.wavelength_grid[i];
            one[0].counts[i] / (mode_density(l) * q_squared(l, LP) * shape[i] * shape[i])
        })
        .collect();
    let k = raw[r.support_mask.iter().position(|&b| b).unwrap()] / r.response[r.support_mask.iter().position(|&b| b).unwrap()];
    for i in 0..raw.len() {
        assert!((raw[i] / k - r.response[i]).abs() <= 1e-12 * r.response[i].abs().max(1e-300));
    }
}

#[test]
fn missing_normalization_coverage_is_an_error() {
    let f = fixture();
    // spectra far from degeneracy never reach 2λ_p with usable signal
    let tail: Vec<SpectrumRecord> = f.low[300..].to_vec();
    let err = relative_response(&tail, LP, &relative_options(&f.s)).unwrap_err();
    assert!(matches!(err, Error::Coverage(_)), "{err}");
    let short: Vec<SpectrumRecord> = f.low[..5]
        .iter()
        .map(|r| SpectrumRecord {
            pixel_grid: r.pixel_grid[..1000].to_vec(),
            counts: r.counts[..1000].to_vec(),
            ..r.clone()
        })
        .collect();
    assert!(matches!(relative_response(&short, LP, &RelativeOptions::default()), Err(Error::Coverage(_))));
}

#[test]
fn sparse_scan_is_flagged() {
    let f = fixture();
    let sparse: Vec<SpectrumRecord> = f.low.iter().step_by(8).cloned().collect();
    let r = relative_response(&sparse, LP, &unfiltered(&f.s)).unwrap();
    assert!(r.warnings.iter().any(|w| w.starts_with("sparse scan")), "{:?}", r.warnings);
    assert!(f.response.warnings.is_empty(), "{:?}", f.response.warnings);
}

#[test]
fn high_gain_round_trip() {
    let f = fixture();
    let gain = f.s.gain(5.0, PdcRegime::HighGain);
    let high = f.s.scan(&f.truth, &gain, &tilts(411), &NoiseModel::none());
    let res = absolute_fit(&high, &f.response, &f.s.geometry, LP, &absolute_options(&f.s)).unwrap();
    assert!((res.alpha / ALPHA - 1.0).abs() < 0.01, "{}", res.alpha);
    assert!((res.pump_normalized_gain / gain.pump_normalized_gain - 1.0).abs() < 0.01);
    assert!(res.warnings.is_empty(), "{:?}", res.warnings);
    assert!(res.cost_trace.windows(2).all(|w| w[1] < w[0]));
    assert!(res.gradient_norm < 1e-6, "{}", res.gradient_norm);
    assert!(res.alpha_sigma > 0.0 && res.pump_normalized_gain_sigma > 0.0);
    for (e, r) in res.efficiency.iter().zip(&res.response.response) {
        assert_eq!(*e, res.alpha * r);
    }
    let eta = quantum_efficiency(&res);
    let i = eta.wavelengths.partition_point(|&l| l < 2.0 * LP);
    let at = |v: &[f64]| v[i - 1] + (v[i] - v[i - 1]) * (2.0 * LP - eta.wavelengths[i - 1]) / (eta.wavelengths[i] - eta.wavelengths[i - 1]);
    assert!((at(&eta.efficiency) - res.alpha).abs() < 1e-9 * res.alpha);
    assert!(rms_on(&eta.efficiency, &f.truth.efficiency(), &eta.support) < 0.02);
    // Γ ∝ τ_p A_s, so α ∝ 1/(τ_p A_s)
    let sens = res.sensitivity.unwrap();
    assert!((sens.relative_pulse_duration + 1.0).abs() < 0.01);
    assert!((sens.relative_source_area + 1.0).abs() < 0.01);

    // the same parameters predict other pump energies
    for e in [60e-6, 150e-6] {
        let pump = f.s.pump.with_energy(e).unwrap();
        let other = f.s.scan_at(&pump, &f.truth, &gain, &tilts(411));
        let tr = predict_envelope(&res, &other, &DetectionGeometry::nominal(&pump), LP, &absolute_options(&f.s)).unwrap();
        assert!(tr.relative_rms <= 2.0 * res.relative_rms, "{} vs {}", tr.relative_rms, res.relative_rms);
    }
}

#[test]
fn noisy_drifting_high_gain_round_trip() {
    let f = fixture();
    let gain = f.s.gain(5.0, PdcRegime::HighGain);
    let noise = NoiseModel::nominal_scale().with_drift(PumpDrift::RandomWalk { step: 0.01, bound: 0.03 });
    let high = f.s.scan(&f.truth, &gain, &tilts(411), &noise);
    assert!(high.iter().any(|r| (r.pump_energy_reading / f.s.pump.field_amplitude - 1.0).abs() > 0.01));
    let opts = AbsoluteOptions {
        sensitivity_step: None,
        ..absolute_options(&f.s)
    };
    let res = absolute_fit(&high, &f.response, &f.s.geometry, LP, &opts).unwrap();
    assert!((res.alpha / ALPHA - 1.0).abs() < 0.05, "{}", res.alpha);
    assert!((res.pump_normalized_gain / gain.pump_normalized_gain - 1.0).abs() < 0.05);
}

#[test]
fn vanishing_gain_is_degenerate() {
    let f = fixture();
    let low = f.s.scan(&f.truth, &f.s.gain(1e-3, PdcRegime::HighGain), &tilts(411), &NoiseModel::none());
    let res = absolute_fit(&low, &f.response, &f.s.geometry, LP, &absolute_options(&f.s)).unwrap();
    assert!(res.warnings.iter().any(|w| w.starts_with("gain unresolved; α degenerate with G²")));
}

#[test]
fn fit_scales_with_counts() {
    let f = fixture();
    let gain = f.s.gain(3.0, PdcRegime::HighGain);
    let high = f.s.scan(&f.truth, &gain, &tilts(411), &NoiseModel::none());
    let k = 7.5;
    let scaled: Vec<SpectrumRecord> = high
        .iter()
        .map(|r| SpectrumRecord {
            counts: r.counts.iter().map(|c| c * k).collect(),
            ..r.clone()
        })
        .collect();
    let opts = AbsoluteOptions {
        sensitivity_step: None,
        ..absolute_options(&f.s)
    };
    let a = absolute_fit(&high, &f.response, &f.s.geometry, LP, &opts).unwrap();
    let b = absolute_fit(&scaled, &f.response, &f.s.geometry, LP, &opts).unwrap();
    assert!((b.alpha / (k * a.alpha) - 1.0).abs() < 1e-6);
    assert!((b.pump_normalized_gain / a.pump_normalized_gain - 1.0).abs() < 1e-6);
    let low: Vec<SpectrumRecord> = f.low.iter().map(|r| SpectrumRecord { counts: r.counts.iter().map(|c| c * k).collect(), ..r.clone() }).collect();
    let r = relative_response(&low, LP, &unfiltered(&f.s)).unwrap();
    for (x, y) in r.response.iter().zip(&f.response.response) {
        assert!((x - y).abs() <= 1e-6 * y.abs().max(1e-12));
    }
}

#[test]
fn lamp_comparison_against_truth() {
    let f = fixture();
    let t = &f.truth;
    let lamp = LampReference {
        wavelengths: t.pixel_grid.clone(),
        response: t.response_shape.iter().map(|r| 3.0 * r).collect(),
        uncertainty: t.response_shape.iter().map(|r| 0.05 * 3.0 * r).collect(),
    };
    let c = compare_reference(&f.response, &lamp).unwrap();
    assert!((c.scale / 3.0 - 1.0).abs() < 0.01);
    assert!(c.in_band_fraction >= 0.95, "{}", c.in_band_fraction);
}

#[test]
fn export_round_trips_the_response() {
    let f = fixture();
    let e = CalibrationExport::relative(&f.response, Provenance::new(vec!["bundle".into()], "ab".into(), Some(DEFAULT_CUTOFF)));
    let back = CalibrationExport::from_json(&e.to_json()).unwrap().response_curve();
    assert_eq!(back.response, f.response.response);
    assert_eq!(back.support_mask, f.response.support_mask);
    for (a, b) in back.wavelength_grid.iter().zip(&f.response.wavelength_grid) {
        assert!((a - b).abs() < 1e-9 * NM);
    }
}

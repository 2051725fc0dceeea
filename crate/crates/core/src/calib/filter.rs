use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::synth::SpectrumRecord;
use crate::{Error, Result};

pub const MIN_FILTER_LENGTH: usize = 8;

/// Hard low-pass of a sampled signal.
///
/// The signal is mirrored to length 2N before the transform so that the
/// implied periodic extension has no jump at the ends. Components above
/// `cutoff_fraction` of the Nyquist frequency are zeroed; the DC bin is
/// untouched, so the sum is preserved. Output values are not clamped and may
/// dip slightly below zero in dark regions.
pub fn lowpass(signal: &[f64], cutoff_fraction: f64) -> Result<Vec<f64>> {
    let n = signal.len();
    if n < MIN_FILTER_LENGTH {
        return Err(Error::Size {
            needed: MIN_FILTER_LENGTH,
            got: n,
        });
    }
    if !(cutoff_fraction > 0.0 && cutoff_fraction <= 1.0) {
        return Err(Error::Invalid(format!(
            "cutoff fraction must lie in (0, 1], got {cutoff_fraction}"
        )));
    }
    let m = 2 * n;
    let mut buf: Vec<Complex<f64>> = signal
        .iter()
        .chain(signal.iter().rev())
        .map(|&x| Complex::new(x, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let keep = cutoff_fraction * n as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = k.min(m - k) as f64;
        if freq > keep {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    Ok(buf[..n].iter().map(|c| c.re / m as f64).collect())
}

pub fn fourier_lowpass(record: &SpectrumRecord, cutoff_fraction: f64) -> Result<SpectrumRecord> {
    Ok(SpectrumRecord {
        counts: lowpass(&record.counts, cutoff_fraction)?,
        ..record.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::spectrum_rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn identity_at_full_band() {
        let x: Vec<f64> = (0..101).map(|i| ((i * 37) % 11) as f64 - 3.0).collect();
        let y = lowpass(&x, 1.0).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_and_sum_preserved() {
        let x = vec![4.25; 64];
        for c in [0.01, 0.2, 0.7] {
            for v in lowpass(&x, c).unwrap() {
                assert!((v - 4.25).abs() < 1e-12);
            }
        }
        let x: Vec<f64> = (0..300).map(|i| (i as f64 * 0.3).sin().abs() * 100.0).collect();
        let y = lowpass(&x, 0.05).unwrap();
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        assert!((sx - sy).abs() < 1e-6 * sx);
    }

    #[test]
    fn too_short() {
        assert!(matches!(lowpass(&[1.0; 7], 0.5), Err(Error::Size { needed: 8, got: 7 })));
        assert!(lowpass(&[1.0; 10], 0.0).is_err());
    }

    #[test]
    fn removes_white_noise() {
        let n = 4096;
        let sigma = 5.0;
        let envelope: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 - 2000.0) / 400.0;
                1000.0 * (-x * x).exp()
            })
            .collect();
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = spectrum_rng(11, 0);
        let noisy: Vec<f64> = envelope.iter().map(|e| e + normal.sample(&mut rng)).collect();
        let cutoff = 0.05;
        let y = lowpass(&noisy, cutoff).unwrap();
        let resid: Vec<f64> = y.iter().zip(&envelope).map(|(a, b)| a - b).collect();
        let var = resid.iter().map(|r| r * r).sum::<f64>() / n as f64;
        // white noise keeps roughly the retained fraction of its variance
        assert!(var <= sigma * sigma * (cutoff * 1.5), "{var}");
        // smoothing window of about 1/cutoff samples
        let bound = 3.0 * sigma / (1.0 / cutoff).sqrt();
        let inside = resid.iter().filter(|r| r.abs() <= bound).count();
        assert!(inside as f64 >= 0.99 * n as f64, "{inside} of {n} within {bound}");
    }
}

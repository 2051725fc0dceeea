use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const DRIFT_STREAM: u64 = u64::MAX;

/// Multiplicative per-spectrum drift of the pump field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PumpDrift {
    #[default]
    None,
    /// Gaussian steps of `step`, reflected to stay within 1 ± `bound`.
    RandomWalk { step: f64, bound: f64 },
    Explicit { factors: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NoiseModel {
    pub shot_noise: bool,
    /// Gaussian readout noise per pixel [counts].
    pub readout_sigma: f64,
    pub pump_drift: PumpDrift,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self::default()
    }

    /// Poisson shot noise plus 10 counts of readout noise.
    pub fn nominal_scale() -> Self {
        NoiseModel {
            shot_noise: true,
            readout_sigma: 10.0,
            pump_drift: PumpDrift::None,
        }
    }

    pub fn with_drift(mut self, drift: PumpDrift) -> Self {
        self.pump_drift = drift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.readout_sigma >= 0.0 && self.readout_sigma.is_finite()) {
            return Err(Error::Invalid(format!(
                "readout_sigma must be ≥ 0, got {}",
                self.readout_sigma
            )));
        }
        match &self.pump_drift {
            PumpDrift::RandomWalk { step, bound } => {
                if !(*step >= 0.0 && *bound >= 0.0 && *bound < 0.5) {
                    return Err(Error::Invalid("drift needs step ≥ 0 and 0 ≤ bound < 0.5".into()));
                }
            }
            PumpDrift::Explicit { factors } => {
                if let Some(f) = factors.iter().find(|f| !(**f > 0.5 && **f < 1.5)) {
                    return Err(Error::Invalid(format!("drift factor {f} outside (0.5, 1.5)")));
                }
            }
            PumpDrift::None => {}
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        !self.shot_noise && self.readout_sigma == 0.0
    }

    /// Drift factor for each of `n` spectra.
    pub fn drift_factors(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match &self.pump_drift {
            PumpDrift::None => vec![1.0; n],
            PumpDrift::Explicit { factors } => {
                if factors.len() != n {
                    return Err(Error::Invalid(format!(
                        "{} explicit drift factors for {n} spectra",
                        factors.len()
                    )));
                }
                factors.clone()
            }
            PumpDrift::RandomWalk { step, bound } => {
                let mut rng = spectrum_rng(seed, DRIFT_STREAM);
                let normal = Normal::new(0.0, *step).map_err(|e| Error::Invalid(e.to_string()))?;
                let (lo, hi) = (1.0 - bound, 1.0 + bound);
                let mut d = 1.0;
                (0..n)
                    .map(|_| {
                        let out = d;
                        d += normal.sample(&mut rng);
                        if *bound > 0.0 {
                            while d < lo || d > hi {
                                d = if d > hi { 2.0 * hi - d } else { 2.0 * lo - d };
                            }
                        } else {
                            d = 1.0;
                        }
                        out
                    })
                    .collect()
            }
        })
    }

    /// Draws a noisy realization of `expected` in place.
    pub fn apply(&self, expected: &mut [f64], rng: &mut impl Rng) {
        let readout = (self.readout_sigma > 0.0).then(|| Normal::new(0.0, self.readout_sigma).unwrap());
        for v in expected.iter_mut() {
            let mut c = *v;
            if self.shot_noise && c > 0.0 {
                c = Poisson::new(c).map(|p| p.sample(rng)).unwrap_or(c);
            }
            if let Some(n) = &readout {
                c += n.sample(rng);
            }
            *v = c.max(0.0);
        }
    }
}

/// Independent random stream for one spectrum. Streams are keyed by id so
/// the output does not depend on generation order.
pub fn spectrum_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_is_bounded_and_seeded() {
        let m = NoiseModel::none().with_drift(PumpDrift::RandomWalk { step: 0.01, bound: 0.03 });
        let a = m.drift_factors(500, 3).unwrap();
        assert_eq!(a, m.drift_factors(500, 3).unwrap());
        assert_ne!(a, m.drift_factors(500, 4).unwrap());
        assert!(a.iter().all(|d| (0.97..=1.03).contains(d)));
        assert!(a.iter().any(|d| (d - 1.0).abs() > 0.01));
    }

    #[test]
    fn noise_statistics() {
        let m = NoiseModel::nominal_scale();
        let mut v = vec![1.0e4; 20000];
        m.apply(&mut v, &mut spectrum_rng(1, 1));
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!((mean - 1e4).abs() < 5.0);
        assert!((var / (1e4 + 100.0) - 1.0).abs() < 0.05);
        let mut z = vec![0.0; 100];
        m.apply(&mut z, &mut spectrum_rng(1, 2));
        assert!(z.iter().all(|x| *x >= 0.0));
    }
}

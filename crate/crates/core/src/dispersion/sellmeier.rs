//! Sellmeier dispersion of the two principal indices of a uniaxial crystal.
//!
//! Two rational forms are supported, both with λ in micrometres:
//!
//! * `pole-polynomial`: `n² = A + B/(λ² − C) + Σₖ Dₖ λ^{2k}`, coefficients
//!   `[A, B, C, D₁, D₂, ...]`.
//! * `standard`: `n² = A + Σᵢ Bᵢ λ²/(λ² − Cᵢ)`, coefficients
//!   `[A, B₁, C₁, B₂, C₂, ...]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::NM;
use crate::{Error, Result};

const BUNDLED_BBO_ZHANG: &str = include_str!("../../data/bbo_zhang2000.toml");
const BUNDLED_BBO_EIMERL: &str = include_str!("../../data/bbo_eimerl1987.toml");

/// Names accepted by [`SellmeierSet::bundled`].
pub const BUNDLED_SETS: [&str; 2] = ["bbo-zhang2000", "bbo-eimerl1987"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SellmeierForm {
    PolePolynomial,
    Standard,
}

/// On-disk representation of a coefficient set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierFile {
    pub source: String,
    pub form: SellmeierForm,
    pub valid_range_nm: [f64; 2],
    pub ordinary: Vec<f64>,
    pub extraordinary: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SellmeierSet {
    pub form: SellmeierForm,
    pub ordinary: Vec<f64>,
    pub extraordinary: Vec<f64>,
    /// Validity interval in metres.
    pub valid_range: (f64, f64),
    pub source: String,
}

impl SellmeierSet {
    pub fn new(
        form: SellmeierForm,
        ordinary: Vec<f64>,
        extraordinary: Vec<f64>,
        valid_range: (f64, f64),
        source: impl Into<String>,
    ) -> Result<Self> {
        let set = SellmeierSet {
            form,
            ordinary,
            extraordinary,
            valid_range,
            source: source.into(),
        };
        set.validate()?;
        Ok(set)
    }

    /// The β-BBO set shipped with the crate (default: `bbo-zhang2000`).
    pub fn bundled(name: &str) -> Result<Self> {
        let text = match name {
            "bbo-zhang2000" => BUNDLED_BBO_ZHANG,
            "bbo-eimerl1987" => BUNDLED_BBO_EIMERL,
            other => {
                return Err(Error::Invalid(format!(
                    "unknown bundled Sellmeier set '{other}' (available: {})",
                    BUNDLED_SETS.join(", ")
                )))
            }
        };
        Self::from_toml_str(text, Path::new(name))
    }

    pub fn bbo() -> Self {
        Self::bundled("bbo-zhang2000").expect("bundled coefficient file is valid")
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let file: SellmeierFile =
            toml::from_str(text).map_err(|e| Error::format(origin, e.to_string()))?;
        Self::try_from(file).map_err(|e| Error::format(origin, e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_file_repr(&self) -> SellmeierFile {
        SellmeierFile {
            source: self.source.clone(),
            form: self.form,
            valid_range_nm: [self.valid_range.0 / NM, self.valid_range.1 / NM],
            ordinary: self.ordinary.clone(),
            extraordinary: self.extraordinary.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.valid_range;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Invalid(format!(
                "invalid Sellmeier range [{lo:e}, {hi:e}] m"
            )));
        }
        for (name, coeffs) in [("ordinary", &self.ordinary), ("extraordinary", &self.extraordinary)] {
            let ok = match self.form {
                SellmeierForm::PolePolynomial => coeffs.len() >= 3,
                SellmeierForm::Standard => coeffs.len() >= 3 && coeffs.len() % 2 == 1,
            };
            if !ok {
                return Err(Error::Invalid(format!(
                    "{name} coefficient list has wrong length {} for form {:?}",
                    coeffs.len(),
                    self.form
                )));
            }
            let poles: Vec<f64> = match self.form {
                SellmeierForm::PolePolynomial => vec![coeffs[2]],
                SellmeierForm::Standard => coeffs[1..].chunks(2).map(|c| c[1]).collect(),
            };
            let (lo_um2, hi_um2) = ((lo * 1e6).powi(2), (hi * 1e6).powi(2));
            if poles.iter().any(|&p| p >= lo_um2 && p <= hi_um2) {
                return Err(Error::Invalid(format!(
                    "{name} Sellmeier pole lies inside the validity range"
                )));
            }
            for i in 0..=200 {
                let lam = lo + (hi - lo) * i as f64 / 200.0;
                let n2 = self.eval_n2(coeffs, lam);
                if !(n2 >= 1.0) {
                    return Err(Error::Invalid(format!(
                        "{name} index below 1 at {:.1} nm",
                        lam / NM
                    )));
                }
            }
        }
        Ok(())
    }

    fn eval_n2(&self, coeffs: &[f64], wavelength: f64) -> f64 {
        let l2 = (wavelength * 1e6).powi(2);
        match self.form {
            SellmeierForm::PolePolynomial => {
                let mut n2 = coeffs[0] + coeffs[1] / (l2 - coeffs[2]);
                let mut pow = l2;
                for d in &coeffs[3..] {
                    n2 += d * pow;
                    pow *= l2;
                }
                n2
            }
            SellmeierForm::Standard => {
                coeffs[0]
                    + coeffs[1..]
                        .chunks(2)
                        .map(|bc| bc[0] * l2 / (l2 - bc[1]))
                        .sum::<f64>()
            }
        }
    }

    pub fn check_range(&self, wavelength: f64) -> Result<()> {
        let (lo, hi) = self.valid_range;
        if wavelength >= lo && wavelength <= hi {
            Ok(())
        } else {
            Err(Error::Range {
                wavelength_nm: wavelength / NM,
                min_nm: lo / NM,
                max_nm: hi / NM,
            })
        }
    }

    pub fn n_ordinary(&self, wavelength: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        Ok(self.eval_n2(&self.ordinary, wavelength).sqrt())
    }

    pub fn n_extraordinary_principal(&self, wavelength: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        Ok(self.eval_n2(&self.extraordinary, wavelength).sqrt())
    }

    /// Extraordinary index for propagation at `angle` to the optic axis,
    /// from the index ellipsoid `1/n² = cos²θ/n_o² + sin²θ/n_e²`.
    pub fn n_at_angle(&self, wavelength: f64, angle: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        let no2 = self.eval_n2(&self.ordinary, wavelength);
        if angle == 0.0 {
            return Ok(no2.sqrt());
        }
        let ne2 = self.eval_n2(&self.extraordinary, wavelength);
        let (s, c) = angle.sin_cos();
        Ok((c * c / no2 + s * s / ne2).powf(-0.5))
    }
}

impl TryFrom<SellmeierFile> for SellmeierSet {
    type Error = Error;

    fn try_from(f: SellmeierFile) -> Result<Self> {
        SellmeierSet::new(
            f.form,
            f.ordinary,
            f.extraordinary,
            (f.valid_range_nm[0] * NM, f.valid_range_nm[1] * NM),
            f.source,
        )
    }
}

/// Ordinary index n_o(λ).
pub fn index_ordinary(wavelength: f64, sellmeier: &SellmeierSet) -> Result<f64> {
    sellmeier.n_ordinary(wavelength)
}

/// Extraordinary-wave index n(θ) at `optic_axis_angle` ∈ [0, π/2].
pub fn index_extraordinary(
    wavelength: f64,
    optic_axis_angle: f64,
    sellmeier: &SellmeierSet,
) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&optic_axis_angle) {
        return Err(Error::Domain(format!(
            "optic-axis angle {optic_axis_angle} rad outside [0, π/2]"
        )));
    }
    if optic_axis_angle == std::f64::consts::FRAC_PI_2 {
        return sellmeier.n_extraordinary_principal(wavelength);
    }
    sellmeier.n_at_angle(wavelength, optic_axis_angle)
}

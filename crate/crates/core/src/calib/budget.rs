use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetComponent {
    pub name: String,
    pub efficiency: f64,
    pub uncertainty: f64,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

/// How component uncertainties combine into the total.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagation {
    /// Σ mᵢσᵢ/ηᵢ: fully correlated, worst case.
    #[default]
    Linear,
    /// √Σ (mᵢσᵢ/ηᵢ)²: independent components.
    Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyBudget {
    pub components: Vec<BudgetComponent>,
    pub propagation: Propagation,
    pub total: f64,
    pub total_uncertainty: f64,
}

pub fn budget_efficiency(components: &[BudgetComponent], propagation: Propagation) -> Result<EfficiencyBudget> {
    if components.is_empty() {
        return Err(Error::Size { needed: 1, got: 0 });
    }
    for c in components {
        if !(c.efficiency > 0.0 && c.efficiency <= 1.0) || !(c.uncertainty >= 0.0) || c.multiplicity == 0 {
            return Err(Error::Invalid(format!(
                "component '{}': efficiency must be in (0, 1], uncertainty ≥ 0, multiplicity ≥ 1",
                c.name
            )));
        }
    }
    let total: f64 = components
        .iter()
        .map(|c| c.efficiency.powi(c.multiplicity as i32))
        .product();
    let terms = components
        .iter()
        .map(|c| c.multiplicity as f64 * c.uncertainty / c.efficiency);
    let rel = match propagation {
        Propagation::Linear => terms.sum::<f64>(),
        Propagation::Quadrature => terms.map(|t| t * t).sum::<f64>().sqrt(),
    };
    Ok(EfficiencyBudget {
        components: components.to_vec(),
        propagation,
        total,
        total_uncertainty: total * rel,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetFile {
    #[serde(default)]
    propagation: Option<Propagation>,
    component: Vec<BudgetComponent>,
}

/// Parses a TOML component table (`[[component]]` entries).
pub fn parse_budget(text: &str) -> std::result::Result<(Vec<BudgetComponent>, Option<Propagation>), String> {
    let f: BudgetFile = toml::from_str(text).map_err(|e| e.to_string())?;
    Ok((f.component, f.propagation))
}

impl EfficiencyBudget {
    /// A table with one line per component and the total.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self.components.iter().map(|c| c.name.chars().count()).max().unwrap_or(4).max(5);
        out.push_str(&format!("{:<width$}  {:>10}  {:>5}\n", "component", "efficiency", "count"));
        for c in &self.components {
            out.push_str(&format!(
                "{:<width$}  {:>4.2} ± {:.2}  {:>5}\n",
                c.name, c.efficiency, c.uncertainty, c.multiplicity
            ));
        }
        out.push_str(&format!(
            "{:<width$}  {:>4.2} ± {:.2}\n",
            "total", self.total, self.total_uncertainty
        ));
        out
    }
}

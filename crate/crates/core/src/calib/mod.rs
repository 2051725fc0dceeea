//! Two-step calibration: relative response from a low-gain tilt scan, then
//! absolute efficiency and gain from a high-gain scan.

mod absolute;
mod budget;
mod compare;
mod envelope;
mod export;
mod filter;
mod fit;
mod linearity;
mod peak_shift;
mod relative;

pub use absolute::{
    absolute_fit, predict_envelope, quantum_efficiency, AbsoluteOptions, CalibrationResult, EfficiencyTable,
    Sensitivity, TransferReport, DEFAULT_DEGENERACY_THRESHOLD,
};
pub use budget::{budget_efficiency, parse_budget, BudgetComponent, EfficiencyBudget, Propagation};
pub use compare::{compare_reference, ComparisonReport, LampReference};
pub use envelope::{envelope, Envelope, Scallop, SupportRule};
pub use export::{read_export, CalibrationExport, Estimate, FitExport, Provenance, SensitivityExport, EXPORT_VERSION};
pub use filter::{fourier_lowpass, lowpass, MIN_FILTER_LENGTH};
pub use fit::{invert_spd, levenberg_marquardt, solve_spd, LmOptions, LmReport};
pub use linearity::{linearity_bound, reference_slope, LinearityOptions, MIN_POINTS};
pub use peak_shift::{derivative, peak_shift_estimate, peak_shift_on};
pub use relative::{relative_response, ResponseCurve, RelativeOptions, DEFAULT_CUTOFF, DEFAULT_SCALLOP_THRESHOLD};

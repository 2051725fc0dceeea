//! Synthetic tilt-scan datasets through a known detector.

mod bundle;
mod noise;
mod power;
mod scan;
mod truth;

pub use bundle::{
    parse_table, read_bundle, read_metadata, read_table, read_truth, record_meta, render_bundle,
    spectrum_csv, spectrum_file_name, to_nm, truth_csv, two_column_csv, write_bundle, write_files,
    BundleMetadata, CrystalMeta, GainMeta, GeometryMeta, PumpMeta, RecordMeta, TruthMeta,
    FORMAT_VERSION, METADATA_FILE, TRUTH_FILE,
};
pub use noise::{spectrum_rng, NoiseModel, PumpDrift};
pub use power::power_scan;
pub use scan::{synthesize_tilt_scan, SpectrumRecord, TiltSchedule};
pub use truth::{pixel_grid, smooth_response, step_response, structured_response, DetectorTruth};

//! Breakeven solving, the sparse/dense transmission threshold, and the
//! preset landscape and sensitivity sweeps built on [`crate::energy`].

mod breakeven;
mod report;
mod sweep;

pub use breakeven::{
    breakeven_annotations, breakeven_spike_rate, sparse_dense_threshold, BreakevenAnnotations, BreakevenOutcome,
    BreakevenResult,
};
pub use report::{
    breakeven_rows, sweep_rows, write_breakeven_csv, write_breakeven_json, write_sweep_csv, write_sweep_json,
    BreakevenRow, OutputFormat, SweepRow, SWEEP_CSV_HEADER,
};
pub use sweep::{
    default_models, landscape, model_preset, sensitivity, AdvantageFlags, ModelPreset, SensitivityGrid,
    SensitivityReport, SweepRecord, LANDSCAPE_N_SRC,
};

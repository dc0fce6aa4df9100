//! Scenario configuration, the run loop, summaries, outputs and figure presets.

mod config;
mod output;
mod presets;
mod run;
mod summary;

pub use config::*;
pub use output::{emit_csv, emit_plot, read_csv, write_text, PlotKind, Sample, CSV_COLUMNS};
pub use presets::*;
pub use run::{initial_pcc_phasor, run, Diagnostics, RunResult, CEILING_FACTOR};
pub use summary::{summarize, RunSummary, SegmentSummary, PARAM_NAMES, SETTLING_BAND};

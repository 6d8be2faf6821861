//! Run configuration, pipelines, exports and resumable sweeps.

mod commands;
mod config;
mod export;
mod pipeline;
mod sweep;

pub use commands::{cmd_capture, cmd_derive, cmd_emit, derive_report, output_dir, DeriveReport, REFERENCE_DRIVE_DELTA};
pub use config::{
    hash_canonical, CaptureSpec, DriveSpec, GridSpec, InitialState, RunConfig, Scenario, SpectrumSpec, SweepMode,
    SweepSpec, RUN_KEYS, VERSION,
};
pub use export::{
    read_csv, read_json_metadata, wigner_grid, write_correlation, write_csv, write_json, write_modes,
    write_spectrogram, write_wigner, Metadata,
};
pub use pipeline::{
    build_emitter, evolve_source, run_capture, run_emit, CaptureOutcome, CaptureSummary, EffectiveSummary,
    EmitOutcome, EmitSummary, Emitter, GridReport, CAT_TAIL_LIMIT, PEAK_THRESHOLD, RELEASE_TIME_CAP,
};
pub use sweep::{aggregate, run_sweep, PointStatus, SweepManifest, SweepPoint, SweepReport, SweepRow};

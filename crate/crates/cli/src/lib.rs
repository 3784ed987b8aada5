//! Workbench for observer-based seismic damage assessment.
//!
//! This crate wires the structural, excitation, observer, and damage
//! libraries into a file-oriented pipeline: synthesize a ground motion,
//! simulate a (possibly degraded) truth building, manufacture noisy
//! instrument records, design the observer gain, re-simulate the estimate
//! from measurements alone, and assess both responses for damage.  Every
//! stage reads and writes plain files (CSV records, JSON reports), so runs
//! are reproducible from any intermediate and diff-able across
//! configurations.
//!
//! The `hystereo` binary in this crate exposes each stage as a subcommand
//! plus `twin` (the whole pipeline) and `compare` (report deltas).  The
//! library half hosts everything testable: config and model-file parsing,
//! the stage functions, report assembly, and the run manifest.

pub mod config;
pub mod error;
pub mod manifest;
pub mod model_io;
pub mod report;
pub mod stages;

pub use config::{DamageOverride, MotionSource, ObjectiveChoice, ObserverSettings, TwinExperimentConfig};
pub use error::{CliError, Result};
pub use manifest::{FileRecord, RunManifest, StageRecord};
pub use model_io::{ColumnFile, DampingFile, ElementInfo, ModelFile, StoryFile};
pub use report::{
    build_report, compare_runs, emit_plotdata, DamageReport, DeltaReport, ElementDelta,
    ElementRow, EnergySummary, StoryDelta, StoryRow,
};
pub use stages::{
    assess, assess_run, build_variant, design_gain, gen_motion, observe, run_twin, sense,
    sensor_map, simulate, AssessTarget, GainsFile, LocalizationSummary, ModelVariant,
    TwinArtifacts, TwinScoring,
};

//! Configuration loading, grid sweeps and result export.

pub mod config;
pub mod export;
pub mod run;

pub use config::{Axis, Config, Measure, OutputFormat};
pub use export::export;
pub use run::{arnold_tongue, run_point, run_sweep, PointRecord, SweepRequest, SweepResult};

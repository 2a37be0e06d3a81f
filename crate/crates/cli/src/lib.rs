//! Experiment runner for the geometric phase gate simulator: configuration,
//! experiments, CSV and report output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{Experiment, ExperimentConfig, JitterSpec, TripodInitial};
pub use error::{CliError, CliResult};
pub use experiments::{
    co_propagate, gate_full, gate_full_with, gate_half, gate_half_with, robustness, run, spin_demo,
    tripod_cycle, xi_scan, Checkpoint, GateHalfResult, GateReport, RelativeRun, RobustnessSummary,
    SpinDemoResult, SpinRow, TripodResult, XiScanResult,
};
pub use output::{fmt_float, Cell, CsvTable, ExperimentOutput, Report, Value};

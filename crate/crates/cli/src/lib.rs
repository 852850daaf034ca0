//! Experiment runner around the `selectnet` solver: configuration files,
//! error-curve and statistics CSVs, and slice exports of trained runs.

pub mod app;
pub mod artifacts;
pub mod config;
pub mod slice;

pub use app::{execute, Cli, Command, Failure, Overrides};
pub use artifacts::{read_curve, write_curve, CurveRow, CURVE_HEADER};
pub use config::{load_experiment, parse_experiment, CompareSpec, ExperimentFile};
pub use slice::Plane;

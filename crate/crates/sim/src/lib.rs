//! Synthetic stand-in for a fleet of fixed thermal cameras.
//!
//! Everything runs on a simulated clock: the schedule, the frames and the
//! anomalies are pure functions of the configuration, the anomaly script and
//! the capture instant.

pub mod anomaly;
pub mod camera;
pub mod fleet;
pub mod generate;
pub mod scenario;
pub mod scene;
pub mod schedule;

pub use crate::anomaly::{AnomalyEffect, AnomalyEvent, AnomalyScript};
pub use crate::camera::{default_topology, CameraConfig, Link};
pub use crate::fleet::{run_fleet, DeliveryFailure, FleetReport, FrameSink};
pub use crate::generate::simulate_frame;
pub use crate::scenario::Scenario;
pub use crate::scene::{DuckCurve, SceneSpec};
pub use crate::schedule::next_capture_times;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("scenario parse error: {0}")]
    Yaml(#[from] serde_yaml::Error),
    #[error(transparent)]
    Core(#[from] thermowatch_core::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

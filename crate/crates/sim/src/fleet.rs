use std::collections::BTreeMap;

use thermowatch_core::frame::ThermalFrame;
use thermowatch_core::time::Timestamp;

use crate::anomaly::AnomalyScript;
use crate::camera::{validate_fleet, CameraConfig};
use crate::generate::simulate_frame;
use crate::schedule::next_capture_times;
use crate::Result;

/// Receives the frames of the cameras attached to one PC.
pub trait FrameSink {
    fn deliver(&mut self, frame: &ThermalFrame) -> Result<(), String>;
}

impl<F: FnMut(&ThermalFrame) -> Result<(), String>> FrameSink for F {
    fn deliver(&mut self, frame: &ThermalFrame) -> Result<(), String> {
        self(frame)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryFailure {
    pub camera_id: String,
    pub pc_id: u8,
    pub timestamp: Timestamp,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FleetReport {
    pub generated: usize,
    pub delivered: usize,
    pub failures: Vec<DeliveryFailure>,
}

/// Generates every scheduled frame in `[from, until)` and hands it to the
/// sink of the owning PC, in global capture order. A failing or missing sink
/// is recorded and the run carries on.
pub fn run_fleet(
    configs: &[CameraConfig],
    script: &AnomalyScript,
    from: Timestamp,
    until: Timestamp,
    sinks: &mut BTreeMap<u8, &mut dyn FrameSink>,
) -> Result<FleetReport> {
    validate_fleet(configs)?;
    script.validate(configs)?;
    let by_id: BTreeMap<&str, &CameraConfig> = configs.iter().map(|c| (c.camera_id.as_str(), c)).collect();
    let mut report = FleetReport::default();
    for (t, camera_id) in next_capture_times(configs, from, until) {
        let config = by_id[camera_id.as_str()];
        let frame = simulate_frame(config, script, t)?;
        report.generated += 1;
        let outcome = match sinks.get_mut(&config.pc_id) {
            Some(sink) => sink.deliver(&frame),
            None => Err(format!("no sink for pc {}", config.pc_id)),
        };
        match outcome {
            Ok(()) => report.delivered += 1,
            Err(error) => report.failures.push(DeliveryFailure {
                camera_id,
                pc_id: config.pc_id,
                timestamp: t,
                error,
            }),
        }
    }
    Ok(report)
}

//! YAML scenario files. See `docs/scenario.md` for the schema.

use std::collections::BTreeMap;

use serde::Deserialize;
use thermowatch_core::mask::RoiId;
use thermowatch_core::time::{self, Timestamp};

use crate::anomaly::{AnomalyEvent, AnomalyScript};
use crate::camera::{default_topology, validate_fleet, CameraConfig, Link};
use crate::scene::{DuckCurve, SceneSpec};
use crate::{Result, SimError};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneOverrides {
    rows: Option<usize>,
    cols: Option<usize>,
    noise_sigma_c: Option<f64>,
    rng_seed: Option<u64>,
    #[serde(default)]
    curves: BTreeMap<u8, DuckCurve>,
}

impl SceneOverrides {
    fn apply(&self, scene: &mut SceneSpec) -> Result<()> {
        if let Some(v) = self.rows {
            scene.rows = v;
        }
        if let Some(v) = self.cols {
            scene.cols = v;
        }
        if let Some(v) = self.noise_sigma_c {
            scene.noise_sigma_c = v;
        }
        if let Some(v) = self.rng_seed {
            scene.rng_seed = v;
        }
        for (&id, curve) in &self.curves {
            let roi = RoiId::new(id).map_err(|_| SimError::Invalid(format!("curve for unknown roi {id}")))?;
            scene.curves[roi.index()] = *curve;
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraEntry {
    camera_id: String,
    pc_id: u8,
    link: Link,
    #[serde(default)]
    scene: SceneOverrides,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    rng_seed: u64,
    start: String,
    #[serde(default = "default_hours")]
    duration_hours: f64,
    #[serde(default)]
    scene: SceneOverrides,
    cameras: Option<Vec<CameraEntry>>,
    #[serde(default)]
    anomalies: Vec<AnomalyEvent>,
}

fn default_hours() -> f64 {
    24.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub rng_seed: u64,
    pub start: Timestamp,
    pub duration_secs: i64,
    pub cameras: Vec<CameraConfig>,
    pub script: AnomalyScript,
}

impl Scenario {
    /// Default 20-camera fleet with no anomalies.
    pub fn default_fleet(rng_seed: u64, start: Timestamp, duration_secs: i64) -> Self {
        Self {
            rng_seed,
            start,
            duration_secs,
            cameras: default_topology(rng_seed),
            script: AnomalyScript::default(),
        }
    }

    pub fn end(&self) -> Timestamp {
        time::from_unix(self.start.timestamp() + self.duration_secs)
    }

    pub fn from_yaml(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_yaml::from_str(text)?;
        let start = time::parse(&file.start)
            .ok_or_else(|| SimError::Invalid(format!("start {:?} is not an ISO-8601 timestamp", file.start)))?;
        let secs = file.duration_hours * 3600.0;
        if !(secs >= 0.0 && secs.is_finite() && secs.fract() == 0.0) {
            return Err(SimError::Invalid(format!(
                "duration_hours {} must be >= 0 and a whole number of seconds",
                file.duration_hours
            )));
        }
        let cameras = match file.cameras {
            None => {
                let mut cams = default_topology(file.rng_seed);
                for c in &mut cams {
                    file.scene.apply(&mut c.scene)?;
                }
                cams
            }
            Some(entries) => {
                let mut out = Vec::with_capacity(entries.len());
                for e in entries {
                    let mut scene = SceneSpec::new(file.rng_seed);
                    file.scene.apply(&mut scene)?;
                    e.scene.apply(&mut scene)?;
                    out.push(CameraConfig {
                        camera_id: e.camera_id,
                        pc_id: e.pc_id,
                        link: e.link,
                        scene,
                    });
                }
                out
            }
        };
        validate_fleet(&cameras)?;
        let script = AnomalyScript::new(file.anomalies);
        script.validate(&cameras)?;
        Ok(Self {
            rng_seed: file.rng_seed,
            start,
            duration_secs: secs as i64,
            cameras,
            script,
        })
    }

    pub fn camera(&self, camera_id: &str) -> Option<&CameraConfig> {
        self.cameras.iter().find(|c| c.camera_id == camera_id)
    }
}

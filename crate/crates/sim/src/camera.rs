use serde::{Deserialize, Serialize};
use thermowatch_core::mask::RoiMaskSet;

use crate::scene::{layout_masks, SceneSpec};
use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Ethernet,
    Radio,
}

impl Link {
    pub fn interval_secs(self) -> i64 {
        match self {
            Link::Ethernet => 60,
            Link::Radio => 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraConfig {
    pub camera_id: String,
    pub pc_id: u8,
    pub link: Link,
    pub scene: SceneSpec,
}

pub const PC_COUNT: u8 = 9;

impl CameraConfig {
    pub fn interval_secs(&self) -> i64 {
        self.link.interval_secs()
    }

    pub fn validate(&self) -> Result<()> {
        if self.camera_id.is_empty() || self.camera_id.chars().any(char::is_whitespace) {
            return Err(SimError::Invalid(format!("bad camera id {:?}", self.camera_id)));
        }
        if !(1..=PC_COUNT).contains(&self.pc_id) {
            return Err(SimError::Invalid(format!(
                "camera {}: pc_id {} outside 1..={PC_COUNT}",
                self.camera_id, self.pc_id
            )));
        }
        self.scene.validate()
    }

    /// Masks matching the generated scene.
    pub fn masks(&self) -> Result<RoiMaskSet> {
        layout_masks(&self.camera_id, self.scene.rows, self.scene.cols)
    }
}

pub fn validate_fleet(configs: &[CameraConfig]) -> Result<()> {
    let mut ids = std::collections::BTreeSet::new();
    for c in configs {
        c.validate()?;
        if !ids.insert(c.camera_id.as_str()) {
            return Err(SimError::Invalid(format!("duplicate camera id {}", c.camera_id)));
        }
    }
    Ok(())
}

/// Twenty cameras `cam-01`..`cam-20` spread round-robin over nine PCs (two
/// or three cameras each); the last four are on radio links.
pub fn default_topology(rng_seed: u64) -> Vec<CameraConfig> {
    (0..20u8)
        .map(|i| CameraConfig {
            camera_id: format!("cam-{:02}", i + 1),
            pc_id: i % PC_COUNT + 1,
            link: if i >= 16 { Link::Radio } else { Link::Ethernet },
            scene: SceneSpec::new(rng_seed),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_topology_shape() {
        let fleet = default_topology(7);
        assert_eq!(fleet.len(), 20);
        validate_fleet(&fleet).unwrap();
        for pc in 1..=PC_COUNT {
            let n = fleet.iter().filter(|c| c.pc_id == pc).count();
            assert!((2..=3).contains(&n), "pc {pc} has {n} cameras");
        }
        assert_eq!(fleet.iter().filter(|c| c.link == Link::Radio).count(), 4);
    }

    #[test]
    fn rejects_duplicates_and_bad_pc() {
        let mut fleet = default_topology(7);
        fleet[1].camera_id = fleet[0].camera_id.clone();
        assert!(validate_fleet(&fleet).is_err());
        let mut fleet = default_topology(7);
        fleet[0].pc_id = 10;
        assert!(validate_fleet(&fleet).is_err());
    }
}

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thermowatch_core::time::{self, Timestamp};
use thermowatch_core::ThermalFrame;
use thermowatch_sim::{run_fleet, FleetReport, FrameSink, Scenario};

use crate::args::SimulateArgs;
use crate::{io_err, CliError, CliResult};

/// Decimal places written to frame files.
pub const FRAME_PRECISION: usize = 3;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub camera_id: String,
    #[serde(with = "time::serde_secs")]
    pub timestamp: Timestamp,
    /// Relative to the manifest's directory.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub rng_seed: u64,
    #[serde(with = "time::serde_secs")]
    pub start: Timestamp,
    #[serde(with = "time::serde_secs")]
    pub end: Timestamp,
    pub frames: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    Scenario::from_yaml(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// `[start, end)` of the run, `hours` overriding the scenario's duration.
pub fn span(scenario: &Scenario, hours: Option<f64>) -> CliResult<(Timestamp, Timestamp)> {
    let secs = match hours {
        None => scenario.duration_secs,
        Some(h) => {
            let s = h * 3600.0;
            if !(s >= 0.0 && s.is_finite() && s.fract() == 0.0) {
                return Err(CliError::config(format!("--hours {h} must be >= 0 and a whole number of seconds")));
            }
            s as i64
        }
    };
    Ok((scenario.start, time::from_unix(scenario.start.timestamp() + secs)))
}

/// `20240601T120500Z`
pub fn frame_file_name(ts: &Timestamp) -> String {
    format!("{}.tframe", time::format(ts).replace([':', '-'], ""))
}

/// Runs the fleet over `[from, until)` and hands each frame to `handle` in
/// global capture order. The first handler error stops the run.
pub fn drive_fleet(
    scenario: &Scenario,
    from: Timestamp,
    until: Timestamp,
    handle: impl FnMut(&ThermalFrame) -> CliResult<()>,
) -> CliResult<FleetReport> {
    let handle = RefCell::new(handle);
    let first_error: RefCell<Option<CliError>> = RefCell::new(None);
    let deliver = |f: &ThermalFrame| -> Result<(), String> {
        if first_error.borrow().is_some() {
            return Err("run aborted".into());
        }
        (handle.borrow_mut())(f).map_err(|e| {
            let msg = e.message.clone();
            *first_error.borrow_mut() = Some(e);
            msg
        })
    };
    let mut per_pc: Vec<_> = (0..9).map(|_| deliver).collect();
    let mut sinks: BTreeMap<u8, &mut dyn FrameSink> = per_pc
        .iter_mut()
        .enumerate()
        .map(|(i, s)| (i as u8 + 1, s as &mut dyn FrameSink))
        .collect();
    let report = run_fleet(&scenario.cameras, &scenario.script, from, until, &mut sinks)
        .map_err(|e| CliError::config(e.to_string()))?;
    drop(sinks);
    drop(per_pc);
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub frames: usize,
    pub cameras: usize,
    pub manifest: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<SimulateSummary> {
    let scenario = load_scenario(&args.scenario)?;
    let (from, until) = span(&scenario, args.hours)?;
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;

    let mut entries = Vec::new();
    let mut masks_written = BTreeMap::new();
    drive_fleet(&scenario, from, until, |frame| {
        let cam = frame.camera_id();
        if !masks_written.contains_key(cam) {
            let config = scenario.camera(cam).expect("frames come from scenario cameras");
            let masks = config.masks().map_err(|e| CliError::config(e.to_string()))?;
            let dir = args.out.join("masks");
            fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
            let path = dir.join(format!("{cam}.tmask"));
            fs::write(&path, masks.to_tmask()).map_err(|e| io_err(&path, e))?;
            masks_written.insert(cam.to_string(), ());
        }
        let rel = format!("frames/{cam}/{}", frame_file_name(&frame.timestamp()));
        let path = args.out.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        fs::write(&path, frame.to_tframe(Some(FRAME_PRECISION))).map_err(|e| io_err(&path, e))?;
        entries.push(ManifestEntry {
            camera_id: cam.to_string(),
            timestamp: frame.timestamp(),
            path: rel,
        });
        Ok(())
    })?;

    let manifest = Manifest {
        rng_seed: scenario.rng_seed,
        start: from,
        end: until,
        frames: entries,
    };
    let path = args.out.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
    Ok(SimulateSummary {
        frames: manifest.frames.len(),
        cameras: masks_written.len(),
        manifest: path,
    })
}

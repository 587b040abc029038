//! `detect`: frames in timestamp order through the per-camera pipeline, one
//! result table per frame, mirrored to `tables.ndjson` and uploaded.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thermowatch_core::deviation::DeviationConfig;
use thermowatch_core::predictor::FitParams;
use thermowatch_core::segmentation::SegmentationConfig;
use thermowatch_core::time::{self, Timestamp};
use thermowatch_core::{AlarmPolicy, Detector, DetectorConfig, RoiId, RoiMaskSet, RoiTable, ThermalFrame};

use crate::args::DetectArgs;
use crate::client::{Client, Delivery};
use crate::simulate::{drive_fleet, load_scenario, span, Manifest};
use crate::{io_err, CliError, CliResult};

pub const TABLES: &str = "tables.ndjson";
pub const SPOOL: &str = "spool.ndjson";
pub const SEGMENTATION: &str = "segmentation.ndjson";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpoolEntry {
    pub reason: String,
    pub table: RoiTable,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectSummary {
    pub frames: usize,
    pub alarm_rows: usize,
    pub alarm_tables: usize,
    pub delivered: usize,
    /// Tables left in the spool file (new and carried over).
    pub spooled: usize,
    /// Spooled tables from an earlier run that were delivered now.
    pub resent: usize,
    pub first_alarm: Option<(String, Timestamp)>,
    pub tables_path: PathBuf,
}

impl DetectSummary {
    pub fn render(&self) -> String {
        let mut s = format!(
            "frames: {}\nalarm rows: {}\ntables with alarms: {}\ndelivered: {}\nspooled: {}\n",
            self.frames, self.alarm_rows, self.alarm_tables, self.delivered, self.spooled
        );
        if self.resent > 0 {
            s.push_str(&format!("resent from spool: {}\n", self.resent));
        }
        if let Some((cam, ts)) = &self.first_alarm {
            s.push_str(&format!("first alarm: {cam} at {}\n", time::format(ts)));
        }
        s.push_str(&format!("tables: {}\n", self.tables_path.display()));
        s
    }
}

pub fn alarm_policy(args: &DetectArgs) -> CliResult<AlarmPolicy> {
    let mut policy = AlarmPolicy::uniform(args.threshold).map_err(CliError::config)?;
    policy.two_sided = !args.one_sided;
    if args.coverage_minutes <= 0 {
        return Err(CliError::config("--coverage-minutes must be positive"));
    }
    policy.min_model_coverage_secs = args.coverage_minutes * 60;
    for spec in &args.roi_thresholds {
        let parsed = spec.split_once('=').and_then(|(roi, c)| {
            let roi = RoiId::new(roi.trim().parse().ok()?).ok()?;
            Some((roi, c.trim().parse::<f64>().ok()?))
        });
        let (roi, c) = parsed.ok_or_else(|| CliError::config(format!("--roi-threshold {spec:?}: expected ROI=C with ROI in 1..=9")))?;
        policy.set_threshold(roi, c).map_err(CliError::config)?;
    }
    Ok(policy)
}

/// Reads every `*.tmask` file in `dir`, keyed by the camera id in its header.
pub fn load_masks(dir: &Path) -> CliResult<BTreeMap<String, RoiMaskSet>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::config(format!("masks {}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tmask"))
        .collect();
    paths.sort();
    for path in paths {
        let text = fs::read_to_string(&path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let masks = RoiMaskSet::parse_tmask(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if out.insert(masks.camera_id().to_string(), masks).is_some() {
            return Err(CliError::config(format!("{}: second mask for the same camera", path.display())));
        }
    }
    Ok(out)
}

fn require_masks(cameras: &BTreeSet<String>, masks: &BTreeMap<String, RoiMaskSet>) -> CliResult<()> {
    let missing: Vec<&str> = cameras.iter().filter(|c| !masks.contains_key(*c)).map(String::as_str).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::config(format!("no mask for camera(s): {}", missing.join(", "))))
    }
}

struct Uploader {
    client: Client,
    down: bool,
    pending: Vec<SpoolEntry>,
    delivered: usize,
}

impl Uploader {
    fn send(&mut self, table: &RoiTable, json: &str) {
        if self.down {
            self.pending.push(SpoolEntry { reason: "server unreachable".into(), table: table.clone() });
            return;
        }
        match self.client.post_table(json) {
            Delivery::Accepted => self.delivered += 1,
            Delivery::Rejected(reason) => self.pending.push(SpoolEntry { reason: format!("rejected: {reason}"), table: table.clone() }),
            Delivery::Unavailable { reason, connection } => {
                // stop paying the connect timeout on every frame
                self.down |= connection;
                self.pending.push(SpoolEntry { reason, table: table.clone() });
            }
        }
    }
}

struct Run {
    detector: Detector,
    tables: BufWriter<File>,
    tables_path: PathBuf,
    segmentation: Option<BufWriter<File>>,
    uploader: Option<Uploader>,
    summary: DetectSummary,
}

impl Run {
    fn handle(&mut self, frame: &ThermalFrame) -> CliResult<()> {
        let outcome = self
            .detector
            .process(frame)
            .map_err(|e| CliError::failure(format!("{} at {}: {e}", frame.camera_id(), time::format(&frame.timestamp()))))?;
        let table = outcome.table;
        let json = table.to_canonical_json();
        writeln!(self.tables, "{json}").map_err(|e| io_err(&self.tables_path, e))?;
        if let (Some(w), Some(report)) = (self.segmentation.as_mut(), outcome.segmentation) {
            let line = serde_json::to_string(&report).expect("reports serialize");
            writeln!(w, "{line}").map_err(|e| CliError::failure(format!("{SEGMENTATION}: {e}")))?;
        }
        self.summary.frames += 1;
        let alarms = table.alarm_count();
        self.summary.alarm_rows += alarms;
        if alarms > 0 {
            self.summary.alarm_tables += 1;
            if self.summary.first_alarm.is_none() {
                self.summary.first_alarm = Some((table.camera_id.clone(), table.timestamp));
            }
        }
        if let Some(up) = self.uploader.as_mut() {
            up.send(&table, &json);
        }
        Ok(())
    }
}

fn read_spool(path: &Path) -> CliResult<Vec<SpoolEntry>> {
    match fs::read_to_string(path) {
        Ok(text) => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::failure(format!("{}: line {}: {e}", path.display(), i + 1))))
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(io_err(path, e)),
    }
}

fn write_spool(path: &Path, entries: &[SpoolEntry]) -> CliResult<()> {
    if entries.is_empty() {
        return match fs::remove_file(path) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(io_err(path, e)),
            _ => Ok(()),
        };
    }
    let mut text = String::new();
    for e in entries {
        text.push_str(&serde_json::to_string(e).expect("spool entries serialize"));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

enum Source {
    Files { dir: PathBuf, manifest: Manifest },
    Live { scenario: thermowatch_sim::Scenario, from: Timestamp, until: Timestamp },
}

pub fn detect(args: &DetectArgs) -> CliResult<DetectSummary> {
    let policy = alarm_policy(args)?;
    let fit = FitParams { smoothing_alpha: args.alpha, coverage_secs: policy.min_model_coverage_secs };
    let config = DetectorConfig {
        policy,
        fit,
        segmentation: args.segmentation.then(|| (SegmentationConfig::default(), DeviationConfig::default())),
    };
    let mut detector = Detector::new(config).map_err(CliError::config)?;

    let source = match (&args.frames, &args.scenario) {
        (Some(dir), _) => Source::Files { dir: dir.clone(), manifest: Manifest::load(dir)? },
        (None, Some(path)) => {
            let scenario = load_scenario(path)?;
            let (from, until) = span(&scenario, args.hours)?;
            Source::Live { scenario, from, until }
        }
        (None, None) => return Err(CliError::config("either --frames or --scenario is required")),
    };
    let (cameras, masks): (BTreeSet<String>, BTreeMap<String, RoiMaskSet>) = match &source {
        Source::Files { dir, manifest } => {
            let cams = manifest.frames.iter().map(|e| e.camera_id.clone()).collect();
            let masks = load_masks(&args.masks.clone().unwrap_or_else(|| dir.join("masks")))?;
            (cams, masks)
        }
        Source::Live { scenario, .. } => {
            let cams = scenario.cameras.iter().map(|c| c.camera_id.clone()).collect();
            let masks = match &args.masks {
                Some(dir) => load_masks(dir)?,
                None => scenario
                    .cameras
                    .iter()
                    .map(|c| c.masks().map(|m| (c.camera_id.clone(), m)))
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::config(e.to_string()))?,
            };
            (cams, masks)
        }
    };
    require_masks(&cameras, &masks)?;
    for cam in &cameras {
        detector.add_camera(masks[cam].clone()).map_err(CliError::config)?;
    }
    let uploader = args.server.as_deref().map(Client::new).transpose()?.map(|client| Uploader {
        client,
        down: false,
        pending: Vec::new(),
        delivered: 0,
    });

    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    let tables_path = args.out.join(TABLES);
    let tables = BufWriter::new(File::create(&tables_path).map_err(|e| io_err(&tables_path, e))?);
    let segmentation = if args.segmentation {
        let p = args.out.join(SEGMENTATION);
        Some(BufWriter::new(File::create(&p).map_err(|e| io_err(&p, e))?))
    } else {
        None
    };
    let spool_path = args.out.join(SPOOL);
    let mut run = Run { detector, tables, tables_path: tables_path.clone(), segmentation, uploader, summary: DetectSummary::default() };

    // retry what an earlier run could not deliver
    if let Some(up) = run.uploader.as_mut() {
        for entry in read_spool(&spool_path)? {
            let before = up.delivered;
            up.send(&entry.table, &entry.table.to_canonical_json());
            run.summary.resent += up.delivered - before;
        }
        up.delivered = 0;
    }

    match &source {
        Source::Files { dir, manifest } => {
            let mut order: Vec<_> = manifest.frames.iter().collect();
            order.sort_by(|a, b| (a.timestamp, &a.camera_id).cmp(&(b.timestamp, &b.camera_id)));
            for entry in order {
                let path = dir.join(&entry.path);
                let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
                let frame = ThermalFrame::parse_tframe(&text).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))?;
                if frame.camera_id() != entry.camera_id || frame.timestamp() != entry.timestamp {
                    return Err(CliError::failure(format!("{}: header does not match the manifest entry", path.display())));
                }
                run.handle(&frame)?;
            }
        }
        Source::Live { scenario, from, until } => {
            drive_fleet(scenario, *from, *until, |frame| run.handle(frame))?;
        }
    }

    run.tables.flush().map_err(|e| io_err(&tables_path, e))?;
    if let Some(w) = run.segmentation.as_mut() {
        w.flush().map_err(|e| CliError::failure(format!("{SEGMENTATION}: {e}")))?;
    }
    let mut summary = run.summary;
    summary.tables_path = tables_path;
    if let Some(up) = run.uploader {
        summary.delivered = up.delivered;
        summary.spooled = up.pending.len();
        write_spool(&spool_path, &up.pending)?;
    }
    Ok(summary)
}

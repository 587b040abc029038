//! Command line flags. Every path and endpoint can also come from a
//! `THERMOWATCH_*` environment variable; a flag wins over the environment,
//! which wins over the built-in default.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const DEFAULT_SERVER: &str = "http://127.0.0.1:8750";
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8750";

#[derive(Debug, Parser)]
#[command(name = "thermowatch", version, about = "Thermal anomaly detection for power transformers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate frame files from a scenario.
    Simulate(SimulateArgs),
    /// Run detection on frame files or an inline simulation and upload the tables.
    Detect(DetectArgs),
    /// Run the ingest server.
    Serve(ServeArgs),
    /// Query a running server.
    Query(QueryArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Scenario YAML file.
    #[arg(long, env = "THERMOWATCH_SCENARIO")]
    pub scenario: PathBuf,
    /// Simulated span in hours from the scenario start (overrides the scenario).
    #[arg(long)]
    pub hours: Option<f64>,
    #[arg(long, env = "THERMOWATCH_OUT_DIR", default_value = "thermowatch-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// Directory written by `simulate` (holds manifest.json).
    #[arg(long, env = "THERMOWATCH_FRAMES", conflicts_with = "scenario", required_unless_present = "scenario")]
    pub frames: Option<PathBuf>,
    /// Simulate inline from this scenario instead of reading frame files.
    #[arg(long, env = "THERMOWATCH_SCENARIO")]
    pub scenario: Option<PathBuf>,
    /// Inline simulation span in hours (overrides the scenario).
    #[arg(long, requires = "scenario")]
    pub hours: Option<f64>,
    /// Directory of `<camera_id>.tmask` files. Defaults to `<frames>/masks`,
    /// or the scenario layout when simulating inline.
    #[arg(long, env = "THERMOWATCH_MASKS")]
    pub masks: Option<PathBuf>,
    /// Server base URL; tables stay local when absent.
    #[arg(long, env = "THERMOWATCH_SERVER")]
    pub server: Option<String>,
    #[arg(long, env = "THERMOWATCH_OUT_DIR", default_value = "thermowatch-out")]
    pub out: PathBuf,
    /// Alarm margin in °C for every ROI.
    #[arg(long, env = "THERMOWATCH_THRESHOLD", default_value_t = 15.0)]
    pub threshold: f64,
    /// Per-ROI margin override, e.g. `--roi-threshold 3=10` (repeatable).
    #[arg(long = "roi-threshold", value_name = "ROI=C")]
    pub roi_thresholds: Vec<String>,
    /// Alarm only when the recorded temperature exceeds the prediction.
    #[arg(long)]
    pub one_sided: bool,
    /// Blend factor between the latest window and the previous curve.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Largest time-of-day gap to the nearest training sample, in minutes.
    #[arg(long, default_value_t = 10)]
    pub coverage_minutes: i64,
    /// Also run segmentation and size tracking (writes segmentation.ndjson).
    #[arg(long)]
    pub segmentation: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, env = "THERMOWATCH_LISTEN", default_value = DEFAULT_LISTEN)]
    pub listen: String,
    #[arg(long, env = "THERMOWATCH_LOG", default_value = "thermowatch-log.ndjson")]
    pub log: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct QueryArgs {
    #[arg(long, env = "THERMOWATCH_SERVER", default_value = DEFAULT_SERVER)]
    pub server: String,
    /// Inclusive range start (ISO-8601 UTC).
    #[arg(long)]
    pub from: Option<String>,
    /// Inclusive range end (ISO-8601 UTC).
    #[arg(long)]
    pub to: Option<String>,
    #[arg(long)]
    pub camera: Option<String>,
    /// With `--only-alarms`, count only alarms on this ROI.
    #[arg(long)]
    pub roi: Option<u8>,
    #[arg(long)]
    pub only_alarms: bool,
    /// Print statistics instead of tables.
    #[arg(long)]
    pub stats: bool,
    /// Print the server's JSON instead of the text listing.
    #[arg(long)]
    pub json: bool,
}

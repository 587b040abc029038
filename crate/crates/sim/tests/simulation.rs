use std::collections::BTreeMap;

use thermowatch_core::mask::RoiId;
use thermowatch_core::time::{self, Timestamp};
use thermowatch_core::ThermalFrame;
use thermowatch_sim::camera::Link;
use thermowatch_sim::schedule::capture_count;
use thermowatch_sim::{
    default_topology, next_capture_times, run_fleet, simulate_frame, AnomalyEffect, AnomalyEvent, AnomalyScript,
    CameraConfig, DuckCurve, FrameSink,
};

fn at(s: &str) -> Timestamp {
    time::parse(s).unwrap()
}

fn flat_camera(temp: f64) -> CameraConfig {
    let mut c = default_topology(3).remove(0);
    c.scene.curves = [DuckCurve::flat(temp); 9];
    c
}

fn roi_pixels(frame: &ThermalFrame, cam: &CameraConfig, roi: u8) -> Vec<f64> {
    let masks = cam.masks().unwrap();
    masks
        .pixels_of(RoiId::new(roi).unwrap())
        .iter()
        .map(|&i| frame.pixels()[i])
        .collect()
}

fn hot_spot(camera_id: &str, roi_id: u8, magnitude_c: f64, start: &str, end: &str) -> AnomalyEvent {
    AnomalyEvent {
        camera_id: camera_id.into(),
        start: at(start),
        end: at(end),
        effect: AnomalyEffect::HotSpot { roi_id, magnitude_c },
    }
}

#[test]
fn noiseless_frame_is_exactly_the_base_curve() {
    let cam = flat_camera(30.0);
    let f = simulate_frame(&cam, &AnomalyScript::default(), at("2024-06-01T13:37:00Z")).unwrap();
    assert!(f.pixels().iter().all(|&p| p == 30.0));
}

#[test]
fn hot_spot_adds_magnitude_to_its_roi_only() {
    let cam = flat_camera(30.0);
    let script = AnomalyScript::new(vec![hot_spot(&cam.camera_id, 2, 25.0, "2024-06-01T10:00:00Z", "2024-06-01T11:00:00Z")]);
    let f = simulate_frame(&cam, &script, at("2024-06-01T10:30:00Z")).unwrap();
    assert!(roi_pixels(&f, &cam, 2).iter().all(|&p| p == 55.0));
    for roi in [1, 3, 4, 5, 6, 7, 8, 9] {
        assert!(roi_pixels(&f, &cam, roi).iter().all(|&p| p == 30.0));
    }
}

#[test]
fn frames_are_deterministic() {
    let mut cam = default_topology(11).remove(4);
    cam.scene.noise_sigma_c = 1.0;
    let script = AnomalyScript::new(vec![hot_spot(&cam.camera_id, 7, 5.0, "2024-06-01T00:00:00Z", "2024-06-02T00:00:00Z")]);
    let t = at("2024-06-01T08:05:00Z");
    let a = simulate_frame(&cam, &script, t).unwrap();
    let b = simulate_frame(&cam, &script, t).unwrap();
    assert_eq!(a.to_tframe(None), b.to_tframe(None));
    let other = simulate_frame(&cam, &script, at("2024-06-01T08:06:00Z")).unwrap();
    assert_ne!(a.pixels(), other.pixels());
}

#[test]
fn noise_has_requested_spread() {
    let mut cam = flat_camera(25.0);
    cam.scene.noise_sigma_c = 1.0;
    let f = simulate_frame(&cam, &AnomalyScript::default(), at("2024-06-01T00:00:00Z")).unwrap();
    let n = f.len() as f64;
    let mean = f.pixels().iter().sum::<f64>() / n;
    let var = f.pixels().iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 25.0).abs() < 0.1, "{mean}");
    assert!((var.sqrt() - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn anomalies_only_act_inside_their_window() {
    let mut cam = default_topology(5).remove(0);
    cam.scene.noise_sigma_c = 0.7;
    let events = vec![
        hot_spot(&cam.camera_id, 3, 20.0, "2024-06-01T01:00:00Z", "2024-06-01T02:00:00Z"),
        AnomalyEvent {
            camera_id: cam.camera_id.clone(),
            start: at("2024-06-01T01:00:00Z"),
            end: at("2024-06-01T02:00:00Z"),
            effect: AnomalyEffect::Intruder { center_row: 40, center_col: 10, area_px: 30, temperature_c: 37.0 },
        },
        AnomalyEvent {
            camera_id: cam.camera_id.clone(),
            start: at("2024-06-01T01:00:00Z"),
            end: at("2024-06-01T02:00:00Z"),
            effect: AnomalyEffect::VegetationGrowth {
                center_row: 40,
                center_col: 30,
                growth_px_per_min: 3.0,
                initial_area_px: 5,
                offset_c: -2.0,
            },
        },
    ];
    let script = AnomalyScript::new(events);
    let quiet = AnomalyScript::default();
    for t in next_capture_times(&[cam.clone()], at("2024-06-01T00:00:00Z"), at("2024-06-01T03:00:00Z")) {
        let with = simulate_frame(&cam, &script, t.0).unwrap();
        let without = simulate_frame(&cam, &quiet, t.0).unwrap();
        let inside = t.0 >= at("2024-06-01T01:00:00Z") && t.0 < at("2024-06-01T02:00:00Z");
        assert_eq!(with.pixels() != without.pixels(), inside, "{}", time::format(&t.0));
    }
}

#[test]
fn vegetation_blob_grows_linearly() {
    let cam = flat_camera(30.0);
    let mut cam = cam;
    cam.scene.curves[8] = DuckCurve::flat(10.0);
    let event = AnomalyEvent {
        camera_id: cam.camera_id.clone(),
        start: at("2024-06-01T00:00:00Z"),
        end: at("2024-06-01T05:00:00Z"),
        effect: AnomalyEffect::VegetationGrowth {
            center_row: 30,
            center_col: 32,
            growth_px_per_min: 2.5,
            initial_area_px: 0,
            offset_c: 0.0,
        },
    };
    let script = AnomalyScript::new(vec![event]);
    for minutes in [0i64, 1, 10, 41] {
        let t = time::from_unix(at("2024-06-01T00:00:00Z").timestamp() + minutes * 60);
        let f = simulate_frame(&cam, &script, t).unwrap();
        let cooled = f.pixels().iter().filter(|&&p| p == 10.0).count();
        let background = cam.masks().unwrap().pixels_of(RoiId::new(9).unwrap()).len();
        let covered = (2.5 * minutes as f64).floor() as usize;
        // the blob sits inside equipment, so every covered pixel is newly cool
        assert_eq!(cooled, background + covered, "minute {minutes}");
    }
}

#[derive(Default)]
struct Recorder {
    cameras: Vec<String>,
    last: Option<Timestamp>,
}

impl FrameSink for Recorder {
    fn deliver(&mut self, frame: &ThermalFrame) -> Result<(), String> {
        if self.last.is_some_and(|l| l > frame.timestamp()) {
            return Err("out of order".into());
        }
        self.last = Some(frame.timestamp());
        self.cameras.push(frame.camera_id().to_string());
        Ok(())
    }
}

fn run_recorded(fleet: &[CameraConfig], from: Timestamp, until: Timestamp) -> (BTreeMap<u8, Recorder>, usize, usize) {
    let mut recorders: BTreeMap<u8, Recorder> = (1..=9).map(|pc| (pc, Recorder::default())).collect();
    let report = {
        let mut sinks: BTreeMap<u8, &mut dyn FrameSink> =
            recorders.iter_mut().map(|(&pc, r)| (pc, r as &mut dyn FrameSink)).collect();
        run_fleet(fleet, &AnomalyScript::default(), from, until, &mut sinks).unwrap()
    };
    assert!(report.failures.is_empty());
    (recorders, report.generated, report.delivered)
}

#[test]
fn each_pc_receives_only_its_cameras() {
    let fleet: Vec<CameraConfig> = default_topology(1).into_iter().take(2).collect();
    assert_ne!(fleet[0].pc_id, fleet[1].pc_id);
    let (rec, generated, delivered) = run_recorded(&fleet, at("2024-06-01T00:00:00Z"), at("2024-06-01T00:30:00Z"));
    assert_eq!((generated, delivered), (60, 60));
    for cam in &fleet {
        let got = &rec[&cam.pc_id].cameras;
        assert_eq!(got.len(), 30);
        assert!(got.iter().all(|c| *c == cam.camera_id));
    }
}

#[test]
fn default_fleet_48h_frame_total_matches_schedule_oracle() {
    let fleet = default_topology(1);
    let (from, until) = (at("2024-06-01T00:00:00Z"), at("2024-06-03T00:00:00Z"));
    // 16 ethernet cameras at one frame a minute, 4 radio cameras at one every five
    let expected = 16 * 48 * 60 + 4 * 48 * 12;
    let oracle: usize = fleet.iter().map(|c| capture_count(c.interval_secs(), from, until)).sum();
    assert_eq!(oracle, expected);
    let (rec, generated, delivered) = run_recorded(&fleet, from, until);
    assert_eq!((generated, delivered), (expected, expected));
    for cam in &fleet {
        let n = rec[&cam.pc_id].cameras.iter().filter(|c| **c == cam.camera_id).count();
        assert_eq!(n, capture_count(cam.interval_secs(), from, until));
    }
}

#[test]
fn zero_length_span_yields_nothing() {
    let fleet = default_topology(1);
    let t = at("2024-06-01T00:00:00Z");
    let mut sinks: BTreeMap<u8, &mut dyn FrameSink> = BTreeMap::new();
    let report = run_fleet(&fleet, &AnomalyScript::default(), t, t, &mut sinks).unwrap();
    assert_eq!(report.generated, 0);
}

#[test]
fn sink_failures_are_reported_per_frame() {
    let fleet: Vec<CameraConfig> = default_topology(1).into_iter().take(3).collect();
    let mut flaky = |f: &ThermalFrame| -> Result<(), String> {
        if time::time_of_day(&f.timestamp()) % 120 == 0 {
            Err("disk full".into())
        } else {
            Ok(())
        }
    };
    let mut ok = |_: &ThermalFrame| -> Result<(), String> { Ok(()) };
    let mut sinks: BTreeMap<u8, &mut dyn FrameSink> = BTreeMap::new();
    sinks.insert(1, &mut flaky);
    sinks.insert(2, &mut ok);
    // pc 3 has no sink at all
    let report = run_fleet(&fleet, &AnomalyScript::default(), at("2024-06-01T00:00:00Z"), at("2024-06-01T00:10:00Z"), &mut sinks).unwrap();
    assert_eq!(report.generated, 30);
    assert_eq!(report.delivered, 15);
    assert_eq!(report.failures.iter().filter(|f| f.pc_id == 1).count(), 5);
    assert_eq!(report.failures.iter().filter(|f| f.pc_id == 3).count(), 10);
}

#[test]
fn radio_cameras_capture_every_five_minutes() {
    let mut cam = flat_camera(20.0);
    cam.link = Link::Radio;
    let times = next_capture_times(&[cam], at("2024-06-01T00:00:00Z"), at("2024-06-01T01:00:00Z"));
    assert_eq!(times.len(), 12);
    assert!(times.windows(2).all(|w| (w[1].0 - w[0].0).num_seconds() == 300));
}

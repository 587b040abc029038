use serde_json::Value;
use thermowatch_core::time;
use thermowatch_core::RoiTable;

use crate::args::QueryArgs;
use crate::client::Client;
use crate::{CliError, CliResult};

fn check(args: &QueryArgs) -> CliResult<Vec<(&'static str, String)>> {
    let mut params = Vec::new();
    let mut bounds = [None, None];
    for (i, (key, value)) in [("from", &args.from), ("to", &args.to)].into_iter().enumerate() {
        if let Some(v) = value {
            let ts = time::parse(v).ok_or_else(|| CliError::config(format!("--{key} {v:?} is not an ISO-8601 timestamp")))?;
            bounds[i] = Some(ts);
            params.push((key, time::format(&ts)));
        }
    }
    if let [Some(from), Some(to)] = bounds {
        if from > to {
            return Err(CliError::config("--from is after --to"));
        }
    }
    if args.stats {
        return Ok(params);
    }
    if let Some(c) = &args.camera {
        params.push(("camera_id", c.clone()));
    }
    if let Some(r) = args.roi {
        if !(1..=9).contains(&r) {
            return Err(CliError::config(format!("--roi {r} is not in 1..=9")));
        }
        params.push(("roi_id", r.to_string()));
    }
    if args.only_alarms {
        params.push(("only_alarms", "true".into()));
    }
    Ok(params)
}

fn render_tables(tables: &[RoiTable]) -> String {
    let mut out = String::new();
    for t in tables {
        let alarms: Vec<String> = t
            .rows
            .iter()
            .filter(|r| r.alarm_bit == 1)
            .map(|r| format!("roi {} {:.1}°C vs {:.1}°C", r.roi_id, r.recorded_c, r.predicted_c.unwrap_or(f64::NAN)))
            .collect();
        let status = if alarms.is_empty() { "ok".to_string() } else { format!("ALARM {}", alarms.join("; ")) };
        out.push_str(&format!("{}  {}  {status}\n", time::format(&t.timestamp), t.camera_id));
    }
    out.push_str(&format!("{} table(s)\n", tables.len()));
    out
}

fn render_stats(v: &Value) -> String {
    let mut out = format!(
        "tables ingested: {}\ncameras reporting: {}\nalarms by roi:\n",
        v["tables_ingested"], v["cameras_reporting"]
    );
    if let Some(map) = v["alarms_by_roi"].as_object() {
        for (roi, n) in map {
            out.push_str(&format!("  {roi}: {n}\n"));
        }
    }
    out
}

/// Returns the text to print.
pub fn query(args: &QueryArgs) -> CliResult<String> {
    let params = check(args)?;
    let client = Client::new(&args.server)?;
    let path = if args.stats { "/api/v1/stats" } else { "/api/v1/alarms" };
    let (status, body) = client
        .get(path, &params)
        .map_err(|e| CliError::server(format!("{}: {e}", client.base())))?;
    if status != 200 {
        return Err(CliError::server(format!("server answered {status}: {body}")));
    }
    if args.json {
        return Ok(body + "\n");
    }
    if args.stats {
        let v: Value = serde_json::from_str(&body).map_err(|e| CliError::server(format!("bad stats response: {e}")))?;
        Ok(render_stats(&v))
    } else {
        let tables: Vec<RoiTable> =
            serde_json::from_str(&body).map_err(|e| CliError::server(format!("bad alarms response: {e}")))?;
        Ok(render_tables(&tables))
    }
}

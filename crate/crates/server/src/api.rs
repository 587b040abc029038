//! HTTP API.
//!
//! * `POST /api/v1/roitables`: body is a canonical result table.
//!   200 `{"accepted":true,"camera_id":..,"timestamp":..}`,
//!   400 `{"accepted":false,"reason":<code>,"detail":..}`,
//!   503 `{"accepted":false,"reason":"storage_failure","retryable":true}`.
//! * `GET /api/v1/alarms?from=&to=&camera_id=&roi_id=&only_alarms=`: JSON
//!   array of tables.
//! * `GET /api/v1/stats?from=&to=`: statistics object.
//!
//! Query errors answer 400 `{"error":..}`.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{ConnectInfo, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Extension, Router};
use serde_json::json;
use thermowatch_core::time::{self, Timestamp};
use thermowatch_core::{RoiId, RoiTable};

use crate::store::{AlarmQuery, IngestRecord, Store, StoreError};

/// Clients may name themselves with this header; otherwise the peer address
/// is recorded as the source.
pub const SOURCE_HEADER: &str = "x-thermowatch-source";

#[derive(Clone)]
pub struct AppState {
    store: Arc<Mutex<Store>>,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        Self {
            store: Arc::new(Mutex::new(store)),
        }
    }

    pub fn store(&self) -> MutexGuard<'_, Store> {
        // a panic while holding the lock cannot leave a half-applied append
        self.store.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/v1/roitables", post(ingest))
        .route("/api/v1/alarms", get(alarms))
        .route("/api/v1/stats", get(stats))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(
        listener,
        router(state).into_make_service_with_connect_info::<SocketAddr>(),
    )
    .with_graceful_shutdown(shutdown)
    .await
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn bad_request(message: impl Into<String>) -> Response {
    json_response(
        StatusCode::BAD_REQUEST,
        json!({ "error": message.into() }).to_string(),
    )
}

async fn ingest(
    State(state): State<AppState>,
    peer: Option<Extension<ConnectInfo<SocketAddr>>>,
    headers: HeaderMap,
    body: String,
) -> Response {
    let table = match RoiTable::from_json(&body) {
        Ok(t) => t,
        Err(rejection) => {
            return json_response(
                StatusCode::BAD_REQUEST,
                json!({ "accepted": false, "reason": rejection.code(), "detail": rejection.to_string() })
                    .to_string(),
            )
        }
    };
    let source = headers
        .get(SOURCE_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string)
        .or_else(|| peer.map(|Extension(ConnectInfo(addr))| addr.to_string()))
        .unwrap_or_else(|| "unknown".into());
    let record = IngestRecord {
        received_at: time::now(),
        source,
        table,
    };
    let appended = tokio::task::spawn_blocking(move || state.store().append(record)).await;
    match appended {
        Ok(Ok((camera_id, ts))) => json_response(
            StatusCode::OK,
            json!({ "accepted": true, "camera_id": camera_id, "timestamp": time::format(&ts) }).to_string(),
        ),
        Ok(Err(e)) => json_response(
            StatusCode::SERVICE_UNAVAILABLE,
            json!({ "accepted": false, "reason": "storage_failure", "detail": e.to_string(), "retryable": true })
                .to_string(),
        ),
        Err(e) => json_response(
            StatusCode::SERVICE_UNAVAILABLE,
            json!({ "accepted": false, "reason": "storage_failure", "detail": e.to_string(), "retryable": true })
                .to_string(),
        ),
    }
}

fn take_time(params: &mut HashMap<String, String>, key: &str) -> Result<Option<Timestamp>, String> {
    params
        .remove(key)
        .map(|v| time::parse(&v).ok_or_else(|| format!("{key}: {v:?} is not an ISO-8601 timestamp")))
        .transpose()
}

fn reject_unknown(params: &HashMap<String, String>) -> Result<(), String> {
    match params.keys().next() {
        Some(k) => Err(format!("unknown query parameter {k:?}")),
        None => Ok(()),
    }
}

fn parse_alarm_query(mut params: HashMap<String, String>) -> Result<AlarmQuery, String> {
    let from = take_time(&mut params, "from")?;
    let to = take_time(&mut params, "to")?;
    let camera_id = params.remove("camera_id").filter(|c| !c.is_empty());
    let roi_id = params
        .remove("roi_id")
        .map(|v| {
            v.parse::<u8>()
                .ok()
                .and_then(|n| RoiId::new(n).ok())
                .ok_or_else(|| format!("roi_id: {v:?} is not in 1..=9"))
        })
        .transpose()?;
    let only_alarms = match params.remove("only_alarms").as_deref() {
        None | Some("false") | Some("0") => false,
        Some("true") | Some("1") => true,
        Some(other) => return Err(format!("only_alarms: {other:?} is not a boolean")),
    };
    reject_unknown(&params)?;
    Ok(AlarmQuery {
        camera_id,
        from,
        to,
        roi_id,
        only_alarms,
    })
}

fn store_error(e: StoreError) -> Response {
    match e {
        StoreError::InvalidQuery(m) => bad_request(m),
        other => json_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({ "error": other.to_string() }).to_string(),
        ),
    }
}

async fn alarms(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> Response {
    let q = match parse_alarm_query(params) {
        Ok(q) => q,
        Err(m) => return bad_request(m),
    };
    let result = state.store().query(&q);
    match result {
        Ok(tables) => json_response(
            StatusCode::OK,
            serde_json::to_string(&tables).expect("tables always serialize"),
        ),
        Err(e) => store_error(e),
    }
}

async fn stats(State(state): State<AppState>, Query(mut params): Query<HashMap<String, String>>) -> Response {
    let range = take_time(&mut params, "from")
        .and_then(|from| Ok((from, take_time(&mut params, "to")?)))
        .and_then(|r| reject_unknown(&params).map(|()| r));
    let (from, to) = match range {
        Ok(r) => r,
        Err(m) => return bad_request(m),
    };
    let result = state.store().stats(from, to);
    match result {
        Ok(s) => json_response(StatusCode::OK, serde_json::to_string(&s).expect("stats serialize")),
        Err(e) => store_error(e),
    }
}

//! Central server: ingests result tables over HTTP, persists them to an
//! append-only log and answers alarm and statistics queries.

pub mod api;
pub mod store;

pub use crate::api::{router, serve, AppState};
pub use crate::store::{AlarmQuery, IngestRecord, Stats, Store, StoreError};

//! Blocking HTTP client for the ingest server.

use std::time::Duration;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Delivery {
    Accepted,
    /// The server refused the table; resending will not help.
    Rejected(String),
    /// Transport failure or retryable server error.
    Unavailable { reason: String, connection: bool },
}

pub struct Client {
    agent: ureq::Agent,
    base: String,
}

impl Client {
    pub fn new(base: &str) -> CliResult<Self> {
        let base = base.trim_end_matches('/').to_string();
        if !base.starts_with("http://") && !base.starts_with("https://") {
            return Err(CliError::config(format!("server endpoint {base:?} must be an http:// URL")));
        }
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_connect(Some(Duration::from_secs(3)))
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Ok(Self { agent, base })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn post_table(&self, canonical_json: &str) -> Delivery {
        let url = format!("{}/api/v1/roitables", self.base);
        let result = self
            .agent
            .post(&url)
            .header("content-type", "application/json")
            .send(canonical_json);
        let mut resp = match result {
            Ok(r) => r,
            Err(e) => {
                return Delivery::Unavailable {
                    reason: e.to_string(),
                    connection: true,
                }
            }
        };
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().unwrap_or_default();
        match status {
            200 => Delivery::Accepted,
            400 => {
                let reason = serde_json::from_str::<serde_json::Value>(&body)
                    .ok()
                    .and_then(|v| v["reason"].as_str().map(str::to_string))
                    .unwrap_or(body);
                Delivery::Rejected(reason)
            }
            _ => Delivery::Unavailable {
                reason: format!("HTTP {status}: {body}"),
                connection: false,
            },
        }
    }

    /// GET with query parameters; returns status and body.
    pub fn get(&self, path: &str, query: &[(&str, String)]) -> Result<(u16, String), String> {
        let mut req = self.agent.get(&format!("{}{path}", self.base));
        for (k, v) in query {
            req = req.query(*k, v);
        }
        let mut resp = req.call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok((status, body))
    }
}

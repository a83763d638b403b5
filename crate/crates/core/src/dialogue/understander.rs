//! Client for a remote language-understanding service.
//!
//! Request: `POST <endpoint>` with body `{"transcript": "..."}` and, when a
//! key is configured, `Authorization: Bearer <key>`.
//! Response: `{"kind": "fetch", "item": "tea", "parameters": {"sugar": "2"},
//! "confidence": 0.9}` where `item`, `parameters` and `confidence` are
//! optional. Any failure falls back to the local grammar.

use super::{parse, Intent, IntentKind};
use log::warn;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Duration;

pub const ENDPOINT_ENV: &str = "RICO_UNDERSTANDER_URL";
pub const API_KEY_ENV: &str = "RICO_UNDERSTANDER_KEY";

#[derive(Debug, Serialize)]
struct Request<'a> {
    transcript: &'a str,
}

#[derive(Debug, Deserialize)]
struct Response {
    kind: IntentKind,
    #[serde(default)]
    item: Option<String>,
    #[serde(default)]
    parameters: BTreeMap<String, String>,
    #[serde(default)]
    confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Understood {
    pub intent: Intent,
    /// The local grammar produced the intent because the service was not
    /// configured or did not answer properly.
    pub fallback: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Understander {
    endpoint: Option<String>,
    api_key: Option<String>,
}

impl Understander {
    /// No endpoint: every call goes straight to the grammar.
    pub fn offline() -> Self {
        Self::default()
    }

    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        Self { endpoint: Some(endpoint.into()), api_key }
    }

    pub fn from_env() -> Self {
        let nonempty = |k| std::env::var(k).ok().filter(|v: &String| !v.trim().is_empty());
        Self { endpoint: nonempty(ENDPOINT_ENV), api_key: nonempty(API_KEY_ENV) }
    }

    pub fn endpoint(&self) -> Option<&str> {
        self.endpoint.as_deref()
    }

    pub fn understand(&self, transcript: &str, timeout: Duration) -> Understood {
        let Some(endpoint) = &self.endpoint else {
            return Understood { intent: parse(transcript), fallback: true, error: None };
        };
        match self.call(endpoint, transcript, timeout) {
            Ok(intent) => Understood { intent, fallback: false, error: None },
            Err(e) => {
                warn!("understander at {endpoint} failed, using local grammar: {e}");
                Understood { intent: parse(transcript), fallback: true, error: Some(e) }
            }
        }
    }

    fn call(&self, endpoint: &str, transcript: &str, timeout: Duration) -> Result<Intent, String> {
        let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        let mut req = agent.post(endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(Request { transcript }).map_err(|e| e.to_string())?;
        let body: Response = resp.body_mut().read_json().map_err(|e| e.to_string())?;
        into_intent(body)
    }
}

fn into_intent(r: Response) -> Result<Intent, String> {
    let confidence = r.confidence.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&confidence) {
        return Err(format!("confidence {confidence} outside [0, 1]"));
    }
    if r.kind == IntentKind::Unknown {
        return Ok(Intent::unknown());
    }
    let item = r.item.map(|s| s.trim().to_lowercase()).filter(|s| !s.is_empty());
    if r.kind == IntentKind::Fetch && item.is_none() {
        return Err("fetch without an item".into());
    }
    Ok(Intent { kind: r.kind, item, parameters: r.parameters, confidence })
}

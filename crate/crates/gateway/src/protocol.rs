//! Wire messages. Every message is one JSON object in a WebSocket text
//! frame, discriminated by its `type` field. `schema/messages.schema.json`
//! documents the same shapes for clients.

use rico_core::world::WorldEvent;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inbound messages longer than this are rejected unparsed.
pub const MAX_MESSAGE_BYTES: usize = 64 * 1024;
/// Events carried in each telemetry frame.
pub const EVENT_RING: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirePose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireHead {
    pub pan: f64,
    pub tilt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireTwist {
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInfo {
    pub id: u64,
    pub name: String,
    /// waiting, executing, suspended, finished or terminated.
    pub state: String,
    pub priority: i64,
}

/// Row-major grid of sensor values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireGrid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireHotspot {
    /// Pixel centroid, fractional.
    pub col: f64,
    pub row: f64,
    pub peak: f64,
    /// Robot-frame bearing, radians.
    pub bearing: f64,
    pub area: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirePerson {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub fallen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireObject {
    pub id: String,
    pub kind: String,
    pub x: f64,
    pub y: f64,
    pub temperature: f64,
    pub on_table: bool,
}

/// Synthetic top-down view standing in for the robot's cameras: 1 marks an
/// obstacle cell, 0 free space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyView {
    pub origin_x: f64,
    pub origin_y: f64,
    pub resolution: f64,
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEvent {
    pub t: f64,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<u64>,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryFrame {
    pub seq: u64,
    /// Simulation time, seconds.
    pub timestamp: f64,
    pub pose: WirePose,
    pub head: WireHead,
    pub base_cmd: WireTwist,
    pub estop: bool,
    pub active_task: Option<TaskInfo>,
    /// Every task that has not ended, by id.
    pub tasks: Vec<TaskInfo>,
    /// 360 ranges, counter-clockwise from the robot heading.
    pub lidar: Vec<f64>,
    pub lidar_max_range: f64,
    pub thermal: WireGrid,
    pub tactile: WireGrid,
    pub hotspots: Vec<WireHotspot>,
    pub persons: Vec<WirePerson>,
    pub objects: Vec<WireObject>,
    pub map: OccupancyView,
    /// The most recent log entries, oldest first, at most 32.
    pub events: Vec<WireEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum ServerMessage {
    Telemetry(TelemetryFrame),
    Error { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CommandMessage {
    /// Base velocity, m/s and rad/s.
    CmdVel { v: f64, w: f64 },
    /// Head joint targets, radians.
    Head { pan: f64, tilt: f64 },
    Estop { engaged: bool },
    /// A person in the world says something.
    Speak { person_id: String, text: String },
    /// Any world event, fields as in the event log.
    Inject(WorldEvent),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("message of {0} bytes exceeds the {MAX_MESSAGE_BYTES} byte limit")]
    TooLarge(usize),
    #[error("message is not UTF-8 text")]
    NotText,
    #[error("invalid message: {0}")]
    Invalid(String),
}

/// Decodes and validates one client message. Never panics.
pub fn decode_command(bytes: &[u8]) -> Result<CommandMessage, ProtocolError> {
    if bytes.len() > MAX_MESSAGE_BYTES {
        return Err(ProtocolError::TooLarge(bytes.len()));
    }
    let text = std::str::from_utf8(bytes).map_err(|_| ProtocolError::NotText)?;
    let cmd: CommandMessage = serde_json::from_str(text).map_err(|e| ProtocolError::Invalid(e.to_string()))?;
    let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
    match &cmd {
        CommandMessage::CmdVel { v, w } if !finite(&[*v, *w]) => Err(ProtocolError::Invalid("non-finite velocity".into())),
        CommandMessage::Head { pan, tilt } if !finite(&[*pan, *tilt]) => {
            Err(ProtocolError::Invalid("non-finite head target".into()))
        }
        CommandMessage::Speak { text, .. } if text.trim().is_empty() => Err(ProtocolError::Invalid("empty speech".into())),
        _ => Ok(cmd),
    }
}

pub fn encode_command(cmd: &CommandMessage) -> String {
    serde_json::to_string(cmd).expect("command serializes")
}

pub fn encode(msg: &ServerMessage) -> String {
    serde_json::to_string(msg).expect("server message serializes")
}

pub fn decode(text: &str) -> Result<ServerMessage, ProtocolError> {
    serde_json::from_str(text).map_err(|e| ProtocolError::Invalid(e.to_string()))
}

pub fn error_message(reason: impl Into<String>) -> ServerMessage {
    ServerMessage::Error { reason: reason.into() }
}

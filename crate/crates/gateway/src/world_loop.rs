//! The single owner of simulation state while serving: applies validated
//! commands in arrival order, ticks the engine and renders telemetry.

use crate::protocol::{
    error_message, CommandMessage, OccupancyView, ServerMessage, TaskInfo, TelemetryFrame, WireEvent, WireGrid,
    WireHead, WireHotspot, WireObject, WirePerson, WirePose, WireTwist, EVENT_RING,
};
use rico_core::geometry::Vec2;
use rico_core::scenarios::{Engine, EngineError};
use rico_core::sensors::{detect_hotspots, lidar_scan, read_tactile, render_thermal};
use rico_core::tasker::{TaskRecord, TaskState};
use rico_core::world::{ObjectKind, WorldEvent};
use serde_json::json;

/// Cell size of the synthetic map view, meters.
pub const MAP_RESOLUTION: f64 = 0.2;

pub struct WorldLoop {
    engine: Engine,
    seq: u64,
    map: OccupancyView,
    /// Ticks between telemetry frames.
    frame_every: u64,
}

fn state_name(s: TaskState) -> &'static str {
    match s {
        TaskState::Waiting => "waiting",
        TaskState::Executing => "executing",
        TaskState::Suspended => "suspended",
        TaskState::Finished => "finished",
        TaskState::Terminated => "terminated",
    }
}

fn task_info(t: &TaskRecord) -> TaskInfo {
    TaskInfo { id: t.id.0, name: t.name.clone(), state: state_name(t.state).into(), priority: t.priority }
}

fn kind_name(k: ObjectKind) -> &'static str {
    match k {
        ObjectKind::Mug => "mug",
        ObjectKind::Plate => "plate",
        ObjectKind::Box => "box",
        ObjectKind::Generic => "generic",
    }
}

fn occupancy(engine: &Engine) -> OccupancyView {
    let w = engine.world();
    let b = w.bounds;
    let cols = ((b.width() / MAP_RESOLUTION).ceil() as usize).max(1);
    let rows = ((b.height() / MAP_RESOLUTION).ceil() as usize).max(1);
    let mut cells = vec![0u8; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let p = Vec2::new(b.min_x + (c as f64 + 0.5) * MAP_RESOLUTION, b.min_y + (r as f64 + 0.5) * MAP_RESOLUTION);
            if w.obstacles.iter().any(|o| o.distance_to(p) <= 0.5 * MAP_RESOLUTION) {
                cells[r * cols + c] = 1;
            }
        }
    }
    OccupancyView { origin_x: b.min_x, origin_y: b.min_y, resolution: MAP_RESOLUTION, rows, cols, cells }
}

impl WorldLoop {
    pub fn new(engine: Engine) -> Self {
        let run = &engine.config().run;
        let frame_every = ((1.0 / (run.telemetry_hz * run.tick)).round() as u64).max(1);
        let map = occupancy(&engine);
        Self { engine, seq: 0, map, frame_every }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn into_engine(self) -> Engine {
        self.engine
    }

    pub fn clock(&self) -> f64 {
        self.engine.world().clock
    }

    /// Applies one validated command. The error, if any, is the reason to
    /// send back to the client.
    pub fn apply(&mut self, cmd: CommandMessage) -> Result<(), String> {
        match cmd {
            CommandMessage::CmdVel { v, w } => match self.engine.command_base(v, w) {
                Ok(true) => Ok(()),
                Ok(false) => Err("estop engaged; cmd_vel ignored".into()),
                Err(e) => Err(e.to_string()),
            },
            CommandMessage::Head { pan, tilt } => match self.engine.command_head(pan, tilt) {
                Ok(true) => Ok(()),
                Ok(false) => Err("estop engaged; head command ignored".into()),
                Err(e) => Err(e.to_string()),
            },
            CommandMessage::Estop { engaged } => {
                self.engine.set_estop(engaged);
                Ok(())
            }
            CommandMessage::Speak { person_id, text } => {
                self.inject(WorldEvent::Speak { person_id, text })
            }
            CommandMessage::Inject(event) => self.inject(event),
        }
    }

    fn inject(&mut self, event: WorldEvent) -> Result<(), String> {
        let kind = event.kind();
        self.engine.inject(event).map_err(|e| {
            self.engine.note("command_rejected", json!({ "event": kind, "error": e.to_string() }));
            e.to_string()
        })
    }

    /// Decodes and applies raw client bytes; returns the error reply, if any.
    pub fn handle_raw(&mut self, bytes: &[u8]) -> Option<ServerMessage> {
        match crate::protocol::decode_command(bytes) {
            Ok(cmd) => self.apply(cmd).err().map(error_message),
            Err(e) => Some(error_message(e.to_string())),
        }
    }

    /// Advances one tick; returns a frame when one is due.
    pub fn tick(&mut self) -> Result<Option<TelemetryFrame>, EngineError> {
        self.engine.tick()?;
        Ok(self.engine.ticks().is_multiple_of(self.frame_every).then(|| self.frame()))
    }

    pub fn frame(&mut self) -> TelemetryFrame {
        self.seq += 1;
        let e = &self.engine;
        let w = e.world();
        let sensors = &e.config().sensors;
        let lidar = lidar_scan(w, &sensors.lidar)
            .map(|s| s.ranges)
            .unwrap_or_else(|_| vec![sensors.lidar.max_range; sensors.lidar.beams]);
        let thermal = render_thermal(w, &sensors.thermal);
        let hotspots = detect_hotspots(&thermal, e.config().patrol.threshold)
            .into_iter()
            .map(|h| WireHotspot {
                col: h.pixel_centroid.0,
                row: h.pixel_centroid.1,
                peak: h.peak_temperature,
                bearing: h.bearing,
                area: h.area,
            })
            .collect();
        let tactile = read_tactile(w);
        let log = e.log();
        let events = log[log.len().saturating_sub(EVENT_RING)..]
            .iter()
            .map(|l| WireEvent { t: l.t, kind: l.kind.clone(), task: l.task.map(|t| t.0), payload: l.payload.clone() })
            .collect();
        let tasks: Vec<TaskInfo> = e.tasker().tasks().filter(|t| !t.state.is_final()).map(task_info).collect();
        TelemetryFrame {
            seq: self.seq,
            timestamp: w.clock,
            pose: WirePose { x: w.robot.x, y: w.robot.y, theta: w.robot.theta },
            head: WireHead { pan: w.head.pan, tilt: w.head.tilt },
            base_cmd: WireTwist { v: w.base_cmd.v, w: w.base_cmd.w },
            estop: e.estop(),
            active_task: e.tasker().executing().and_then(|id| e.tasker().task(id)).map(task_info),
            tasks,
            lidar,
            lidar_max_range: sensors.lidar.max_range,
            thermal: WireGrid { rows: thermal.rows, cols: thermal.cols, values: thermal.pixels },
            tactile: WireGrid { rows: tactile.rows, cols: tactile.cols, values: tactile.forces },
            hotspots,
            persons: w
                .persons
                .iter()
                .map(|p| WirePerson { id: p.id.clone(), x: p.position.x, y: p.position.y, fallen: p.fallen })
                .collect(),
            objects: w
                .objects
                .iter()
                .map(|o| WireObject {
                    id: o.id.clone(),
                    kind: kind_name(o.kind).into(),
                    x: o.position.x,
                    y: o.position.y,
                    temperature: o.surface_temperature,
                    on_table: o.on_table,
                })
                .collect(),
            map: self.map.clone(),
            events,
        }
    }
}

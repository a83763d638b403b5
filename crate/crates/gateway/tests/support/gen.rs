//! Random telemetry frames and random client messages.

#![allow(dead_code)]

use rand::distributions::Alphanumeric;
use rand::Rng;
use rico_gateway::protocol::{
    OccupancyView, TaskInfo, TelemetryFrame, WireEvent, WireGrid, WireHead, WireHotspot, WireObject, WirePerson,
    WirePose, WireTwist,
};
use serde_json::json;

fn word(rng: &mut impl Rng, n: usize) -> String {
    (0..rng.gen_range(1..=n)).map(|_| rng.sample(Alphanumeric) as char).collect()
}

/// Any finite double, including extremes and awkward fractions.
fn real(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..6) {
        0 => 0.0,
        1 => -0.0,
        2 => rng.gen_range(-1e300..1e300),
        3 => f64::from_bits(rng.gen::<u64>() & !(0x7ff << 52)) * if rng.gen() { 1.0 } else { -1.0 }, // subnormal
        4 => rng.gen::<f64>() / 3.0,
        _ => rng.gen_range(-10.0..10.0),
    }
}

fn task(rng: &mut impl Rng) -> TaskInfo {
    let states = ["waiting", "executing", "suspended", "finished", "terminated"];
    TaskInfo { id: rng.gen(), name: word(rng, 12), state: states[rng.gen_range(0..5)].into(), priority: rng.gen() }
}

fn grid(rng: &mut impl Rng) -> WireGrid {
    let (rows, cols) = (rng.gen_range(0..8), rng.gen_range(0..8));
    WireGrid { rows, cols, values: (0..rows * cols).map(|_| real(rng)).collect() }
}

fn payload(rng: &mut impl Rng, depth: u32) -> serde_json::Value {
    match if depth == 0 { rng.gen_range(0..4) } else { rng.gen_range(0..6) } {
        0 => serde_json::Value::Null,
        1 => json!(rng.gen::<bool>()),
        2 => json!(real(rng)),
        3 => json!(word(rng, 10) + "\u{e9}\"\\\n"),
        4 => serde_json::Value::Array((0..rng.gen_range(0..4)).map(|_| payload(rng, depth - 1)).collect()),
        _ => serde_json::Value::Object((0..rng.gen_range(0..4)).map(|_| (word(rng, 6), payload(rng, depth - 1))).collect()),
    }
}

pub fn random_frame(rng: &mut impl Rng) -> TelemetryFrame {
    let (rows, cols) = (rng.gen_range(0..6), rng.gen_range(0..6));
    TelemetryFrame {
        seq: rng.gen(),
        timestamp: real(rng),
        pose: WirePose { x: real(rng), y: real(rng), theta: real(rng) },
        head: WireHead { pan: real(rng), tilt: real(rng) },
        base_cmd: WireTwist { v: real(rng), w: real(rng) },
        estop: rng.gen(),
        active_task: rng.gen::<bool>().then(|| task(rng)),
        tasks: (0..rng.gen_range(0..5)).map(|_| task(rng)).collect(),
        lidar: (0..360).map(|_| real(rng)).collect(),
        lidar_max_range: real(rng),
        thermal: grid(rng),
        tactile: grid(rng),
        hotspots: (0..rng.gen_range(0..3))
            .map(|_| WireHotspot { col: real(rng), row: real(rng), peak: real(rng), bearing: real(rng), area: rng.gen() })
            .collect(),
        persons: (0..rng.gen_range(0..3))
            .map(|_| WirePerson { id: word(rng, 8), x: real(rng), y: real(rng), fallen: rng.gen() })
            .collect(),
        objects: (0..rng.gen_range(0..3))
            .map(|_| WireObject {
                id: word(rng, 8),
                kind: word(rng, 5),
                x: real(rng),
                y: real(rng),
                temperature: real(rng),
                on_table: rng.gen(),
            })
            .collect(),
        map: OccupancyView {
            origin_x: real(rng),
            origin_y: real(rng),
            resolution: real(rng),
            rows,
            cols,
            cells: (0..rows * cols).map(|_| rng.gen_range(0..2)).collect(),
        },
        events: (0..rng.gen_range(0..33))
            .map(|_| WireEvent {
                t: real(rng),
                kind: word(rng, 10),
                task: rng.gen::<bool>().then(|| rng.gen()),
                payload: payload(rng, 2),
            })
            .collect(),
    }
}

/// Raw bytes, mutated valid commands and structurally odd JSON.
pub fn random_message(rng: &mut impl Rng) -> Vec<u8> {
    let valid = [
        r#"{"type":"cmd_vel","v":0.2,"w":-0.1}"#,
        r#"{"type":"head","pan":0.3,"tilt":0.1}"#,
        r#"{"type":"estop","engaged":false}"#,
        r#"{"type":"speak","person_id":"alice","text":"patrol"}"#,
        r#"{"type":"inject","event":"person_respond","person_id":"alice","responsive":true}"#,
        r#"{"type":"inject","event":"remove_object","object_id":"mug"}"#,
    ];
    match rng.gen_range(0..5) {
        0 => (0..rng.gen_range(0..200)).map(|_| rng.gen()).collect(),
        1 => {
            let mut b = valid[rng.gen_range(0..valid.len())].as_bytes().to_vec();
            for _ in 0..rng.gen_range(1..4) {
                let i = rng.gen_range(0..b.len());
                match rng.gen_range(0..3) {
                    0 => b[i] = rng.gen(),
                    1 => {
                        b.remove(i);
                    }
                    _ => b.insert(i, rng.gen()),
                }
            }
            b
        }
        2 => {
            let types = ["cmd_vel", "head", "estop", "speak", "inject", "telemetry", "error", "", "CMD_VEL"];
            let v = json!({
                "type": types[rng.gen_range(0..types.len())],
                "v": payload(rng, 1), "w": payload(rng, 1), "pan": payload(rng, 1), "tilt": payload(rng, 1),
                "engaged": payload(rng, 1), "text": payload(rng, 1), "person_id": payload(rng, 1),
                "event": payload(rng, 1),
            });
            v.to_string().into_bytes()
        }
        3 => payload(rng, 3).to_string().into_bytes(),
        _ => valid[rng.gen_range(0..valid.len())].as_bytes().to_vec(),
    }
}

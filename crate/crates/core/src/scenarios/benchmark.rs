//! Monte Carlo benchmark of spoken-command comprehension.
//!
//! Each trial puts one speaker at a uniform random spot in a square room
//! centred on the robot, turns the robot to a uniform random heading and
//! lets the listening task handle one command, clarification loop
//! included. A trial succeeds when the accepted intent equals the parse of
//! the clean transcript.

use super::{Engine, EngineError};
use crate::config::Config;
use crate::dialogue::{parse, Intent};
use crate::geometry::Rect;
use crate::world::WorldEvent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub command: String,
    pub distance: f64,
    /// Speaker bearing relative to the initial heading.
    pub bearing: f64,
    pub first_fused: f64,
    /// Captures taken, one to three.
    pub captures: u32,
    pub approached: bool,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComprehensionReport {
    pub seed: u64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub results: Vec<TrialResult>,
}

const SPEAKER: &str = "speaker";

pub fn run_comprehension(base: &Config, seed: u64, trials: usize) -> Result<ComprehensionReport, EngineError> {
    let half = base.comprehension.room_size / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::with_capacity(trials);
    for trial in 0..trials {
        let theta = rng.gen_range(-PI..PI);
        let (x, y) = (rng.gen_range(-half..half), rng.gen_range(-half..half));
        let command = base.comprehension.commands[rng.gen_range(0..base.comprehension.commands.len())].clone();
        let trial_seed: u64 = rng.gen();

        let mut cfg = Config::room(Rect::new(-half, -half, half, half));
        cfg.world.robot = [0.0, 0.0, theta];
        cfg.sensors = base.sensors;
        cfg.dialogue = base.dialogue.clone();
        cfg.dialogue.memory_file = None;
        cfg.priorities = base.priorities;
        cfg.persons.push(crate::config::PersonEntry { id: SPEAKER.into(), x, y });
        let mut engine = Engine::new(cfg, Some(trial_seed))?;
        engine.set_dispatch(false);
        engine.inject(WorldEvent::Speak { person_id: SPEAKER.into(), text: command.clone() })?;
        let finished = |e: &Engine| {
            e.log().iter().any(|l| matches!(l.kind.as_str(), "intent_accepted" | "not_understood" | "no_repeat"))
        };
        engine.run_until(base.comprehension.trial_budget, finished)?;

        let expected = parse(&command);
        let log = engine.log();
        let accepted = log.iter().find(|l| l.kind == "intent_accepted").and_then(|l| {
            serde_json::from_value::<Intent>(l.payload["intent"].clone()).ok()
        });
        let captures: Vec<_> = log.iter().filter(|l| l.kind == "speech_captured").collect();
        results.push(TrialResult {
            trial,
            command,
            distance: x.hypot(y),
            bearing: crate::geometry::normalize_angle(y.atan2(x) - theta),
            first_fused: captures.first().and_then(|l| l.payload["fused"].as_f64()).unwrap_or(0.0),
            captures: captures.len() as u32,
            approached: log.iter().any(|l| l.kind == "approach_speaker"),
            success: accepted.is_some_and(|i| i.same_command(&expected)),
        });
    }
    let successes = results.iter().filter(|r| r.success).count();
    Ok(ComprehensionReport {
        seed,
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        results,
    })
}

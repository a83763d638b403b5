//! Loading and running the shipped scenario configs.

#![allow(dead_code)]

use rico_core::config::Config;
use rico_core::scenarios::Engine;
use std::path::PathBuf;

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn fixture(name: &str) -> Config {
    let path = configs_dir().join(format!("{name}.toml"));
    Config::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Starts `scenario` and ticks until the engine settles or the budget runs out.
pub fn run(cfg: Config, scenario: &str, seed: Option<u64>) -> Engine {
    let budget = cfg.run.budget;
    let mut e = Engine::new(cfg, seed).expect("engine builds");
    e.start(scenario).expect("scenario starts");
    e.run_until(budget, |e| e.settled()).expect("run");
    e
}

pub fn run_fixture(name: &str, scenario: &str) -> Engine {
    run(fixture(name), scenario, None)
}

/// (op, state after) for one task, from the tasker trace.
pub fn task_states(e: &Engine, name: &str) -> Vec<(String, rico_core::tasker::TaskState)> {
    let ids: Vec<_> = e.tasker().tasks().filter(|t| t.name == name).map(|t| t.id).collect();
    e.tasker().trace().iter().filter(|r| ids.contains(&r.task)).map(|r| (r.op.clone(), r.after)).collect()
}

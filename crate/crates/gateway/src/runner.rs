//! Headless scenario runs and the metrics document they produce.

use rico_core::config::{Config, ConfigError};
use rico_core::scenarios::{run_comprehension, ComprehensionReport, Engine, EngineError, HazardReport, ScenarioOutcome};
use rico_core::sensors::Violation;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

/// Fields of the metrics document that depend on the host, not the run.
pub const WALL_CLOCK_FIELDS: &[&str] = &["wall_clock_s"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub config: PathBuf,
    /// patrol, transport, idle or comprehension.
    pub scenario: String,
    pub seed: Option<u64>,
    /// Overrides `run.budget`.
    pub duration: Option<f64>,
    /// Comprehension trials; overrides `comprehension.trials`.
    pub trials: Option<usize>,
    /// Where to write the line-delimited event log.
    pub events: Option<PathBuf>,
}

impl RunOptions {
    pub fn new(config: impl Into<PathBuf>, scenario: impl Into<String>) -> Self {
        Self { config: config.into(), scenario: scenario.into(), seed: None, duration: None, trials: None, events: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub task: u64,
    pub name: String,
    pub status: String,
    pub reason: Option<String>,
    pub violations: Vec<Violation>,
    pub finished_at: f64,
}

impl From<&ScenarioOutcome> for OutcomeSummary {
    fn from(o: &ScenarioOutcome) -> Self {
        Self {
            task: o.task.0,
            name: o.name.clone(),
            status: o.status.as_str().into(),
            reason: o.reason.clone(),
            violations: o.violations.clone(),
            finished_at: o.finished_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scenario: String,
    pub config: String,
    pub seed: u64,
    pub sim_time: f64,
    pub ticks: u64,
    /// success, anomaly or aborted; `unfinished` when the budget ran out
    /// first and `idle` when no task ran.
    pub status: String,
    pub expected: Option<String>,
    pub main_task: Option<OutcomeSummary>,
    pub outcomes: Vec<OutcomeSummary>,
    pub hazard_reported: bool,
    pub hazards: Vec<HazardReport>,
    pub alerts: usize,
    pub comprehension: Option<ComprehensionReport>,
    pub event_log: Option<String>,
    pub event_count: usize,
    pub wall_clock_s: f64,
}

impl Metrics {
    /// Zero unless an expected outcome was missed or a task aborted.
    pub fn exit_code(&self) -> i32 {
        let ok = match &self.expected {
            Some(e) => *e == self.status,
            None => self.status != "aborted",
        };
        if ok {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize") + "\n"
    }

    /// The document with host-dependent fields removed.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("metrics serialize");
        for f in WALL_CLOCK_FIELDS {
            v.as_object_mut().expect("object").remove(*f);
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}

fn aggregate(outcomes: &[&ScenarioOutcome]) -> &'static str {
    use rico_core::scenarios::OutcomeStatus::*;
    if outcomes.is_empty() {
        "idle"
    } else if outcomes.iter().any(|o| o.status == Aborted) {
        "aborted"
    } else if outcomes.iter().any(|o| o.status == Anomaly) {
        "anomaly"
    } else {
        "success"
    }
}

/// Summarises a finished or interrupted engine run.
pub fn metrics_for(engine: &Engine, scenario: &str, config: &Path, seed: u64) -> Metrics {
    let outcomes: Vec<&ScenarioOutcome> = engine.outcomes().iter().filter(|o| o.name != "listening").collect();
    let main = engine.main_task();
    let status = match main {
        Some(id) => engine.outcome(id).map_or("unfinished", |o| o.status.as_str()),
        None => aggregate(&outcomes),
    };
    Metrics {
        scenario: scenario.into(),
        config: config.display().to_string(),
        seed,
        sim_time: engine.world().clock,
        ticks: engine.ticks(),
        status: status.into(),
        expected: engine.config().run.expect.clone(),
        main_task: main.and_then(|id| engine.outcome(id)).map(OutcomeSummary::from),
        outcomes: outcomes.iter().map(|o| OutcomeSummary::from(*o)).collect(),
        hazard_reported: engine.hazards().iter().any(|h| h.reported_at_base),
        hazards: engine.hazards().to_vec(),
        alerts: engine.log().iter().filter(|l| l.kind == "alert").count(),
        comprehension: None,
        event_log: None,
        event_count: engine.log().len(),
        wall_clock_s: 0.0,
    }
}

/// Runs a scenario to completion or to its time budget.
pub fn run_headless(opts: &RunOptions) -> Result<Metrics, RunError> {
    let started = Instant::now();
    let mut cfg = Config::load(&opts.config)?;
    if let Some(d) = opts.duration {
        cfg.run.budget = d;
    }
    let seed = opts.seed.unwrap_or(cfg.world.seed);
    let mut metrics = if opts.scenario == "comprehension" {
        let trials = opts.trials.unwrap_or(cfg.comprehension.trials);
        let report = run_comprehension(&cfg, seed, trials)?;
        Metrics {
            scenario: opts.scenario.clone(),
            config: opts.config.display().to_string(),
            seed,
            sim_time: 0.0,
            ticks: 0,
            status: "success".into(),
            expected: cfg.run.expect.clone(),
            main_task: None,
            outcomes: Vec::new(),
            hazard_reported: false,
            hazards: Vec::new(),
            alerts: 0,
            comprehension: Some(report),
            event_log: None,
            event_count: 0,
            wall_clock_s: 0.0,
        }
    } else {
        let budget = cfg.run.budget;
        let mut engine = Engine::new(cfg, Some(seed))?;
        engine.start(&opts.scenario)?;
        engine.run_until(budget, |e| e.settled())?;
        let mut m = metrics_for(&engine, &opts.scenario, &opts.config, seed);
        if let Some(path) = &opts.events {
            std::fs::write(path, engine.events_jsonl()).map_err(|source| RunError::Write { path: path.clone(), source })?;
            m.event_log = Some(path.display().to_string());
        }
        m
    };
    metrics.wall_clock_s = started.elapsed().as_secs_f64();
    Ok(metrics)
}

pub fn write_metrics(metrics: &Metrics, path: &Path) -> Result<(), RunError> {
    std::fs::write(path, metrics.to_json()).map_err(|source| RunError::Write { path: path.to_path_buf(), source })
}

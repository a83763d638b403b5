use clap::Parser;
use rico_core::config::Config;
use rico_core::dialogue::Understander;
use rico_core::scenarios::Engine;
use rico_gateway::runner::{metrics_for, run_headless, write_metrics, Metrics, RunOptions};
use rico_gateway::{Pacing, Server, WorldLoop};
use std::path::PathBuf;
use std::process::ExitCode;

/// Run rico scenarios headless, or serve telemetry and teleoperation over
/// WebSocket.
#[derive(Debug, Parser)]
#[command(name = "rico", version)]
struct Cli {
    /// World and scenario config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// patrol, transport, idle or comprehension.
    #[arg(long, default_value = "idle")]
    scenario: String,
    /// Overrides world.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds to run; overrides run.budget.
    #[arg(long)]
    duration: Option<f64>,
    /// Write the metrics document here instead of stdout.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Write the event log (one JSON record per line) here.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Comprehension benchmark trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Serve WebSocket telemetry on ADDRESS:PORT.
    #[arg(long, value_name = "ADDRESS:PORT")]
    serve: Option<String>,
    /// Tie simulated time to wall time (default when serving).
    #[arg(long, conflicts_with = "fast")]
    realtime: bool,
    /// Run as fast as possible (default when headless).
    #[arg(long)]
    fast: bool,
}

fn emit(metrics: &Metrics, path: Option<&PathBuf>) -> Result<(), String> {
    match path {
        Some(p) => write_metrics(metrics, p).map_err(|e| e.to_string()),
        None => {
            print!("{}", metrics.to_json());
            Ok(())
        }
    }
}

fn headless(cli: &Cli) -> Result<ExitCode, String> {
    let opts = RunOptions {
        config: cli.config.clone(),
        scenario: cli.scenario.clone(),
        seed: cli.seed,
        duration: cli.duration,
        trials: cli.trials,
        events: cli.events.clone(),
    };
    let metrics = run_headless(&opts).map_err(|e| e.to_string())?;
    emit(&metrics, cli.metrics.as_ref())?;
    eprintln!("{}: {} at t={:.1}s", metrics.scenario, metrics.status, metrics.sim_time);
    Ok(ExitCode::from(metrics.exit_code() as u8))
}

fn serve(cli: &Cli, addr: &str) -> Result<ExitCode, String> {
    let cfg = Config::load(&cli.config).map_err(|e| e.to_string())?;
    let seed = cli.seed.unwrap_or(cfg.world.seed);
    let mut engine = Engine::new(cfg, Some(seed)).map_err(|e| e.to_string())?.with_understander(Understander::from_env());
    if cli.scenario != "comprehension" {
        engine.start(&cli.scenario).map_err(|e| e.to_string())?;
    }
    let pacing = if cli.fast { Pacing::Fast } else { Pacing::Realtime };
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let world = rt.block_on(async {
        let server = Server::start(addr, WorldLoop::new(engine), pacing, cli.duration).await.map_err(|e| e.to_string())?;
        eprintln!("listening on ws://{}", server.local_addr());
        server.wait().await.map_err(|e| e.to_string())
    })?;
    let engine = world.into_engine();
    let mut metrics = metrics_for(&engine, &cli.scenario, &cli.config, seed);
    if let Some(p) = &cli.events {
        std::fs::write(p, engine.events_jsonl()).map_err(|e| format!("cannot write {}: {e}", p.display()))?;
        metrics.event_log = Some(p.display().to_string());
    }
    if cli.metrics.is_some() {
        emit(&metrics, cli.metrics.as_ref())?;
    }
    Ok(ExitCode::from(metrics.exit_code() as u8))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.serve {
        Some(addr) => serve(&cli, addr),
        None => headless(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

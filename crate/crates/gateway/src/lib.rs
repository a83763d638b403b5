//! Network gateway and headless runner for the rico runtime.

pub mod protocol;
pub mod runner;
pub mod server;
pub mod world_loop;

pub use protocol::{decode_command, CommandMessage, ServerMessage, TelemetryFrame};
pub use runner::{run_headless, Metrics, RunOptions};
pub use server::{Pacing, Server};
pub use world_loop::WorldLoop;

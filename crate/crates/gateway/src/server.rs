//! WebSocket service. The world loop runs on its own thread; connections
//! validate inbound text, queue commands to the loop and relay frames
//! broadcast from it. A fault on one connection only ends that connection.

use crate::protocol::{decode_command, encode, error_message, CommandMessage, ServerMessage};
use crate::world_loop::WorldLoop;
use futures_util::{SinkExt, StreamExt};
use log::{debug, info, warn};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc};
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message;

/// Frames buffered per client before the slowest ones start skipping.
const BROADCAST_DEPTH: usize = 64;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("world loop failed: {0}")]
    World(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pacing {
    /// Simulation time follows wall time.
    Realtime,
    /// As fast as the loop can tick.
    Fast,
}

/// A queued command plus the channel for an error reply to its sender.
struct Inbound {
    cmd: CommandMessage,
    reply: mpsc::UnboundedSender<ServerMessage>,
}

pub struct Server {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    world: std::thread::JoinHandle<Result<WorldLoop, String>>,
    accept: JoinHandle<()>,
}

impl Server {
    /// Binds `addr` and starts the world loop and the accept loop. With a
    /// `duration`, the loop stops once the simulation clock reaches it.
    pub async fn start(addr: &str, world: WorldLoop, pacing: Pacing, duration: Option<f64>) -> Result<Self, ServeError> {
        let listener = TcpListener::bind(addr).await.map_err(|source| ServeError::Bind { addr: addr.into(), source })?;
        let local = listener.local_addr().map_err(|source| ServeError::Bind { addr: addr.into(), source })?;
        let (frames, _) = broadcast::channel::<Arc<str>>(BROADCAST_DEPTH);
        let (cmd_tx, cmd_rx) = mpsc::unbounded_channel::<Inbound>();
        let stop = Arc::new(AtomicBool::new(false));
        let world = {
            let frames = frames.clone();
            let stop = stop.clone();
            std::thread::Builder::new()
                .name("world-loop".into())
                .spawn(move || run_world(world, cmd_rx, frames, stop, pacing, duration))
                .expect("spawn world thread")
        };
        let accept = tokio::spawn(accept_loop(listener, frames, cmd_tx));
        info!("serving on ws://{local}");
        Ok(Self { addr: local, stop, world, accept })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn is_running(&self) -> bool {
        !self.world.is_finished()
    }

    /// Waits for the world loop to end by itself, then closes the service.
    pub async fn wait(self) -> Result<WorldLoop, ServeError> {
        while !self.world.is_finished() {
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
        self.shutdown().await
    }

    pub async fn shutdown(self) -> Result<WorldLoop, ServeError> {
        self.stop.store(true, Ordering::SeqCst);
        self.accept.abort();
        let world = self.world;
        tokio::task::spawn_blocking(move || world.join())
            .await
            .map_err(|e| ServeError::World(e.to_string()))?
            .map_err(|_| ServeError::World("world thread panicked".into()))?
            .map_err(ServeError::World)
    }
}

fn run_world(
    mut world: WorldLoop,
    mut commands: mpsc::UnboundedReceiver<Inbound>,
    frames: broadcast::Sender<Arc<str>>,
    stop: Arc<AtomicBool>,
    pacing: Pacing,
    duration: Option<f64>,
) -> Result<WorldLoop, String> {
    let started = Instant::now();
    let t0 = world.clock();
    while !stop.load(Ordering::SeqCst) {
        if duration.is_some_and(|d| world.clock() >= d - 1e-9) {
            break;
        }
        while let Ok(Inbound { cmd, reply }) = commands.try_recv() {
            if let Err(reason) = world.apply(cmd) {
                let _ = reply.send(error_message(reason));
            }
        }
        if let Some(frame) = world.tick().map_err(|e| e.to_string())? {
            // no receivers is fine
            let _ = frames.send(encode(&ServerMessage::Telemetry(frame)).into());
        }
        if pacing == Pacing::Realtime {
            let due = Duration::from_secs_f64(world.clock() - t0);
            if let Some(wait) = due.checked_sub(started.elapsed()) {
                std::thread::sleep(wait);
            }
        }
    }
    Ok(world)
}

async fn accept_loop(listener: TcpListener, frames: broadcast::Sender<Arc<str>>, commands: mpsc::UnboundedSender<Inbound>) {
    loop {
        match listener.accept().await {
            Ok((stream, peer)) => {
                let rx = frames.subscribe();
                let commands = commands.clone();
                tokio::spawn(async move {
                    if let Err(e) = connection(stream, rx, commands).await {
                        debug!("connection {peer} ended: {e}");
                    }
                });
            }
            Err(e) => warn!("accept failed: {e}"),
        }
    }
}

async fn connection(
    stream: TcpStream,
    mut frames: broadcast::Receiver<Arc<str>>,
    commands: mpsc::UnboundedSender<Inbound>,
) -> Result<(), tokio_tungstenite::tungstenite::Error> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut source) = ws.split();
    let (reply_tx, mut replies) = mpsc::unbounded_channel::<ServerMessage>();
    loop {
        tokio::select! {
            msg = source.next() => {
                let bytes = match msg {
                    None | Some(Ok(Message::Close(_))) => break,
                    Some(Err(e)) => return Err(e),
                    Some(Ok(Message::Text(t))) => t.as_bytes().to_vec(),
                    Some(Ok(Message::Binary(_))) => {
                        let _ = reply_tx.send(error_message("binary frames are not supported; send JSON text"));
                        continue;
                    }
                    Some(Ok(_)) => continue,
                };
                match decode_command(&bytes) {
                    Ok(cmd) => {
                        if commands.send(Inbound { cmd, reply: reply_tx.clone() }).is_err() {
                            let _ = reply_tx.send(error_message("world loop has stopped"));
                        }
                    }
                    Err(e) => {
                        let _ = reply_tx.send(error_message(e.to_string()));
                    }
                }
            }
            frame = frames.recv() => match frame {
                Ok(text) => sink.send(Message::text(text.to_string())).await?,
                Err(broadcast::error::RecvError::Lagged(n)) => debug!("client lagged by {n} frames"),
                Err(broadcast::error::RecvError::Closed) => break,
            },
            Some(reply) = replies.recv() => sink.send(Message::text(encode(&reply))).await?,
        }
    }
    let _ = sink.close().await;
    Ok(())
}

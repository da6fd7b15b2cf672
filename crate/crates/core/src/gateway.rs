//! WebSocket gateway: streams simulator topics to one teleoperation client
//! and feeds its joystick and control messages back into the tick loop.
//!
//! Every text frame is one canonical envelope. The server re-stamps and
//! re-sequences client messages when it publishes them on the bus.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::Notify;
use tokio_tungstenite::tungstenite::protocol::frame::coding::CloseCode;
use tokio_tungstenite::tungstenite::protocol::CloseFrame;
use tokio_tungstenite::tungstenite::Message;

use crate::bus::topics::{
    ControlAction, EpisodeMsg, EpisodePhase, CONTROL, EPISODE, GOAL, HUMANS, INTERACTIONS,
    JOYSTICK, OBJECTS, ROBOT, WALLS,
};
use crate::bus::{decode_envelope, encode_envelope, Bus, Payload};
use crate::controller::{ControllerConfig, ControllerError, Decision, EpisodeController, Phase};
use crate::recorder::SystemClock;
use crate::rng::Seed;
use crate::scene::GenerationRanges;

/// Topics streamed to the client, in send order within a round.
pub const SERVER_TOPICS: [&str; 7] = [HUMANS, OBJECTS, WALLS, GOAL, INTERACTIONS, ROBOT, EPISODE];
/// Topics accepted from the client.
pub const CLIENT_TOPICS: [&str; 2] = [JOYSTICK, CONTROL];

const POLL_INTERVAL: Duration = Duration::from_millis(2);
/// Per-topic history kept for slow readers.
const RETENTION: usize = 4096;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Controller(#[from] ControllerError),
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub addr: SocketAddr,
    pub controller: ControllerConfig,
    pub ranges: GenerationRanges,
    pub seed: Seed,
    /// Where saved episodes go.
    pub data_dir: PathBuf,
    /// Wall-clock time between ticks; `dt` for real time.
    pub tick_interval: Duration,
}

/// A running gateway. Dropping it without `shutdown` leaves it running
/// until the process exits.
pub struct GatewayHandle {
    local_addr: SocketAddr,
    bus: Arc<Bus>,
    stop: Arc<AtomicBool>,
    stop_accept: Arc<Notify>,
    sim: Option<JoinHandle<()>>,
    accept: tokio::task::JoinHandle<()>,
}

impl GatewayHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn bus(&self) -> &Arc<Bus> {
        &self.bus
    }

    /// Wait until the accept loop ends (it only ends on shutdown).
    pub async fn wait(mut self) {
        let _ = (&mut self.accept).await;
    }

    pub async fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        self.stop_accept.notify_one();
        let _ = (&mut self.accept).await;
        if let Some(sim) = self.sim.take() {
            let _ = tokio::task::spawn_blocking(move || sim.join()).await;
        }
    }
}

/// Bind, generate the first scene and start the tick loop and accept loop.
pub async fn start(config: GatewayConfig) -> Result<GatewayHandle, GatewayError> {
    let listener = TcpListener::bind(config.addr)
        .await
        .map_err(|source| GatewayError::Bind {
            addr: config.addr,
            source,
        })?;
    let local_addr = listener.local_addr().map_err(|source| GatewayError::Bind {
        addr: config.addr,
        source,
    })?;
    let bus = Arc::new(Bus::with_retention(RETENTION));
    let controller = EpisodeController::new(
        config.controller.clone(),
        config.ranges,
        config.seed,
        Some(Arc::clone(&bus)),
    )?;
    let stop = Arc::new(AtomicBool::new(false));
    let (errors_tx, errors_rx) = mpsc::channel::<String>();

    let sim = {
        let bus = Arc::clone(&bus);
        let stop = Arc::clone(&stop);
        let data_dir = config.data_dir.clone();
        let interval = config.tick_interval;
        std::thread::Builder::new()
            .name("sim".into())
            .spawn(move || sim_loop(controller, bus, stop, errors_rx, data_dir, interval))
            .expect("spawn simulation thread")
    };

    let stop_accept = Arc::new(Notify::new());
    let accept = {
        let bus = Arc::clone(&bus);
        let stop = Arc::clone(&stop);
        let stop_accept = Arc::clone(&stop_accept);
        tokio::spawn(async move {
            let driving = Arc::new(AtomicBool::new(false));
            loop {
                tokio::select! {
                    _ = stop_accept.notified() => break,
                    accepted = listener.accept() => match accepted {
                        Ok((stream, peer)) => {
                            log::info!("client {peer} connected");
                            tokio::spawn(serve_client(
                                stream,
                                Arc::clone(&bus),
                                Arc::clone(&driving),
                                Arc::clone(&stop),
                                errors_tx.clone(),
                            ));
                        }
                        Err(e) => log::warn!("accept failed: {e}"),
                    },
                }
            }
        })
    };

    log::info!("gateway listening on ws://{local_addr}");
    Ok(GatewayHandle {
        local_addr,
        bus,
        stop,
        stop_accept,
        sim: Some(sim),
        accept,
    })
}

fn sim_loop(
    mut controller: EpisodeController,
    bus: Arc<Bus>,
    stop: Arc<AtomicBool>,
    errors: mpsc::Receiver<String>,
    data_dir: PathBuf,
    interval: Duration,
) {
    let mut joystick_cursor = bus.next_seq(JOYSTICK).unwrap_or(0);
    let mut control_cursor = bus.next_seq(CONTROL).unwrap_or(0);
    while !stop.load(Ordering::SeqCst) {
        while let Ok(message) = errors.try_recv() {
            publish_error(&bus, &controller, message);
        }
        for env in bus.poll(CONTROL, control_cursor).unwrap_or_default() {
            control_cursor = env.seq + 1;
            if let Payload::Control(c) = &env.payload {
                let result = match c.action {
                    ControlAction::Regenerate => controller.regenerate(
                        c.ranges.unwrap_or(*controller.ranges()),
                        c.seed.map(Seed).unwrap_or(controller.seed()),
                    ),
                    ControlAction::Save | ControlAction::Discard => {
                        let decision = if c.action == ControlAction::Save {
                            Decision::Save
                        } else {
                            Decision::Discard
                        };
                        controller
                            .finish(decision, &data_dir, &SystemClock)
                            .and_then(|path| {
                                if let Some(p) = path {
                                    log::info!("saved {}", p.display());
                                }
                                let next = Seed(controller.seed().0.wrapping_add(1));
                                controller.regenerate(*controller.ranges(), next)
                            })
                    }
                };
                if let Err(e) = result {
                    publish_error(&bus, &controller, e.to_string());
                }
            }
        }
        for env in bus.poll(JOYSTICK, joystick_cursor).unwrap_or_default() {
            joystick_cursor = env.seq + 1;
            if let Payload::Joystick(j) = env.payload {
                controller.apply_input(j);
            }
        }
        if controller.phase() == Phase::Running {
            if let Err(e) = controller.tick() {
                publish_error(&bus, &controller, e.to_string());
            }
        }
        std::thread::sleep(interval);
    }
}

fn publish_error(bus: &Bus, controller: &EpisodeController, message: String) {
    log::warn!("{message}");
    let stamp = bus
        .last_stamp(EPISODE)
        .ok()
        .flatten()
        .map_or(controller.stamp(), |s| s.max(controller.stamp()));
    let payload = Payload::Episode(EpisodeMsg {
        state: EpisodePhase::Error,
        frame_id: controller.frame_id(),
        message: Some(message),
    });
    if let Err(e) = bus.publish(EPISODE, payload, stamp) {
        log::error!("cannot publish error envelope: {e}");
    }
}

async fn serve_client(
    stream: TcpStream,
    bus: Arc<Bus>,
    driving: Arc<AtomicBool>,
    stop: Arc<AtomicBool>,
    errors: mpsc::Sender<String>,
) {
    let ws = match tokio_tungstenite::accept_async(stream).await {
        Ok(ws) => ws,
        Err(e) => {
            log::warn!("handshake failed: {e}");
            return;
        }
    };
    let (mut tx, mut rx) = ws.split();
    if driving.swap(true, Ordering::SeqCst) {
        let _ = tx
            .send(Message::Close(Some(CloseFrame {
                code: CloseCode::Policy,
                reason: "another client is already driving".into(),
            })))
            .await;
        return;
    }

    // Start each topic at its latest envelope so the client sees the
    // current scene immediately.
    let mut cursors: Vec<u64> = SERVER_TOPICS
        .iter()
        .map(|t| bus.next_seq(t).unwrap_or(0).saturating_sub(1))
        .collect();

    let reader = {
        let bus = Arc::clone(&bus);
        async move {
            while let Some(msg) = rx.next().await {
                let text = match msg {
                    Ok(Message::Text(t)) => t,
                    Ok(Message::Close(_)) | Err(_) => break,
                    Ok(_) => continue,
                };
                if let Err(message) = ingest(&bus, text.as_bytes()) {
                    let _ = errors.send(message);
                }
            }
        }
    };
    let writer = async {
        while !stop.load(Ordering::SeqCst) {
            let mut sent = false;
            for (topic, cursor) in SERVER_TOPICS.iter().zip(cursors.iter_mut()) {
                for env in bus.poll(topic, *cursor).unwrap_or_default() {
                    *cursor = env.seq + 1;
                    let bytes = match encode_envelope(&env) {
                        Ok(b) => b,
                        Err(e) => {
                            log::error!("cannot encode envelope: {e}");
                            continue;
                        }
                    };
                    let text = String::from_utf8(bytes).expect("canonical JSON is UTF-8");
                    if tx.send(Message::text(text)).await.is_err() {
                        return;
                    }
                    sent = true;
                }
            }
            if !sent {
                tokio::time::sleep(POLL_INTERVAL).await;
            }
        }
        let _ = tx.send(Message::Close(None)).await;
    };
    tokio::select! {
        _ = reader => {},
        _ = writer => {},
    }
    driving.store(false, Ordering::SeqCst);
    log::info!("client disconnected");
}

/// Validate a client envelope and publish it with a server stamp.
fn ingest(bus: &Bus, bytes: &[u8]) -> Result<(), String> {
    let env = decode_envelope(bytes).map_err(|e| format!("rejected client message: {e}"))?;
    if !CLIENT_TOPICS.contains(&env.topic.as_str()) {
        return Err(format!("rejected client message: clients may not publish on {:?}", env.topic));
    }
    let now = bus.last_stamp(ROBOT).ok().flatten().unwrap_or(0.0);
    let stamp = bus
        .last_stamp(&env.topic)
        .ok()
        .flatten()
        .map_or(now, |s| s.max(now));
    bus.publish(&env.topic, env.payload, stamp)
        .map(|_| ())
        .map_err(|e| format!("rejected client message: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ingest_rejects_bad_input() {
        let bus = Bus::new();
        assert!(ingest(&bus, b"{\"topic\":\"control\"").is_err());
        let bad_action = br#"{"topic":"control","seq":0,"stamp":0,"payload":{"action":"explode"}}"#;
        assert!(ingest(&bus, bad_action).is_err());
        let wrong_topic = br#"{"topic":"robot","seq":0,"stamp":0,"payload":{"x":0,"y":0,"angle":0}}"#;
        assert!(ingest(&bus, wrong_topic).unwrap_err().contains("robot"));
        let ok = br#"{"topic":"joystick","seq":9,"stamp":99,"payload":{"axis_id":0,"value":0.5}}"#;
        ingest(&bus, ok).unwrap();
        let env = bus.latest(JOYSTICK).unwrap().unwrap();
        assert_eq!((env.seq, env.stamp), (0, 0.0));
    }
}

//! A WebSocket teleoperation session: start the gateway, drive the robot to
//! the goal as a client would, save the episode.
//!
//! `cargo run --example gateway_server -- --serve` keeps the server up on
//! port 8765 for a browser client instead.

use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

use sonata::controller::ControllerConfig;
use sonata::gateway::{start, GatewayConfig};
use sonata::rng::Seed;
use sonata::scene::{GenerationRanges, RoomShapeChoice};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let serve = std::env::args().any(|a| a == "--serve");
    let dir = tempfile::tempdir()?;
    let mut controller = ControllerConfig {
        user_id: "guest".into(),
        ..ControllerConfig::default()
    };
    controller.scene.room_shape = RoomShapeChoice::Rectangle;
    let handle = start(GatewayConfig {
        addr: if serve { "127.0.0.1:8765" } else { "127.0.0.1:0" }.parse()?,
        controller,
        ranges: GenerationRanges::empty(),
        seed: Seed(1),
        data_dir: dir.path().to_path_buf(),
        tick_interval: Duration::from_millis(if serve { 100 } else { 2 }),
    })
    .await?;
    println!("gateway on ws://{}", handle.local_addr());
    if serve {
        handle.wait().await;
        return Ok(());
    }

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{}", handle.local_addr())).await?;
    let mut goal = None;
    let saved = loop {
        let Some(msg) = tokio::time::timeout(Duration::from_secs(10), ws.next()).await? else {
            anyhow::bail!("server closed the connection");
        };
        let Message::Text(text) = msg? else { continue };
        let env: Value = serde_json::from_str(&text)?;
        let p = &env["payload"];
        match env["topic"].as_str() {
            Some("goal") => goal = Some((p["x"].as_f64().unwrap(), p["y"].as_f64().unwrap())),
            Some("robot") => {
                let Some((gx, gy)) = goal else { continue };
                let (x, y, th) = (p["x"].as_f64().unwrap(), p["y"].as_f64().unwrap(), p["angle"].as_f64().unwrap());
                let (dx, dy) = (gx - x, gy - y);
                let d = dx.hypot(dy);
                // Joystick axes: 0 advance, 1 lateral, 2 rotation.
                for (axis, value) in [(0, (th.cos() * dx + th.sin() * dy) / d), (1, (th.cos() * dy - th.sin() * dx) / d)] {
                    let env = json!({"topic": "joystick", "seq": 0, "stamp": 0, "payload": {"axis_id": axis, "value": value}});
                    ws.send(Message::text(env.to_string())).await?;
                }
            }
            Some("episode") => match p["state"].as_str() {
                Some("reached") => {
                    println!("goal reached at frame {}", p["frame_id"]);
                    let env = json!({"topic": "control", "seq": 0, "stamp": 0, "payload": {"action": "save"}});
                    ws.send(Message::text(env.to_string())).await?;
                }
                Some("saved") => break p["message"].as_str().unwrap_or_default().to_string(),
                _ => {}
            },
            _ => {}
        }
    };
    println!("saved {saved}");
    ws.close(None).await?;
    handle.shutdown().await;
    Ok(())
}

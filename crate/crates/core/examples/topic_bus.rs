//! The publish/subscribe bus and its JSON wire format.

use std::sync::Arc;

use sonata::bus::topics::{JoystickMsg, RobotMsg, JOYSTICK, ROBOT};
use sonata::bus::{decode_envelope, encode_envelope, Bus, Payload};

fn main() -> anyhow::Result<()> {
    let bus = Arc::new(Bus::new());
    println!("topics: {:?}", bus.topics());

    let writers: Vec<_> = (0..3)
        .map(|w| {
            let bus = Arc::clone(&bus);
            std::thread::spawn(move || {
                for i in 0..5 {
                    let value = (w * 5 + i) as f64 / 20.0;
                    bus.publish(JOYSTICK, Payload::Joystick(JoystickMsg { axis_id: w, value }), 0.0)
                        .unwrap();
                }
            })
        })
        .collect();
    for w in writers {
        w.join().unwrap();
    }
    let seqs: Vec<u64> = bus.poll(JOYSTICK, 0)?.iter().map(|e| e.seq).collect();
    println!("joystick seqs: {seqs:?}");

    bus.publish(ROBOT, Payload::Robot(RobotMsg { x: 1.5, y: -0.25, angle: 3.0 }), 0.1)?;
    let env = bus.latest(ROBOT)?.unwrap();
    let bytes = encode_envelope(&env)?;
    println!("wire: {}", String::from_utf8_lossy(&bytes));
    assert_eq!(decode_envelope(&bytes)?, *env);

    // Stamps may not go back in time on a topic.
    if let Err(e) = bus.publish(ROBOT, Payload::Robot(RobotMsg { x: 0.0, y: 0.0, angle: 0.0 }), 0.05) {
        println!("rejected: {e}");
    }
    // Payloads are checked against the topic schema.
    if let Err(e) = bus.publish_value(ROBOT, serde_json::json!({"x": 1, "y": 2}), 0.2) {
        println!("rejected: {e}");
    }
    Ok(())
}

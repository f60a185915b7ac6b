//! Watching bus traffic from a WebSocket client, the way a browser
//! dashboard does.
//!
//! ```text
//! cargo run --example websocket_gateway
//! ```

use lumen::bus::gateway::gateway_serve;
use lumen::bus::{Broker, Connection, Kind};
use serde_json::json;
use tungstenite::Message;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let broker = Broker::with_defaults();
    let gateway = gateway_serve(broker.clone(), "127.0.0.1:0")?;
    let (mut ws, _) = tungstenite::connect(format!("ws://{}", gateway.local_addr()))?;

    ws.send(Message::text(json!({"op": "subscribe", "pattern": "lumen.brain.#", "req": 1}).to_string()))?;
    println!("<- {}", ws.read()?);

    let brain = broker.connect("brain");
    brain.publish_json("lumen.brain.state", Kind::Event, json!({"from": "Idle", "event": "face_detected", "to": "Engaging", "seq": 1}))?;
    println!("<- {}", ws.read()?);

    // The dashboard can inject speech the same way a recognizer would.
    let ears = broker.connect("ears");
    ears.subscribe_str("lumen.audio.speech")?;
    ws.send(Message::text(
        json!({"op": "publish", "envelope": {"key": "lumen.audio.speech", "kind": "event", "payload": {"text": "hello"}}})
            .to_string(),
    ))?;
    let heard = ears.recv_timeout(std::time::Duration::from_secs(2))?.expect("speech");
    println!("bus got speech {:?}", heard.payload["text"]);

    ws.send(Message::text("not json"))?;
    println!("<- {}", ws.read()?);

    ws.close(None)?;
    gateway.shutdown();
    Ok(())
}

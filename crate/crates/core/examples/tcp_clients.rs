//! Two processes' worth of clients talking through the TCP listener.
//!
//! Runs the broker on an ephemeral port, then a publisher and a subscriber
//! that speak newline-delimited JSON to it.
//!
//! ```text
//! cargo run --example tcp_clients
//! ```

use std::time::Duration;

use lumen::bus::{serve_tcp, Broker, Connection, Kind, TcpConnection};
use serde_json::json;

fn main() -> Result<(), lumen::bus::BusError> {
    let server = serve_tcp(Broker::with_defaults(), "127.0.0.1:0")?;
    let addr = server.local_addr();
    println!("broker on {addr}");

    let brain = TcpConnection::connect(addr, "brain")?;
    brain.subscribe_str("avatar.nao.reply")?;
    let robot = TcpConnection::connect(addr, "robot")?;
    robot.subscribe_str("avatar.nao.command")?;

    brain.publish_json(
        "avatar.nao.command",
        Kind::Command,
        json!({"id": "c1", "method": "say", "args": {"text": "Welcome!"}}),
    )?;

    let cmd = robot.recv_timeout(Duration::from_secs(2))?.expect("command");
    println!("robot received {}: {}", cmd.key, serde_json::Value::Object(cmd.payload.clone()));
    robot.publish_json("avatar.nao.reply", Kind::Reply, json!({"id": cmd.payload["id"], "ok": true, "detail": "said"}))?;

    let reply = brain.recv_timeout(Duration::from_secs(2))?.expect("reply");
    println!("brain received reply {} (envelope id {})", reply.payload["id"], reply.id);

    robot.close();
    brain.close();
    server.shutdown();
    Ok(())
}

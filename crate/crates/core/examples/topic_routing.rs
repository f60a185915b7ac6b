//! Wildcard bindings on an in-process broker.
//!
//! ```text
//! cargo run --example topic_routing
//! ```

use lumen::bus::{topic_match, BindingPattern, Broker, Connection, Kind, RoutingKey};
use serde_json::json;

fn main() -> Result<(), lumen::bus::BusError> {
    let patterns = ["avatar.nao.data.*", "avatar.#", "lumen.*.state", "avatar.nao.data.#.battery"];
    let keys = [
        "avatar.nao.data.camera",
        "avatar.nao.data.battery",
        "avatar.nao.command",
        "lumen.brain.state",
        "lumen.brain.event",
    ];

    print!("{:<28}", "");
    for p in patterns {
        print!("{p:<28}");
    }
    println!();
    for k in keys {
        let key = RoutingKey::parse(k)?;
        print!("{k:<28}");
        for p in patterns {
            let hit = topic_match(&BindingPattern::parse(p)?, &key);
            print!("{:<28}", if hit { "x" } else { "." });
        }
        println!();
    }

    let broker = Broker::with_defaults();
    let sensors = broker.connect("sensors");
    let dashboard = broker.connect("dashboard");
    dashboard.subscribe_str("avatar.nao.data.#")?;

    sensors.publish_json("avatar.nao.data.sonar", Kind::Data, json!({"seq": 0, "left": 2.55, "right": 2.55}))?;
    sensors.publish_json("avatar.nao.reply", Kind::Reply, json!({"id": "x", "ok": true}))?;

    for env in dashboard.drain()? {
        println!("\ndashboard got {} at ts={}:\n{}", env.key, env.ts, env.encode().trim_end());
    }

    // Outside the two namespaces a binding is refused.
    if let Err(e) = dashboard.subscribe_str("#") {
        println!("\nsubscribe(\"#\") -> {e}");
    }
    Ok(())
}

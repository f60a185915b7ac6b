//! The avatar's five sensor streams under a virtual clock.
//!
//! ```text
//! cargo run --example sensor_streams
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use lumen::avatar::{avatar_nodes, AvatarHandle, SensorRates, VisitorFace};
use lumen::bus::{Broker, Connection, Connector};
use lumen::runtime::Scheduler;
use lumen::VirtualClock;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clock = VirtualClock::new(0);
    let broker = Broker::new(Default::default(), Arc::new(clock.clone()));
    let tap = broker.connect("tap");
    tap.subscribe_str("avatar.nao.data.#")?;

    let handle = AvatarHandle::default();
    handle.with_avatar(|a| a.set_visitor_face(Some(VisitorFace { azimuth: -12.0, elevation: 4.0 })))?;
    let connector: Arc<dyn Connector> = Arc::new(broker.clone());
    let mut sched = Scheduler::new(clock);
    for node in avatar_nodes(connector, &handle, SensorRates::default())? {
        sched.add_boxed(node);
    }

    sched.run_until(2_500);
    handle.touch("head_front");
    sched.run_until(10_000);

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut last = BTreeMap::new();
    for env in tap.drain()? {
        *counts.entry(env.key.to_string()).or_default() += 1;
        last.insert(env.key.to_string(), serde_json::Value::Object(env.payload));
    }
    println!("10 s of virtual time:");
    for (key, n) in &counts {
        println!("  {key:<26} {n:>4} messages, last {}", last[key]);
    }
    Ok(())
}

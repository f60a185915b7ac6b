//! Driving the simulated humanoid directly, without a bus.
//!
//! ```text
//! cargo run --example avatar_commands
//! ```

use lumen::avatar::{Avatar, Command, Method, VisitorFace, HEAD_YAW};
use serde_json::json;

fn run_until_idle(avatar: &mut Avatar, label: &str) {
    let mut t = 0.0;
    while avatar.is_busy() {
        for r in avatar.step(0.02).expect("valid step") {
            println!("  [{label} t={t:5.2}s] reply {} ok={} {}", r.id, r.ok, r.detail);
        }
        t += 0.02;
    }
}

fn main() {
    let mut avatar = Avatar::default();
    println!("start: posture {}, battery {:.1}%", avatar.state().posture.label(), avatar.state().battery);

    let reply = avatar.execute_command(Command::new("s1", Method::Say, json!({"text": "Welcome to EE Days!"})));
    println!("say -> {reply:?}");

    avatar.execute_command(Command::new("w1", Method::MoveTo, json!({"x": 0.2, "y": 0.0, "theta": 0.0})));
    run_until_idle(&mut avatar, "moveTo");
    println!("torso at {:?}", avatar.state().torso);

    // Out-of-range targets are refused as a whole.
    let bad = avatar.execute_command(Command::new("a1", Method::SetAngles, json!({"HeadYaw": 30.0, "HeadPitch": 90.0})));
    println!("setAngles out of range -> {bad:?}");
    let ok = avatar.execute_command(Command::new("a2", Method::SetAngles, json!({"HeadYaw": 30.0})));
    println!("setAngles -> {ok:?}");
    for _ in 0..20 {
        avatar.step(0.01).unwrap();
    }
    println!("{HEAD_YAW} now {:.1} deg", avatar.state().head_yaw());

    avatar.set_visitor_face(Some(VisitorFace { azimuth: 10.0, elevation: -5.0 })).unwrap();
    println!("visitor seen at {:?}", avatar.observe_face());

    avatar.execute_command(Command::new("g1", Method::Goodbye, json!({})));
    avatar.execute_command(Command::new("d1", Method::Dancing, json!({})));
    // Rest cuts the wave short and drops the queued dance.
    for _ in 0..50 {
        avatar.step(0.02).unwrap();
    }
    println!("rest -> {:?}", avatar.execute_command(Command::new("r1", Method::Rest, json!({}))));
    for r in avatar.step(0.02).unwrap() {
        println!("  interrupted {} ok={} {}", r.id, r.ok, r.detail);
    }
    let refused = avatar.execute_command(Command::new("d2", Method::Dancing, json!({})));
    println!("resting={}, motion while resting -> {refused:?}", avatar.state().resting);
}

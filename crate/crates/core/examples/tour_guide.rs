//! The exhibition-guide brain on its own: feed it events and print what it
//! decides.
//!
//! ```text
//! cargo run --example tour_guide
//! ```

use lumen::avatar::CommandReply;
use lumen::behavior::{intent_parse, tour_fsm, Brain, Output};
use lumen::bus::{keys, Envelope, Kind, RoutingKey};
use serde_json::{json, Value};

fn envelope(key: &str, payload: Value) -> Envelope {
    Envelope::with_json(RoutingKey::parse(key).unwrap(), Kind::Data, payload)
}

fn show(now: u64, out: &[Output], pending: &mut Vec<String>) {
    for o in out {
        match o {
            Output::State(s) => println!("{now:>6} ms  {} --{}--> {}", s["from"], s["event"], s["to"]),
            Output::Command(c) => {
                println!("{now:>6} ms     {} {} {}", c.id, c.method.name(), Value::Object(c.args.clone()));
                pending.push(c.id.clone());
            }
            Output::Event(_) => {}
        }
    }
}

fn main() {
    let mut brain = Brain::new(tour_fsm()).expect("built-in machine is valid");
    let mut pending = Vec::new();
    show(0, &[brain.start_record()], &mut pending);

    let face = envelope(keys::CAMERA, json!({"seq": 0, "face": {"x": 170.0, "y": 110.0}}));
    for _ in 0..3 {
        let out = brain.on_envelope(&face, 1000);
        show(1000, &out, &mut pending);
    }
    let mut now = 1000;
    let answer_all = |brain: &mut Brain, now: u64, pending: &mut Vec<String>| {
        for id in std::mem::take(pending) {
            let r = CommandReply::ok(&id, "done");
            let out = brain.on_envelope(&envelope(keys::REPLY, Value::Object(r.to_payload())), now);
            show(now, &out, pending);
        }
    };
    answer_all(&mut brain, now, &mut pending);
    now += 4000;
    let out = brain.on_tick(now);
    show(now, &out, &mut pending);
    answer_all(&mut brain, now, &mut pending);

    for utterance in ["who are you?", "tell me about this exhibit", "can you dance", "bye"] {
        now += 2000;
        let intent = intent_parse(utterance);
        println!("\n{now:>6} ms  visitor: {utterance:?} ({} {:.2})", intent.name.name(), intent.confidence);
        let out = brain.on_envelope(&envelope(keys::AUDIO_SPEECH, json!({"text": utterance})), now);
        show(now, &out, &mut pending);
        now += 12_000;
        answer_all(&mut brain, now, &mut pending);
        answer_all(&mut brain, now, &mut pending);
    }
    println!("\nvisited {} of 15 states", brain.visited().len());
}

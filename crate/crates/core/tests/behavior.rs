use std::collections::BTreeSet;

use lumen::behavior::fsm::{fsm_validate, Violation};
use lumen::behavior::tour::STATES;
use lumen::behavior::{tour_fsm, Brain, FsmDefinition, Output};
use lumen::bus::{keys, Envelope, Kind, RoutingKey};
use lumen::harness::{canonical_tour, run_scenario_virtual, scenario_parse, transcript_diff, VirtualWorld, WorldConfig};
use lumen::Millis;
use proptest::prelude::*;
use serde_json::{json, Value};

const DUMPED: &str = include_str!("../data/tour_fsm.json");

fn env(key: &str, payload: Value) -> Envelope {
    let Value::Object(map) = payload else { panic!("object payload") };
    Envelope::new(RoutingKey::parse(key).unwrap(), Kind::Data, map)
}

fn camera(face: bool) -> Envelope {
    let face = if face { json!({"x": 150.0, "y": 110.0}) } else { Value::Null };
    env(keys::CAMERA, json!({"seq": 0, "face": face}))
}

fn commands(out: &[Output]) -> Vec<(String, String)> {
    out.iter()
        .filter_map(|o| match o {
            Output::Command(c) => Some((c.id.clone(), c.method.name().to_owned())),
            _ => None,
        })
        .collect()
}

#[test]
fn shipped_json_matches_the_built_in_machine() {
    let loaded: FsmDefinition = serde_json::from_str(DUMPED).unwrap();
    assert_eq!(loaded, tour_fsm());
    assert!(fsm_validate(&loaded).is_empty());
    let states: BTreeSet<&str> = loaded.states.iter().map(String::as_str).collect();
    assert_eq!(states, STATES.into_iter().collect());
}

#[test]
fn validation_reports_each_problem() {
    let mut def = tour_fsm();
    def.states.push("Orphan".into());
    let mut dup = def.transitions[0].clone();
    dup.to = "Shutdown".into();
    def.transitions.push(dup);
    def.initial = "Nowhere".into();
    let v = fsm_validate(&def);
    assert!(v.iter().any(|v| matches!(v, Violation::UnknownInitial(_))), "{v:?}");
    assert!(v.iter().any(|v| matches!(v, Violation::Nondeterministic { .. })), "{v:?}");
    assert!(Brain::new(def).is_err());

    let mut def = tour_fsm();
    def.states.push("Orphan".into());
    let v = fsm_validate(&def);
    assert!(v.iter().any(|v| matches!(v, Violation::Unreachable(s) if s == "Orphan")), "{v:?}");
}

#[test]
fn low_battery_sends_the_robot_to_rest() {
    let mut b = Brain::new(tour_fsm()).unwrap();
    for _ in 0..3 {
        b.on_envelope(&camera(true), 0);
    }
    assert_eq!(b.state(), "Greeting");
    let out = b.on_envelope(&env(keys::BATTERY, json!({"seq": 0, "percent": 14.9})), 100);
    assert_eq!(b.state(), "Resting");
    assert!(commands(&out).iter().any(|(_, m)| m == "rest"));
    // The latch does not refire on every sample.
    let again = b.on_envelope(&env(keys::BATTERY, json!({"seq": 1, "percent": 14.0})), 200);
    assert!(commands(&again).is_empty());
}

#[test]
fn unanswered_blocking_command_times_out_into_recovery() {
    let mut b = Brain::new(tour_fsm()).unwrap();
    for _ in 0..3 {
        b.on_envelope(&camera(true), 0);
    }
    b.on_tick(4000);
    assert_eq!(b.state(), "Listening");
    let out = b.on_envelope(&env(keys::AUDIO_SPEECH, json!({"text": "can you dance"})), 4100);
    assert_eq!(b.state(), "Dancing");
    assert!(b.is_blocked());
    assert!(commands(&out).iter().any(|(_, m)| m == "dancing"));
    // Dancing lasts 12 s; a healthy dance must not trip the watchdog.
    b.on_tick(4100 + 12_000 + 9_000);
    assert_eq!(b.state(), "Dancing");
    b.on_tick(4100 + 12_000 + 10_000);
    assert_eq!(b.state(), "Recovering");
    assert!(!b.is_blocked());
}

#[test]
fn canonical_tour_is_reproducible() {
    let first = run_scenario_virtual(canonical_tour(), &WorldConfig::default()).unwrap().render();
    for _ in 0..2 {
        let again = run_scenario_virtual(canonical_tour(), &WorldConfig::default()).unwrap().render();
        assert!(transcript_diff(&first, &again).is_equal());
    }
}

#[test]
fn full_demo_with_head_tracking_is_reproducible() {
    let runs: Vec<String> = (0..3)
        .map(|_| {
            let t = run_scenario_virtual(canonical_tour(), &WorldConfig::full()).unwrap();
            assert!(t.passed(), "{:?}", t.failures().collect::<Vec<_>>());
            assert_eq!(t.states_visited().len(), 15);
            t.render()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
}

#[test]
fn battery_drop_in_a_live_world_reaches_resting() {
    let steps = scenario_parse(
        "{\"t\":500,\"event\":\"set_face\",\"azimuth\":0,\"elevation\":0}\n\
         {\"t\":8000,\"event\":\"expect_state\",\"state\":\"Resting\",\"within\":6000}\n",
    )
    .unwrap();
    let mut world = VirtualWorld::new(&WorldConfig::default(), Some(steps)).unwrap();
    world.scheduler.run_until(2000);
    world.parts.avatar.with_avatar(|a| a.set_battery(10.0));
    let t = world.play(1000, 30_000);
    assert!(t.passed(), "{:?}", t.failures().collect::<Vec<_>>());
    assert!(t.commands().any(|(_, m)| m == "rest"));
}

#[derive(Debug, Clone)]
enum Input {
    Face(bool),
    Battery(f64),
    Speech(&'static str),
    Reply(bool),
    Tick(Millis),
}

fn input() -> impl Strategy<Value = Input> {
    prop_oneof![
        4 => any::<bool>().prop_map(Input::Face),
        1 => (5f64..100.0).prop_map(Input::Battery),
        3 => prop::sample::select(vec![
            "hello", "who are you", "tell me about this exhibit", "dance", "sing a song",
            "bye", "shut down", "mumble",
        ]).prop_map(Input::Speech),
        2 => any::<bool>().prop_map(Input::Reply),
        3 => (1u64..20_000).prop_map(Input::Tick),
    ]
}

/// Feeds `inputs` to a fresh brain and returns every output plus the states
/// it passed through.
fn drive(inputs: &[Input]) -> (Vec<Output>, Vec<String>) {
    let mut b = Brain::new(tour_fsm()).unwrap();
    let mut now = 0;
    let mut outputs = vec![b.start_record()];
    let mut states = vec![b.state().to_owned()];
    let mut outstanding: Vec<String> = Vec::new();
    for i in inputs {
        let out = match i {
            Input::Face(f) => b.on_envelope(&camera(*f), now),
            Input::Battery(p) => b.on_envelope(&env(keys::BATTERY, json!({"seq": 0, "percent": p})), now),
            Input::Speech(s) => b.on_envelope(&env(keys::AUDIO_SPEECH, json!({"text": s})), now),
            Input::Reply(ok) => match outstanding.pop() {
                Some(id) => b.on_envelope(&env(keys::REPLY, json!({"id": id, "ok": ok, "detail": ""})), now),
                None => Vec::new(),
            },
            Input::Tick(dt) => {
                now += dt;
                b.on_tick(now)
            }
        };
        outstanding.extend(commands(&out).into_iter().map(|(id, _)| id));
        states.push(b.state().to_owned());
        outputs.extend(out);
    }
    (outputs, states)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brain_is_deterministic_and_stays_in_known_states(inputs in prop::collection::vec(input(), 0..120)) {
        let (a, sa) = drive(&inputs);
        let (b, sb) = drive(&inputs);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&sa, &sb);
        for s in &sa {
            prop_assert!(STATES.contains(&s.as_str()), "{}", s);
        }
        // State records chain: each starts where the previous one ended.
        let mut prev: Option<String> = None;
        for o in &a {
            if let Output::State(rec) = o {
                if let Some(p) = &prev {
                    prop_assert_eq!(rec["from"].as_str(), Some(p.as_str()));
                }
                prev = rec["to"].as_str().map(str::to_owned);
            }
        }
    }

    #[test]
    fn shutdown_is_terminal(inputs in prop::collection::vec(input(), 0..60)) {
        let (_, states) = drive(&inputs);
        if let Some(pos) = states.iter().position(|s| s == "Shutdown") {
            prop_assert!(states[pos..].iter().all(|s| s == "Shutdown"));
        }
    }
}

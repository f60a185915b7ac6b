//! The shipped exhibition-guide behavior.

use serde_json::{json, Value};

use super::fsm::{Action, EventKind, FsmDefinition, Guard, Transition};
use crate::avatar::Method;

pub const STATES: [&str; 15] = [
    "Idle",
    "Engaging",
    "Greeting",
    "Listening",
    "Answering",
    "IntroducingSelf",
    "ExplainingExhibit",
    "GuidingWalk",
    "Dancing",
    "Singing",
    "Waving",
    "Farewell",
    "Resting",
    "Recovering",
    "Shutdown",
];

pub const GREET_MS: u64 = 4000;
pub const LISTEN_MS: u64 = 15000;
pub const RECOVER_MS: u64 = 5000;

pub const WELCOME: &str = "Welcome to EE Days!";
pub const HOW_CAN_I_HELP: &str = "How can I help you?";
pub const INTRO: &str = "I am Lumen, a social humanoid robot and your guide at EE Days.";
pub const EXHIBIT: &str =
    "This exhibit connects a humanoid robot, a message server and a fuzzy head controller. Let me show you around.";

/// The timer name used for command watchdogs.
pub const COMMAND_TIMEOUT: &str = "command_timeout";

fn cmd(method: Method, args: Value) -> Action {
    let Value::Object(args) = args else {
        unreachable!("literal args are objects")
    };
    Action::PublishCommand { method, args }
}

fn say(text: &str) -> Action {
    cmd(Method::Say, json!({"text": text}))
}

fn timer(name: &str, ms: u64) -> Action {
    Action::SetTimer {
        name: name.to_owned(),
        ms,
    }
}

fn guard(v: Value) -> Guard {
    serde_json::from_value(v).expect("guard literal is an object")
}

fn greeting() -> Vec<Action> {
    vec![
        say(WELCOME),
        cmd(Method::GoToPosture, json!({"name": "StandInit", "speed": 0.5})),
        timer("greet", GREET_MS),
    ]
}

fn listen(text: &str) -> Vec<Action> {
    vec![say(text), timer("listen", LISTEN_MS)]
}

fn recover() -> Vec<Action> {
    vec![say("Where did you go?"), timer("recover", RECOVER_MS)]
}

/// States that wait on a command before moving on; a failure or a watchdog
/// expiry sends them to Recovering.
const ACTION_STATES: [&str; 9] = [
    "Engaging",
    "Answering",
    "IntroducingSelf",
    "ExplainingExhibit",
    "GuidingWalk",
    "Dancing",
    "Singing",
    "Waving",
    "Farewell",
];

pub fn tour_fsm() -> FsmDefinition {
    let mut ts: Vec<Transition> = Vec::new();
    let mut add = |from: &str, event: EventKind, g: Value, actions: Vec<Action>, to: &str| {
        ts.push(Transition {
            from: from.to_owned(),
            event,
            guard: guard(g),
            actions,
            to: to.to_owned(),
        });
    };
    use EventKind::*;

    add("Idle", FaceDetected, json!({}), greeting(), "Greeting");
    add("Greeting", TimerElapsed, json!({"timer": "greet"}), listen(HOW_CAN_I_HELP), "Listening");
    add("Greeting", FaceLost, json!({}), recover(), "Recovering");
    add("Listening", FaceLost, json!({}), recover(), "Recovering");

    let speech: [(&str, Vec<Action>, &str); 7] = [
        ("ask_intro", vec![say(INTRO)], "IntroducingSelf"),
        ("ask_exhibit", vec![say(EXHIBIT)], "ExplainingExhibit"),
        ("greet", vec![say("Hello again! Ask me about myself or the exhibits.")], "Answering"),
        ("unknown", vec![say("Sorry, I did not catch that. Could you repeat?")], "Answering"),
        ("request_dance", vec![cmd(Method::Dancing, json!({}))], "Dancing"),
        ("request_sing", vec![cmd(Method::Singing, json!({}))], "Singing"),
        (
            "goodbye",
            vec![say("Thank you for visiting EE Days. Goodbye!"), cmd(Method::Goodbye, json!({}))],
            "Farewell",
        ),
    ];
    for (intent, actions, to) in speech {
        add("Listening", Speech, json!({"intent": intent}), actions, to);
    }
    add(
        "Listening",
        TimerElapsed,
        json!({"timer": "listen"}),
        vec![say("Is anyone there? Come and say hello!"), cmd(Method::Goodbye, json!({}))],
        "Waving",
    );

    let back_to_listening = [
        ("IntroducingSelf", "What else would you like to know?"),
        ("GuidingWalk", "Here we are. What else would you like to know?"),
        ("Dancing", "Did you enjoy my dance?"),
        ("Singing", "Thank you for listening!"),
        ("Waving", HOW_CAN_I_HELP),
    ];
    for (from, text) in back_to_listening {
        add(from, CommandDone, json!({"ok": true}), listen(text), "Listening");
    }
    add("Answering", CommandDone, json!({"ok": true}), vec![timer("listen", LISTEN_MS)], "Listening");
    add(
        "ExplainingExhibit",
        CommandDone,
        json!({"ok": true}),
        vec![say("Please follow me."), cmd(Method::MoveTo, json!({"x": 0.2, "y": 0.0, "theta": 0.0}))],
        "GuidingWalk",
    );
    add("Farewell", CommandDone, json!({"ok": true}), vec![cmd(Method::Rest, json!({}))], "Resting");

    add("Recovering", FaceDetected, json!({}), listen("There you are! How can I help you?"), "Listening");
    add(
        "Recovering",
        TimerElapsed,
        json!({"timer": "recover", "face_present": true}),
        listen(HOW_CAN_I_HELP),
        "Listening",
    );
    add(
        "Recovering",
        TimerElapsed,
        json!({"timer": "recover", "face_present": false}),
        vec![cmd(Method::GoToPosture, json!({"name": "StandInit", "speed": 1.0}))],
        "Idle",
    );

    add("Resting", FaceDetected, json!({"battery_low": false}), vec![cmd(Method::WakeUp, json!({}))], "Engaging");
    add("Engaging", CommandDone, json!({"ok": true}), greeting(), "Greeting");

    for from in ACTION_STATES {
        add(from, CommandDone, json!({"ok": false}), recover(), "Recovering");
    }
    for from in STATES {
        if !["Idle", "Recovering", "Resting", "Shutdown"].contains(&from) {
            add(from, TimerElapsed, json!({"timer": COMMAND_TIMEOUT}), recover(), "Recovering");
        }
    }
    for from in STATES {
        if !["Resting", "Shutdown"].contains(&from) {
            add(
                from,
                BatteryLow,
                json!({}),
                vec![say("My battery is low. I need to rest."), cmd(Method::Rest, json!({}))],
                "Resting",
            );
        }
    }
    for from in STATES {
        if from != "Shutdown" {
            add(
                from,
                ShutdownRequest,
                json!({}),
                vec![cmd(Method::Rest, json!({})), Action::PublishState],
                "Shutdown",
            );
        }
    }

    FsmDefinition {
        states: STATES.iter().map(|s| (*s).to_owned()).collect(),
        initial: "Idle".to_owned(),
        transitions: ts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::fsm::{fsm_dispatch, fsm_validate, BehaviorEvent};

    #[test]
    fn shipped_machine_is_valid() {
        let def = tour_fsm();
        assert_eq!(def.states.len(), 15);
        assert_eq!(fsm_validate(&def), vec![]);
    }

    #[test]
    fn idle_face_detected_greets() {
        let def = tour_fsm();
        let t = fsm_dispatch(&def, "Idle", &BehaviorEvent::new(EventKind::FaceDetected)).unwrap();
        assert_eq!(t.to, "Greeting");
        assert_eq!(t.actions[0], say(WELCOME));
        assert_eq!(t.actions[1], cmd(Method::GoToPosture, json!({"name": "StandInit", "speed": 0.5})));
        assert_eq!(t.actions[2], timer("greet", 4000));
    }

    #[test]
    fn greet_timer_starts_listening() {
        let def = tour_fsm();
        let ev = BehaviorEvent::new(EventKind::TimerElapsed).with("timer", "greet");
        let t = fsm_dispatch(&def, "Greeting", &ev).unwrap();
        assert_eq!(t.to, "Listening");
        assert_eq!(t.actions[0], say("How can I help you?"));
    }

    #[test]
    fn dance_request() {
        let def = tour_fsm();
        let ev = BehaviorEvent::new(EventKind::Speech).with("intent", "request_dance");
        let t = fsm_dispatch(&def, "Listening", &ev).unwrap();
        assert_eq!(t.to, "Dancing");
        assert_eq!(t.actions, vec![cmd(Method::Dancing, json!({}))]);
    }

    #[test]
    fn battery_low_rests_from_every_active_state() {
        let def = tour_fsm();
        for s in STATES.iter().filter(|s| !["Resting", "Shutdown"].contains(s)) {
            let t = fsm_dispatch(&def, s, &BehaviorEvent::new(EventKind::BatteryLow)).unwrap();
            assert_eq!(t.to, "Resting");
            assert!(t.actions.contains(&cmd(Method::Rest, json!({}))));
        }
    }

    #[test]
    fn json_round_trip() {
        let def = tour_fsm();
        let text = serde_json::to_string_pretty(&def).unwrap();
        let back: FsmDefinition = serde_json::from_str(&text).unwrap();
        assert_eq!(back, def);
    }
}

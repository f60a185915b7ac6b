//! The orchestrator: turns bus traffic into FSM events and FSM actions into
//! bus traffic.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde_json::{json, Value};

use super::fsm::{fsm_dispatch, fsm_validate, Action, BehaviorEvent, EventKind, FsmDefinition, Violation};
use super::intent::{intent_parse, is_shutdown_request};
use super::tour::COMMAND_TIMEOUT;
use crate::avatar::{Command, CommandReply, Method};
use crate::bus::{keys, BusError, Connector, Envelope, Kind};
use crate::clock::Millis;
use crate::runtime::{BusLink, Node};

/// Consecutive face frames before `face_detected`.
pub const FACE_ON_FRAMES: u32 = 3;
/// Consecutive empty frames before `face_lost`.
pub const FACE_OFF_FRAMES: u32 = 10;
pub const BATTERY_LOW_PERCENT: f64 = 15.0;
/// Grace period on top of a command's nominal duration.
pub const WATCHDOG_MS: Millis = 10_000;

/// Something the brain wants published.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Command(Command),
    /// A `lumen.brain.state` record.
    State(Value),
    /// A `lumen.brain.event` record.
    Event(Value),
}

fn is_blocking(method: Method) -> bool {
    matches!(method, Method::Dancing | Method::Singing | Method::Goodbye | Method::MoveTo)
}

#[derive(Debug, Clone)]
struct Pending {
    ids: BTreeSet<String>,
    all_ok: bool,
    blocking: bool,
}

/// FSM state plus everything needed to derive events: face debouncing,
/// battery latch, timers and outstanding commands. Free of I/O.
#[derive(Debug, Clone)]
pub struct Brain {
    def: FsmDefinition,
    state: String,
    seq: u64,
    timers: BTreeMap<String, Millis>,
    watchdog: Option<Millis>,
    pending: Option<Pending>,
    face_present: bool,
    face_streak: u32,
    battery_low: bool,
    next_cmd: u64,
    visited: BTreeSet<String>,
}

impl Brain {
    pub fn new(def: FsmDefinition) -> Result<Self, Vec<Violation>> {
        let violations = fsm_validate(&def);
        if !violations.is_empty() {
            return Err(violations);
        }
        let state = def.initial.clone();
        Ok(Self {
            visited: BTreeSet::from([state.clone()]),
            def,
            state,
            seq: 0,
            timers: BTreeMap::new(),
            watchdog: None,
            pending: None,
            face_present: false,
            face_streak: 0,
            battery_low: false,
            next_cmd: 0,
        })
    }

    pub fn state(&self) -> &str {
        &self.state
    }

    pub fn definition(&self) -> &FsmDefinition {
        &self.def
    }

    pub fn visited(&self) -> &BTreeSet<String> {
        &self.visited
    }

    pub fn face_present(&self) -> bool {
        self.face_present
    }

    /// Whether a blocking command is outstanding.
    pub fn is_blocked(&self) -> bool {
        self.pending.as_ref().is_some_and(|p| p.blocking)
    }

    /// The record announcing the initial state.
    pub fn start_record(&self) -> Output {
        Output::State(json!({"from": null, "event": "start", "to": self.def.initial, "seq": 0}))
    }

    /// Fires every timer due at or before `now`, earliest first.
    pub fn on_tick(&mut self, now: Millis) -> Vec<Output> {
        let mut out = Vec::new();
        loop {
            let named = self
                .timers
                .iter()
                .map(|(n, &due)| (due, n.as_str()))
                .min()
                .filter(|(due, _)| *due <= now)
                .map(|(due, n)| (due, n.to_owned()));
            let watchdog = self.watchdog.filter(|&due| due <= now);
            let fire = match (named, watchdog) {
                (Some((due, name)), Some(w)) if due <= w => Some(name),
                (_, Some(_)) => {
                    self.watchdog = None;
                    self.pending = None;
                    Some(COMMAND_TIMEOUT.to_owned())
                }
                (Some((_, name)), None) => Some(name),
                (None, None) => None,
            };
            let Some(name) = fire else { break };
            self.timers.remove(&name);
            let ev = BehaviorEvent::new(EventKind::TimerElapsed).with("timer", name);
            self.handle_event(ev, now, &mut out);
        }
        out
    }

    /// Derives events from one bus envelope and processes them.
    pub fn on_envelope(&mut self, env: &Envelope, now: Millis) -> Vec<Output> {
        let mut out = Vec::new();
        if let Some(ev) = self.derive_event(env) {
            self.handle_event(ev, now, &mut out);
        }
        out
    }

    fn derive_event(&mut self, env: &Envelope) -> Option<BehaviorEvent> {
        let p = &env.payload;
        match env.key.to_string().as_str() {
            keys::CAMERA => {
                let seen = p.get("face").is_some_and(|f| !f.is_null());
                if seen == self.face_present {
                    self.face_streak = 0;
                    return None;
                }
                self.face_streak += 1;
                let needed = if seen { FACE_ON_FRAMES } else { FACE_OFF_FRAMES };
                if self.face_streak < needed {
                    return None;
                }
                self.face_streak = 0;
                self.face_present = seen;
                Some(BehaviorEvent::new(if seen {
                    EventKind::FaceDetected
                } else {
                    EventKind::FaceLost
                }))
            }
            keys::AUDIO_SPEECH => {
                let text = p.get("text").and_then(Value::as_str)?;
                if is_shutdown_request(text) {
                    return Some(BehaviorEvent::new(EventKind::ShutdownRequest).with("text", text));
                }
                let intent = intent_parse(text);
                Some(
                    BehaviorEvent::new(EventKind::Speech)
                        .with("text", text)
                        .with("intent", intent.name.name())
                        .with("confidence", intent.confidence),
                )
            }
            keys::REPLY => {
                let reply = CommandReply::from_payload(p)?;
                let pending = self.pending.as_mut()?;
                if !pending.ids.remove(&reply.id) {
                    return None;
                }
                pending.all_ok &= reply.ok;
                if !pending.ids.is_empty() {
                    return None;
                }
                let ok = pending.all_ok;
                self.pending = None;
                self.watchdog = None;
                Some(BehaviorEvent::new(EventKind::CommandDone).with("ok", ok))
            }
            keys::BATTERY => {
                let percent = p.get("percent").and_then(Value::as_f64)?;
                let low = percent < BATTERY_LOW_PERCENT;
                let rising = low && !self.battery_low;
                self.battery_low = low;
                rising.then(|| BehaviorEvent::new(EventKind::BatteryLow).with("percent", percent))
            }
            _ => None,
        }
    }

    /// Runs one event through the machine.
    pub fn handle_event(&mut self, mut ev: BehaviorEvent, now: Millis, out: &mut Vec<Output>) {
        ev.data.insert("face_present".into(), self.face_present.into());
        ev.data.insert("battery_low".into(), self.battery_low.into());
        let priority = match ev.kind {
            EventKind::BatteryLow | EventKind::ShutdownRequest | EventKind::CommandDone => true,
            EventKind::TimerElapsed => ev.data.get("timer").and_then(Value::as_str) == Some(COMMAND_TIMEOUT),
            _ => false,
        };
        if self.is_blocked() && !priority {
            log::debug!("{}: ignoring {} while a blocking command runs", self.state, ev.kind);
            return;
        }
        let Some(t) = fsm_dispatch(&self.def, &self.state, &ev) else {
            log::debug!("{}: no transition on {}", self.state, ev.kind);
            return;
        };
        let (to, actions) = (t.to.clone(), t.actions.clone());
        log::info!("{} --{}--> {}", self.state, ev.kind, to);
        self.timers.clear();
        self.watchdog = None;
        self.pending = None;
        self.seq += 1;
        out.push(Output::State(json!({
            "from": self.state,
            "event": ev.kind.name(),
            "to": to,
            "seq": self.seq,
        })));
        self.visited.insert(to.clone());
        self.state = to;

        let mut pending = Pending {
            ids: BTreeSet::new(),
            all_ok: true,
            blocking: false,
        };
        let mut longest = 0.0f64;
        for action in actions {
            match action {
                Action::PublishCommand { method, args } => {
                    self.next_cmd += 1;
                    let cmd = Command {
                        id: format!("fsm-{}", self.next_cmd),
                        method,
                        args,
                    };
                    longest = longest.max(cmd.nominal_duration());
                    pending.blocking |= is_blocking(method);
                    pending.ids.insert(cmd.id.clone());
                    out.push(Output::Command(cmd));
                }
                Action::SetTimer { name, ms } => {
                    self.timers.insert(name, now + ms);
                }
                Action::CancelTimer { name } => {
                    self.timers.remove(&name);
                }
                Action::PublishState => out.push(Output::Event(json!({
                    "type": "state",
                    "state": self.state,
                    "seq": self.seq,
                }))),
            }
        }
        if !pending.ids.is_empty() {
            self.watchdog = Some(now + WATCHDOG_MS + (longest * 1000.0).ceil() as Millis);
            self.pending = Some(pending);
        }
    }
}

/// [`Brain`] on the bus.
pub struct BrainNode {
    link: BusLink,
    brain: Brain,
    started: bool,
}

impl BrainNode {
    pub fn new(connector: Arc<dyn Connector>, brain: Brain) -> Result<Self, BusError> {
        let link = BusLink::open(
            connector,
            "brain",
            &[keys::CAMERA, keys::BATTERY, keys::REPLY, keys::AUDIO_SPEECH],
        )?;
        Ok(Self {
            link,
            brain,
            started: false,
        })
    }

    pub fn brain(&self) -> &Brain {
        &self.brain
    }

    fn emit(&mut self, outputs: Vec<Output>) {
        for o in outputs {
            match o {
                Output::Command(cmd) => {
                    self.link.send(keys::COMMAND, Kind::Command, Value::Object(cmd.to_payload()));
                }
                Output::State(v) => {
                    self.link.send(keys::BRAIN_STATE, Kind::Event, v);
                }
                Output::Event(v) => {
                    self.link.send(keys::BRAIN_EVENT, Kind::Event, v);
                }
            }
        }
    }
}

impl Node for BrainNode {
    fn name(&self) -> &str {
        "brain"
    }

    fn poll(&mut self, now: Millis) -> bool {
        let mut progress = false;
        if !self.started {
            self.started = true;
            let start = self.brain.start_record();
            self.emit(vec![start]);
            progress = true;
        }
        let fired = self.brain.on_tick(now);
        progress |= !fired.is_empty();
        self.emit(fired);
        for env in self.link.drain() {
            progress = true;
            let out = self.brain.on_envelope(&env, now);
            self.emit(out);
        }
        progress
    }
}

//! Table-driven finite state machine with guarded transitions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::avatar::Method;
use crate::bus::Payload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FaceDetected,
    FaceLost,
    Speech,
    TimerElapsed,
    CommandDone,
    BatteryLow,
    ShutdownRequest,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        EventKind::FaceDetected,
        EventKind::FaceLost,
        EventKind::Speech,
        EventKind::TimerElapsed,
        EventKind::CommandDone,
        EventKind::BatteryLow,
        EventKind::ShutdownRequest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::FaceDetected => "face_detected",
            EventKind::FaceLost => "face_lost",
            EventKind::Speech => "speech",
            EventKind::TimerElapsed => "timer_elapsed",
            EventKind::CommandDone => "command_done",
            EventKind::BatteryLow => "battery_low",
            EventKind::ShutdownRequest => "shutdown_request",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorEvent {
    pub kind: EventKind,
    #[serde(default)]
    pub data: Payload,
}

impl BehaviorEvent {
    pub fn new(kind: EventKind) -> Self {
        Self {
            kind,
            data: Payload::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.data.insert(key.to_owned(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    PublishCommand {
        method: Method,
        #[serde(default)]
        args: Payload,
    },
    SetTimer {
        name: String,
        ms: u64,
    },
    CancelTimer {
        name: String,
    },
    PublishState,
}

/// A guard is a conjunction of equalities on event data fields; an empty
/// guard always holds.
pub type Guard = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub event: EventKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub guard: Guard,
    #[serde(default)]
    pub actions: Vec<Action>,
    pub to: String,
}

impl Transition {
    pub fn accepts(&self, data: &Payload) -> bool {
        self.guard.iter().all(|(k, v)| data.get(k) == Some(v))
    }

    /// Whether some event could satisfy both guards.
    fn overlaps(&self, other: &Transition) -> bool {
        self.guard
            .iter()
            .all(|(k, v)| other.guard.get(k).is_none_or(|w| w == v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsmDefinition {
    pub states: Vec<String>,
    pub initial: String,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateState(String),
    UnknownInitial(String),
    UnknownEndpoint { transition: usize, state: String },
    Nondeterministic { from: String, event: EventKind, first: usize, second: usize },
    Unreachable(String),
    DuplicateTimer { transition: usize, timer: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateState(s) => write!(f, "state {s} is listed twice"),
            Violation::UnknownInitial(s) => write!(f, "initial state {s} is not a state"),
            Violation::UnknownEndpoint { transition, state } => {
                write!(f, "transition #{transition} names unknown state {state}")
            }
            Violation::Nondeterministic {
                from,
                event,
                first,
                second,
            } => write!(f, "transitions #{first} and #{second} both fire on ({from}, {event})"),
            Violation::Unreachable(s) => write!(f, "state {s} is unreachable from the initial state"),
            Violation::DuplicateTimer { transition, timer } => {
                write!(f, "transition #{transition} sets timer {timer} more than once")
            }
        }
    }
}

/// Checks endpoints, determinism and reachability. An empty result means
/// the definition is usable.
pub fn fsm_validate(def: &FsmDefinition) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut states = BTreeSet::new();
    for s in &def.states {
        if !states.insert(s.as_str()) {
            out.push(Violation::DuplicateState(s.clone()));
        }
    }
    if !states.contains(def.initial.as_str()) {
        out.push(Violation::UnknownInitial(def.initial.clone()));
    }
    for (i, t) in def.transitions.iter().enumerate() {
        for end in [&t.from, &t.to] {
            if !states.contains(end.as_str()) {
                out.push(Violation::UnknownEndpoint {
                    transition: i,
                    state: end.clone(),
                });
            }
        }
        let mut timers = BTreeSet::new();
        for a in &t.actions {
            if let Action::SetTimer { name, .. } = a {
                if !timers.insert(name) {
                    out.push(Violation::DuplicateTimer {
                        transition: i,
                        timer: name.clone(),
                    });
                }
            }
        }
    }

    let mut groups: BTreeMap<(&str, EventKind), Vec<usize>> = BTreeMap::new();
    for (i, t) in def.transitions.iter().enumerate() {
        groups.entry((t.from.as_str(), t.event)).or_default().push(i);
    }
    for ((from, event), idx) in &groups {
        for (n, &a) in idx.iter().enumerate() {
            for &b in &idx[n + 1..] {
                if def.transitions[a].overlaps(&def.transitions[b]) {
                    out.push(Violation::Nondeterministic {
                        from: (*from).to_owned(),
                        event: *event,
                        first: a,
                        second: b,
                    });
                }
            }
        }
    }

    if states.contains(def.initial.as_str()) {
        let mut seen = BTreeSet::from([def.initial.as_str()]);
        let mut queue = VecDeque::from([def.initial.as_str()]);
        while let Some(s) = queue.pop_front() {
            for t in def.transitions.iter().filter(|t| t.from == s) {
                if seen.insert(t.to.as_str()) {
                    queue.push_back(t.to.as_str());
                }
            }
        }
        for s in &def.states {
            if !seen.contains(s.as_str()) {
                out.push(Violation::Unreachable(s.clone()));
            }
        }
    }
    out
}

/// Finds the transition taken from `state` on `event`, if any.
pub fn fsm_dispatch<'a>(def: &'a FsmDefinition, state: &str, event: &BehaviorEvent) -> Option<&'a Transition> {
    def.transitions
        .iter()
        .find(|t| t.from == state && t.event == event.kind && t.accepts(&event.data))
}

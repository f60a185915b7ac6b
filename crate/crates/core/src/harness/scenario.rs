//! Scripted scenarios: JSON-lines files of timed stimuli and expectations,
//! and the node that plays them onto the bus while recording a transcript.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::transcript::{Entry, ExpectationResult, Transcript};
use crate::avatar::node::face_payload;
use crate::avatar::VisitorFace;
use crate::bus::{keys, BusError, Connector, Envelope, Kind};
use crate::clock::Millis;
use crate::runtime::{BusLink, Node};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum StepEvent {
    SetFace { azimuth: f64, elevation: f64 },
    ClearFace,
    Utter { text: String },
    ExpectState { state: String, within: Millis },
}

impl StepEvent {
    pub const KINDS: [&'static str; 4] = ["set_face", "clear_face", "utter", "expect_state"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStep {
    /// Milliseconds from scenario start.
    pub t: Millis,
    #[serde(flatten)]
    pub event: StepEvent,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unknown event kind {kind:?}")]
    UnknownEvent { line: usize, kind: String },
    #[error("line {line}: t={t} comes before the previous step at t={prev}")]
    OutOfOrder { line: usize, t: Millis, prev: Millis },
    #[error("line {line}: {reason}")]
    Invalid { line: usize, reason: String },
}

/// Parses scenario text. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub fn scenario_parse(text: &str) -> Result<Vec<ScenarioStep>, ScenarioError> {
    let mut steps: Vec<ScenarioStep> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| ScenarioError::Malformed { line, reason };
        let value: Value = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
        let kind = value
            .get("event")
            .and_then(Value::as_str)
            .ok_or_else(|| malformed("missing string field `event`".into()))?;
        if !StepEvent::KINDS.contains(&kind) {
            return Err(ScenarioError::UnknownEvent {
                line,
                kind: kind.to_owned(),
            });
        }
        let step: ScenarioStep = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
        if let Some(prev) = steps.last() {
            if step.t < prev.t {
                return Err(ScenarioError::OutOfOrder {
                    line,
                    t: step.t,
                    prev: prev.t,
                });
            }
        }
        let invalid = |reason: &str| ScenarioError::Invalid {
            line,
            reason: reason.to_owned(),
        };
        match &step.event {
            StepEvent::ExpectState { within: 0, .. } => return Err(invalid("expect_state needs within > 0")),
            StepEvent::SetFace { azimuth, elevation }
                if !(-180.0..=180.0).contains(azimuth) || !(-90.0..=90.0).contains(elevation) =>
            {
                return Err(invalid("face direction out of range"))
            }
            _ => {}
        }
        steps.push(step);
    }
    Ok(steps)
}

pub fn scenario_load(path: impl AsRef<Path>) -> Result<Vec<ScenarioStep>, ScenarioError> {
    scenario_parse(&std::fs::read_to_string(path)?)
}

/// The tour scenario shipped with the crate.
pub const CANONICAL_TOUR: &str = include_str!("../../data/canonical_tour.jsonl");

pub fn canonical_tour() -> Vec<ScenarioStep> {
    scenario_parse(CANONICAL_TOUR).expect("shipped scenario parses")
}

struct PendingExpectation {
    step_t: Millis,
    state: String,
    within: Millis,
    deadline: Millis,
}

/// Injects scenario stimuli at their scheduled times and records
/// `lumen.brain.state` and `avatar.nao.command` traffic.
pub struct ScenarioPlayer {
    link: BusLink,
    steps: VecDeque<ScenarioStep>,
    start: Option<Millis>,
    current: Option<String>,
    pending: Vec<PendingExpectation>,
    transcript: Transcript,
}

impl ScenarioPlayer {
    pub fn new(connector: Arc<dyn Connector>, steps: Vec<ScenarioStep>) -> Result<Self, BusError> {
        let link = BusLink::open(connector, "scenario", &[keys::BRAIN_STATE, keys::COMMAND])?;
        Ok(Self {
            link,
            steps: steps.into(),
            start: None,
            current: None,
            pending: Vec::new(),
            transcript: Transcript::default(),
        })
    }

    /// All steps injected and every expectation settled.
    pub fn is_done(&self) -> bool {
        self.steps.is_empty() && self.pending.is_empty()
    }

    pub fn current_state(&self) -> Option<&str> {
        self.current.as_deref()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    fn record(&mut self, env: &Envelope) {
        let Some(entry) = Entry::from_envelope(env) else {
            log::warn!("unrecognised {} payload", env.key);
            return;
        };
        if let Entry::State { to, .. } = &entry {
            self.current = Some(to.clone());
            let to = to.clone();
            let results = &mut self.transcript.expectations;
            self.pending.retain(|p| {
                if p.state != to {
                    return true;
                }
                results.push(ExpectationResult {
                    t: p.step_t,
                    state: p.state.clone(),
                    within: p.within,
                    passed: true,
                    observed: Some(to.clone()),
                });
                false
            });
        }
        self.transcript.entries.push(entry);
    }

    fn inject(&mut self, step: ScenarioStep, now: Millis) {
        match step.event {
            StepEvent::SetFace { azimuth, elevation } => {
                let face = VisitorFace { azimuth, elevation };
                self.link.send(keys::VISUAL_FACE, Kind::Event, face_payload(Some(face)));
            }
            StepEvent::ClearFace => {
                self.link.send(keys::VISUAL_FACE, Kind::Event, face_payload(None));
            }
            StepEvent::Utter { text } => {
                self.link.send(keys::AUDIO_SPEECH, Kind::Event, json!({ "text": text }));
            }
            StepEvent::ExpectState { state, within } => {
                if self.current.as_deref() == Some(state.as_str()) {
                    self.transcript.expectations.push(ExpectationResult {
                        t: step.t,
                        state,
                        within,
                        passed: true,
                        observed: self.current.clone(),
                    });
                } else {
                    self.pending.push(PendingExpectation {
                        step_t: step.t,
                        state,
                        within,
                        deadline: now + within,
                    });
                }
            }
        }
    }
}

impl Node for ScenarioPlayer {
    fn name(&self) -> &str {
        "scenario"
    }

    fn poll(&mut self, now: Millis) -> bool {
        let start = *self.start.get_or_insert(now);
        let current = self.current.clone();
        let results = &mut self.transcript.expectations;
        self.pending.retain(|p| {
            if now <= p.deadline {
                return true;
            }
            results.push(ExpectationResult {
                t: p.step_t,
                state: p.state.clone(),
                within: p.within,
                passed: false,
                observed: current.clone(),
            });
            false
        });
        let mut progress = false;
        for env in self.link.drain() {
            progress = true;
            self.record(&env);
        }
        while self.steps.front().is_some_and(|s| start + s.t <= now) {
            let step = self.steps.pop_front().unwrap();
            self.inject(step, now);
            progress = true;
        }
        progress
    }
}

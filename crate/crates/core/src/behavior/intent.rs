//! Keyword intent matcher standing in for a speech-understanding module.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentName {
    Greet,
    AskIntro,
    AskExhibit,
    RequestDance,
    RequestSing,
    Goodbye,
    Unknown,
}

impl IntentName {
    pub const ALL: [IntentName; 7] = [
        IntentName::Greet,
        IntentName::AskIntro,
        IntentName::AskExhibit,
        IntentName::RequestDance,
        IntentName::RequestSing,
        IntentName::Goodbye,
        IntentName::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntentName::Greet => "greet",
            IntentName::AskIntro => "ask_intro",
            IntentName::AskExhibit => "ask_exhibit",
            IntentName::RequestDance => "request_dance",
            IntentName::RequestSing => "request_sing",
            IntentName::Goodbye => "goodbye",
            IntentName::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intent {
    pub name: IntentName,
    pub confidence: f64,
}

/// First matching rule wins; matching is case-insensitive.
pub fn intent_parse(utterance: &str) -> Intent {
    let text = utterance.to_lowercase();
    let has = |k: &str| text.contains(k);
    let word = |w: &str| text.split(|c: char| !c.is_alphanumeric()).any(|t| t == w);
    let name = if has("dance") {
        IntentName::RequestDance
    } else if has("sing") {
        IntentName::RequestSing
    } else if has("who are you") || has("introduce") {
        IntentName::AskIntro
    } else if has("exhibit") || has("project") {
        IntentName::AskExhibit
    } else if has("bye") {
        IntentName::Goodbye
    } else if has("hello") || word("hi") {
        IntentName::Greet
    } else {
        IntentName::Unknown
    };
    let confidence = if name == IntentName::Unknown { 0.0 } else { 1.0 };
    Intent { name, confidence }
}

/// Spoken requests that stop the robot outright.
pub fn is_shutdown_request(utterance: &str) -> bool {
    let text = utterance.to_lowercase();
    text.contains("shutdown") || text.contains("shut down")
}

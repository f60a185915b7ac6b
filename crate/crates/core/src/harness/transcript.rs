//! Transcripts of brain transitions and avatar commands, and comparison.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bus::{keys, Envelope, Payload};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Entry {
    State {
        from: Option<String>,
        event: String,
        to: String,
        seq: u64,
    },
    Command {
        id: String,
        method: String,
        #[serde(default)]
        args: Payload,
    },
}

impl Entry {
    pub fn from_envelope(env: &Envelope) -> Option<Self> {
        let p = &env.payload;
        let s = |k: &str| p.get(k).and_then(Value::as_str).map(str::to_owned);
        match env.key.to_string().as_str() {
            keys::BRAIN_STATE => Some(Entry::State {
                from: s("from"),
                event: s("event")?,
                to: s("to")?,
                seq: p.get("seq")?.as_u64()?,
            }),
            keys::COMMAND => Some(Entry::Command {
                id: s("id")?,
                method: s("method")?,
                args: p.get("args").and_then(Value::as_object).cloned().unwrap_or_default(),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationResult {
    pub t: u64,
    pub state: String,
    pub within: u64,
    pub passed: bool,
    /// State seen when the expectation settled.
    pub observed: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    pub entries: Vec<Entry>,
    pub expectations: Vec<ExpectationResult>,
}

impl Transcript {
    /// One JSON object per line, no timestamps.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.expectations.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExpectationResult> {
        self.expectations.iter().filter(|e| !e.passed)
    }

    pub fn states_visited(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                Entry::State { to, .. } => Some(to.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn commands(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().filter_map(|e| match e {
            Entry::Command { id, method, .. } => Some((id.as_str(), method.as_str())),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diff {
    Equal,
    /// First differing line (0-based); `None` when one side ran out.
    Diverged {
        index: usize,
        left: Option<String>,
        right: Option<String>,
    },
}

impl Diff {
    pub fn is_equal(&self) -> bool {
        *self == Diff::Equal
    }
}

impl fmt::Display for Diff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diff::Equal => f.write_str("transcripts are equal"),
            Diff::Diverged { index, left, right } => {
                let show = |s: &Option<String>| s.clone().unwrap_or_else(|| "<end>".into());
                write!(f, "first divergence at entry {index}:\n  - {}\n  + {}", show(left), show(right))
            }
        }
    }
}

/// Normalizes one transcript line: JSON lines lose any `ts` field and are
/// re-serialized with sorted keys; other lines are compared verbatim.
fn normalize(line: &str) -> Value {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(mut map)) => {
            map.remove("ts");
            Value::Object(map)
        }
        Ok(v) => v,
        Err(_) => Value::String(line.to_owned()),
    }
}

/// Compares two rendered transcripts entry by entry. Order matters.
pub fn transcript_diff(a: &str, b: &str) -> Diff {
    let lines = |s: &str| s.lines().filter(|l| !l.trim().is_empty()).map(str::to_owned).collect::<Vec<_>>();
    let (la, lb) = (lines(a), lines(b));
    for i in 0..la.len().max(lb.len()) {
        let (x, y) = (la.get(i), lb.get(i));
        let same = match (x, y) {
            (Some(x), Some(y)) => normalize(x) == normalize(y),
            _ => false,
        };
        if !same {
            return Diff::Diverged {
                index: i,
                left: x.cloned(),
                right: y.cloned(),
            };
        }
    }
    Diff::Equal
}
